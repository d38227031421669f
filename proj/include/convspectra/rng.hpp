// Copyright The convspectra Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef CONVSPECTRA_RNG_HPP
#define CONVSPECTRA_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "convspectra/core.hpp"

namespace convspectra
{

//
// Counter-based generator: draw i of stream `seed` is splitmix64(seed + (i + 1) * golden),
// so any draw is addressable without advancing state and the sequence does not depend on the
// platform's <random> implementation.
//
class CounterRng
{
public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  static std::uint64_t mix(std::uint64_t z)
  {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t bits(std::uint64_t counter) const
  {
    return mix(seed_ + (counter + 1) * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double unit(std::uint64_t counter) const
  {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  /// Uniform in [-1, 1).
  double symmetric(std::uint64_t counter) const { return 2.0 * unit(counter) - 1.0; }

  /// Standard normal via Box-Muller on draws 2i and 2i+1.
  double normal(std::uint64_t index) const
  {
    const double u1 = 1.0 - unit(2 * index); // (0, 1]
    const double u2 = unit(2 * index + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

private:
  std::uint64_t seed_;
};

enum class Distribution
{
  normal,
  uniform
};

inline Distribution parse_distribution(const std::string &s)
{
  if (s == "normal")
    return Distribution::normal;
  if (s == "uniform")
    return Distribution::uniform;
  throw Error(Errc::InvalidArgument, "unknown distribution '" + s + "'");
}

inline ConvKernel random_kernel(KernelShape shape, std::uint64_t seed,
                                Distribution dist = Distribution::normal)
{
  if (shape.c_out == 0 || shape.c_in == 0 || shape.k_h == 0 || shape.k_w == 0)
    throw Error(Errc::ZeroDimension, "kernel extents must be >= 1");
  const CounterRng rng(seed);
  std::vector<double> w(shape.size());
  for (std::size_t e = 0; e < w.size(); ++e)
    w[e] = dist == Distribution::normal ? rng.normal(e) : rng.symmetric(e);
  return {shape, std::move(w)};
}

} // namespace convspectra

#endif // CONVSPECTRA_RNG_HPP
