// Copyright The convspectra Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef CONVSPECTRA_FFT_HPP
#define CONVSPECTRA_FFT_HPP

#include <cmath>
#include <numbers>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "convspectra/core.hpp"
#include "convspectra/parallel.hpp"
#include "convspectra/symbol.hpp"

namespace convspectra
{

namespace detail
{

inline std::size_t smallest_radix(std::size_t n)
{
  for (std::size_t p : {2u, 3u, 5u})
    if (n % p == 0)
      return p;
  return n;
}

inline bool is_smooth_235(std::size_t n)
{
  for (std::size_t p : {2u, 3u, 5u})
    while (n % p == 0)
      n /= p;
  return n == 1;
}

inline void warn_slow_dft(std::size_t n)
{
  static std::set<std::size_t> warned;
  static std::mutex guard;
  std::lock_guard lock(guard);
  if (warned.insert(n).second)
    warn("DFT length " + std::to_string(n) + " has prime factors outside {2,3,5}; using O(N^2) "
         "direct summation for the remaining factor");
}

//
// Recursive mixed-radix decimation-in-time transform of length n read from `in` at `stride`,
// written contiguously to `out`. `twiddle[j] = e^{-2 pi i j / total}` for the top-level length;
// `tw_step` maps this level's root of unity onto that table.
//
inline void fft_recursive(const Complex *in, std::size_t stride, Complex *out, std::size_t n,
                          const std::vector<Complex> &twiddle, std::size_t tw_step)
{
  if (n == 1)
  {
    out[0] = in[0];
    return;
  }
  const std::size_t total = twiddle.size();
  const std::size_t p = smallest_radix(n);
  if (p == n && n > 5)
  {
    // Direct DFT for a prime factor outside {2,3,5}.
    for (std::size_t k = 0; k < n; ++k)
    {
      Complex acc{};
      for (std::size_t j = 0; j < n; ++j)
        acc += in[j * stride] * twiddle[(j * k % n) * tw_step % total];
      out[k] = acc;
    }
    return;
  }
  const std::size_t m = n / p;
  for (std::size_t r = 0; r < p; ++r)
    fft_recursive(in + r * stride, stride * p, out + r * m, m, twiddle, tw_step * p);

  Complex y[5];
  for (std::size_t k = 0; k < m; ++k)
  {
    for (std::size_t r = 0; r < p; ++r)
      y[r] = out[r * m + k];
    for (std::size_t q = 0; q < p; ++q)
    {
      const std::size_t kk = k + q * m;
      Complex acc = y[0];
      for (std::size_t r = 1; r < p; ++r)
        acc += y[r] * twiddle[(r * kk % n) * tw_step];
      out[kk] = acc;
    }
  }
}

inline std::vector<Complex> make_twiddles(std::size_t n)
{
  std::vector<Complex> tw(n);
  for (std::size_t j = 0; j < n; ++j)
  {
    const double theta = -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
    tw[j] = {std::cos(theta), std::sin(theta)};
  }
  return tw;
}

} // namespace detail

/// In-place forward DFT (negative exponent) of a length-n sequence at the given stride.
class Dft1d
{
public:
  explicit Dft1d(std::size_t n) : n_(n), twiddle_(detail::make_twiddles(n)), scratch_(n)
  {
    if (!detail::is_smooth_235(n))
      detail::warn_slow_dft(n);
  }

  void forward(Complex *data, std::size_t stride)
  {
    detail::fft_recursive(data, stride, scratch_.data(), n_, twiddle_, 1);
    for (std::size_t k = 0; k < n_; ++k)
      data[k * stride] = scratch_[k];
  }

private:
  std::size_t n_;
  std::vector<Complex> twiddle_;
  std::vector<Complex> scratch_;
};

/// X[a,b] = sum_{u,v} x[u,v] e^{-2 pi i (a u / m + b v / n)} for a row-major m x n grid.
inline CMatrix dft_2d(const CMatrix &grid)
{
  CMatrix out = grid;
  if (grid.rows == 0 || grid.cols == 0)
    return out;
  Dft1d rows(grid.cols), cols(grid.rows);
  for (std::size_t r = 0; r < grid.rows; ++r)
    rows.forward(out.data.data() + r * grid.cols, 1);
  for (std::size_t c = 0; c < grid.cols; ++c)
    cols.forward(out.data.data() + c, grid.cols);
  return out;
}

/// Inverse of dft_2d (positive exponent, scaled by 1/(m n)).
inline CMatrix idft_2d(const CMatrix &spectrum)
{
  CMatrix tmp = spectrum;
  for (auto &z : tmp.data)
    z = std::conj(z);
  CMatrix out = dft_2d(tmp);
  const double scale = 1.0 / static_cast<double>(spectrum.rows * spectrum.cols);
  for (auto &z : out.data)
    z = std::conj(z) * scale;
  return out;
}

//
// Symbol field by FFT: each channel pair's taps are wrapped onto an m x n grid at
// (y_row mod m, y_col mod n) and transformed. Taps that land on the same point add up, so a
// kernel wider than the torus gives the same symbol as the periodic operator. The forward DFT coefficient (a, b) equals the
// symbol at frequency -(a/m, b/n), so it is scattered into block ((-a) mod m, (-b) mod n);
// the resulting blocks coincide with build_symbol_field's. Embedding plus DFT is timed as the
// transform phase, the scatter as the copy phase.
//
inline SymbolField fft_symbol_field(const ConvKernel &kernel, SpatialDims dims,
                                    std::size_t workers = 1, const Limits &limits = {})
{
  validate_kernel(kernel);
  FrequencyGrid grid(dims);
  const std::size_t co = kernel.c_out(), ci = kernel.c_in();
  const std::size_t pairs = co * ci, points = dims.points();
  check_field_budget(2 * pairs * points, limits);

  const auto offsets = kernel.offsets();
  const std::size_t taps = offsets.size();
  const auto weights = kernel.weights();

  Stopwatch clock;
  // Frequency-strided staging: channel pair (o, i) owns points consecutive entries.
  std::vector<Complex> staged(pairs * points);
  parallel_ranges(pairs, workers,
                  [&](std::size_t, std::size_t e0, std::size_t e1)
                  {
                    Dft1d rows(dims.n), cols(dims.m);
                    for (std::size_t e = e0; e < e1; ++e)
                    {
                      Complex *g = staged.data() + e * points;
                      for (std::size_t t = 0; t < taps; ++t)
                      {
                        const auto wrap = [](int y, std::size_t len)
                        {
                          const long l = static_cast<long>(len);
                          return static_cast<std::size_t>(((y % l) + l) % l);
                        };
                        g[wrap(offsets[t].row, dims.m) * dims.n + wrap(offsets[t].col, dims.n)] +=
                            weights[e * taps + t];
                      }
                      for (std::size_t r = 0; r < dims.m; ++r)
                        rows.forward(g + r * dims.n, 1);
                      for (std::size_t c = 0; c < dims.n; ++c)
                        cols.forward(g + c, dims.n);
                    }
                  });
  const double s_transform = clock.seconds();

  clock.restart();
  SymbolField field(grid, co, ci, Layout::block_contiguous);
  parallel_ranges(points, workers,
                  [&](std::size_t, std::size_t b0, std::size_t b1)
                  {
                    for (std::size_t b = b0; b < b1; ++b)
                    {
                      const std::size_t src = grid.negated(b);
                      Complex *dst = field.block_span(b).data();
                      for (std::size_t e = 0; e < pairs; ++e)
                        dst[e] = staged[e * points + src];
                    }
                  });
  field.set_build_seconds(s_transform);
  field.set_copy_seconds(clock.seconds());
  return field;
}

} // namespace convspectra

#endif // CONVSPECTRA_FFT_HPP
