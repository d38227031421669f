// Copyright The convspectra Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef CONVSPECTRA_ANALYSIS_HPP
#define CONVSPECTRA_ANALYSIS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <vector>

#include "convspectra/core.hpp"

namespace convspectra
{

struct SpectralSummary
{
  static constexpr std::size_t kBins = 64;

  double max = 0.0;
  double min = 0.0;
  std::size_t count = 0;
  double condition = 1.0; // max / min, +inf when min == 0
  double mean = 0.0;
  std::array<std::size_t, kBins> histogram{}; // equal-width bins over [0, max]
};

inline SpectralSummary spectral_summary(const SpectrumResult &spectrum)
{
  const auto &v = spectrum.values;
  if (v.empty())
    throw Error(Errc::EmptySpectrum, "spectral_summary needs at least one value");
  SpectralSummary s;
  s.count = v.size();
  s.max = *std::max_element(v.begin(), v.end());
  s.min = *std::min_element(v.begin(), v.end());
  s.condition = s.min == 0.0 ? std::numeric_limits<double>::infinity() : s.max / s.min;
  double sum = 0.0;
  for (double x : v)
    sum += x;
  s.mean = sum / static_cast<double>(v.size());
  for (double x : v)
  {
    std::size_t bin = 0;
    if (s.max > 0.0)
      bin = std::min<std::size_t>(SpectralSummary::kBins - 1,
                                  static_cast<std::size_t>(x / s.max * SpectralSummary::kBins));
    ++s.histogram[bin];
  }
  return s;
}

namespace detail
{

// Value of a descending-sorted sample at quantile level u in (0, 1), with the sample's own
// points placed at midpoint levels (j + 0.5) / K and linear interpolation between them.
inline double quantile_at(const std::vector<double> &sorted_desc, double u)
{
  const std::size_t k = sorted_desc.size();
  const double pos = u * static_cast<double>(k) - 0.5;
  if (pos <= 0.0)
    return sorted_desc.front();
  if (pos >= static_cast<double>(k - 1))
    return sorted_desc.back();
  const auto lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  return sorted_desc[lo] + frac * (sorted_desc[lo + 1] - sorted_desc[lo]);
}

} // namespace detail

//
// Empirical Wasserstein-1 distance by quantile coupling: both spectra sorted descending, the
// shorter one resampled at the longer one's midpoint quantile levels, then the mean absolute
// difference. Equal lengths reduce to the mean elementwise difference.
//
inline double wasserstein1(const std::vector<double> &a, const std::vector<double> &b)
{
  if (a.empty() || b.empty())
    throw Error(Errc::EmptySpectrum, "wasserstein1 needs nonempty spectra");
  std::vector<double> x(a), y(b);
  std::sort(x.begin(), x.end(), std::greater<double>{});
  std::sort(y.begin(), y.end(), std::greater<double>{});
  if (x.size() < y.size())
    std::swap(x, y);
  const std::size_t n = x.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
  {
    const double other = y.size() == n ? y[i]
                                       : detail::quantile_at(y, (static_cast<double>(i) + 0.5) /
                                                                    static_cast<double>(n));
    sum += std::abs(x[i] - other);
  }
  return sum / static_cast<double>(n);
}

inline double wasserstein1(const SpectrumResult &a, const SpectrumResult &b)
{
  return wasserstein1(a.values, b.values);
}

/// |sigma_max(reference) - sigma_max(other)| / sigma_max(reference); 0 when both vanish.
inline double relative_max_difference(const SpectrumResult &reference, const SpectrumResult &other)
{
  const double p = reference.max(), d = other.max();
  if (p == 0.0)
    return d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(p - d) / p;
}

} // namespace convspectra

#endif // CONVSPECTRA_ANALYSIS_HPP
