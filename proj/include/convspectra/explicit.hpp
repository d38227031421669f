// Copyright The convspectra Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef CONVSPECTRA_EXPLICIT_HPP
#define CONVSPECTRA_EXPLICIT_HPP

#include <lapacke.h>

#include <algorithm>
#include <cstdlib>
#include <ostream>
#include <string>
#include <vector>

#include "convspectra/core.hpp"
#include "convspectra/parallel.hpp"

namespace convspectra
{

struct MatrixEntry
{
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

//
// The unrolled convolution as a coordinate list. Rows are (x1 * n + x2) * c_out + o and
// columns (x1 * n + x2) * c_in + i; duplicate coordinates (a kernel wider than the torus under
// wrapping) are summed on densification.
//
struct ExplicitMatrix
{
  std::size_t rows = 0;
  std::size_t cols = 0;
  Boundary boundary = Boundary::periodic;
  SpatialDims dims{};
  std::vector<MatrixEntry> entries;

  /// y = A x for a real input of length cols.
  std::vector<double> apply(const std::vector<double> &x) const
  {
    if (x.size() != cols)
      throw Error(Errc::ShapeMismatch, "input length " + std::to_string(x.size()) +
                                           " != matrix columns " + std::to_string(cols));
    std::vector<double> y(rows, 0.0);
    for (const auto &e : entries)
      y[e.row] += e.value * x[e.col];
    return y;
  }

  std::vector<Complex> apply(const std::vector<Complex> &x) const
  {
    if (x.size() != cols)
      throw Error(Errc::ShapeMismatch, "input length " + std::to_string(x.size()) +
                                           " != matrix columns " + std::to_string(cols));
    std::vector<Complex> y(rows);
    for (const auto &e : entries)
      y[e.row] += e.value * x[e.col];
    return y;
  }

  /// Row-major dense copy.
  std::vector<double> dense() const
  {
    std::vector<double> d(rows * cols, 0.0);
    for (const auto &e : entries)
      d[e.row * cols + e.col] += e.value;
    return d;
  }

  /// One "row col value" line per entry, values with 17 significant digits.
  void write_coordinates(std::ostream &os) const
  {
    const auto old = os.precision(17);
    for (const auto &e : entries)
      os << e.row << ' ' << e.col << ' ' << e.value << '\n';
    os.precision(old);
  }
};

inline void check_explicit_cap(std::size_t rows, std::size_t cols, std::size_t cap)
{
  if (rows > cap || cols > cap)
    throw Error(Errc::SizeCapExceeded,
                "explicit matrix would be " + std::to_string(rows) + " x " +
                    std::to_string(cols) + " (" +
                    std::to_string(static_cast<double>(rows) * static_cast<double>(cols) * 8.0 /
                                   (1024.0 * 1024.0 * 1024.0)) +
                    " GiB dense); cap is " + std::to_string(cap) + " rows/cols");
}

namespace detail
{

inline void check_dirichlet_fit(const ConvKernel &kernel, SpatialDims dims)
{
  for (const auto &y : kernel.offsets())
    if (static_cast<std::size_t>(std::abs(y.row)) >= dims.m ||
        static_cast<std::size_t>(std::abs(y.col)) >= dims.n)
      throw Error(Errc::KernelLargerThanTorus,
                  "kernel offsets exceed the " + std::to_string(dims.m) + "x" +
                      std::to_string(dims.n) + " grid");
}

// Visits every (x_out, o, x_in, i, weight) contribution in a fixed order.
template <typename Visit>
void for_each_tap(const ConvKernel &kernel, SpatialDims dims, Boundary boundary, Visit &&visit)
{
  const auto offsets = kernel.offsets();
  const long m = static_cast<long>(dims.m), n = static_cast<long>(dims.n);
  const std::size_t co = kernel.c_out(), ci = kernel.c_in(), taps = offsets.size();
  const auto w = kernel.weights();
  for (long x1 = 0; x1 < m; ++x1)
    for (long x2 = 0; x2 < n; ++x2)
      for (std::size_t o = 0; o < co; ++o)
        for (std::size_t i = 0; i < ci; ++i)
          for (std::size_t t = 0; t < taps; ++t)
          {
            long y1 = x1 + offsets[t].row, y2 = x2 + offsets[t].col;
            if (boundary == Boundary::periodic)
            {
              y1 = ((y1 % m) + m) % m;
              y2 = ((y2 % n) + n) % n;
            }
            else if (y1 < 0 || y1 >= m || y2 < 0 || y2 >= n)
              continue;
            const std::size_t out_pt = static_cast<std::size_t>(x1 * n + x2);
            const std::size_t in_pt = static_cast<std::size_t>(y1 * n + y2);
            visit(out_pt, o, in_pt, i, w[(o * ci + i) * taps + t]);
          }
}

} // namespace detail

inline ExplicitMatrix build_explicit(const ConvKernel &kernel, SpatialDims dims, Boundary boundary,
                                     const Limits &limits = {})
{
  validate_kernel(kernel);
  if (!dims.valid())
    throw Error(Errc::ZeroDimension, "spatial dims must be >= 1");
  ExplicitMatrix out;
  out.rows = dims.points() * kernel.c_out();
  out.cols = dims.points() * kernel.c_in();
  out.boundary = boundary;
  out.dims = dims;
  check_explicit_cap(out.rows, out.cols, limits.explicit_cap);
  if (boundary == Boundary::dirichlet)
    detail::check_dirichlet_fit(kernel, dims);
  out.entries.reserve(kernel.shape().size() * dims.points());
  const std::size_t co = kernel.c_out(), ci = kernel.c_in();
  detail::for_each_tap(kernel, dims, boundary,
                       [&](std::size_t out_pt, std::size_t o, std::size_t in_pt, std::size_t i,
                           double w) { out.entries.push_back({out_pt * co + o, in_pt * ci + i, w}); });
  return out;
}

//
// Descending singular values of the densified matrix via LAPACK dgesdd (values only).
//
inline SpectrumResult dense_spectrum(const ExplicitMatrix &matrix, std::size_t c_in,
                                     std::size_t c_out, const Limits &limits = {})
{
  check_explicit_cap(matrix.rows, matrix.cols, limits.explicit_cap);
  SpectrumResult res;
  res.method = Method::explicit_matrix;
  res.boundary = matrix.boundary;
  res.dims = matrix.dims;
  res.c_in = c_in;
  res.c_out = c_out;
  const std::size_t k = std::min(matrix.rows, matrix.cols);
  if (k == 0)
    return res;

  Stopwatch clock;
  std::vector<double> a = matrix.dense();
  const double s_copy = clock.seconds();
  clock.restart();
  res.values.resize(k);
  const auto rows = static_cast<lapack_int>(matrix.rows);
  const auto cols = static_cast<lapack_int>(matrix.cols);
  const lapack_int info = LAPACKE_dgesdd(LAPACK_ROW_MAJOR, 'N', rows, cols, a.data(), cols,
                                         res.values.data(), nullptr, rows, nullptr, cols);
  if (info != 0)
    throw Error(info > 0 ? Errc::ConvergenceFailure : Errc::InvalidArgument,
                "LAPACK dgesdd returned info=" + std::to_string(info));
  PhaseTimings t;
  t.s_copy = s_copy;
  t.s_svd = clock.seconds();
  t.reconcile();
  res.timings = t;
  // dgesdd already returns descending order; enforce it for exact ties across platforms.
  std::stable_sort(res.values.begin(), res.values.end(), std::greater<double>{});
  return res;
}

inline SpectrumResult dense_spectrum(const ExplicitMatrix &matrix, const ConvKernel &kernel,
                                     const Limits &limits = {})
{
  return dense_spectrum(matrix, kernel.c_in(), kernel.c_out(), limits);
}

/// Real multi-channel field on the grid, indexed (x1 * n + x2) * channels + c.
struct ChannelField
{
  SpatialDims dims{};
  std::size_t channels = 1;
  std::vector<double> data;

  ChannelField() = default;
  ChannelField(SpatialDims d, std::size_t c) : dims(d), channels(c), data(d.points() * c, 0.0) {}

  double &operator()(std::size_t x1, std::size_t x2, std::size_t c)
  {
    return data[(x1 * dims.n + x2) * channels + c];
  }
  double operator()(std::size_t x1, std::size_t x2, std::size_t c) const
  {
    return data[(x1 * dims.n + x2) * channels + c];
  }
};

/// Direct spatial evaluation of (A * f)(x) = sum_y M_y f(x + y).
inline ChannelField apply_conv_reference(const ConvKernel &kernel, const ChannelField &input,
                                         Boundary boundary)
{
  validate_kernel(kernel);
  if (input.channels != kernel.c_in() || input.data.size() != input.dims.points() * input.channels)
    throw Error(Errc::ShapeMismatch, "input has " + std::to_string(input.channels) +
                                         " channels, kernel expects " +
                                         std::to_string(kernel.c_in()));
  if (boundary == Boundary::dirichlet)
    detail::check_dirichlet_fit(kernel, input.dims);
  ChannelField out(input.dims, kernel.c_out());
  const std::size_t co = kernel.c_out(), ci = kernel.c_in();
  detail::for_each_tap(kernel, input.dims, boundary,
                       [&](std::size_t out_pt, std::size_t o, std::size_t in_pt, std::size_t i,
                           double w) { out.data[out_pt * co + o] += w * input.data[in_pt * ci + i]; });
  return out;
}

} // namespace convspectra

#endif // CONVSPECTRA_EXPLICIT_HPP
