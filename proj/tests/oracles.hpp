// Copyright The convspectra Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Reference computations for the test suite. None of these call into the library's numerical
// paths; they are written from the defining formulas and use Eigen for dense decompositions.

#ifndef CONVSPECTRA_TESTS_ORACLES_HPP
#define CONVSPECTRA_TESTS_ORACLES_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include "convspectra/core.hpp"

namespace oracle
{

using cd = std::complex<double>;
using convspectra::ConvKernel;
using convspectra::SpatialDims;

/// sum_{p,q} W[:, :, p, q] exp(2 pi i (k1 (p - kh/2) + k2 (q - kw/2))), straight from the formula.
inline Eigen::MatrixXcd symbol(const ConvKernel &w, double k1, double k2)
{
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(w.c_out()),
                                              static_cast<Eigen::Index>(w.c_in()));
  for (std::size_t p = 0; p < w.k_h(); ++p)
    for (std::size_t q = 0; q < w.k_w(); ++q)
    {
      const double y1 = static_cast<double>(p) - static_cast<double>(w.k_h() / 2);
      const double y2 = static_cast<double>(q) - static_cast<double>(w.k_w() / 2);
      const cd phase = std::polar(1.0, 2.0 * std::numbers::pi * (k1 * y1 + k2 * y2));
      for (std::size_t o = 0; o < w.c_out(); ++o)
        for (std::size_t i = 0; i < w.c_in(); ++i)
          a(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i)) += w(o, i, p, q) * phase;
    }
  return a;
}

/// Closed-form symbol of the 3x3 averaging stencil.
inline double averaging_symbol(double k1, double k2)
{
  const double two_pi = 2.0 * std::numbers::pi;
  return (1.0 + 2.0 * std::cos(two_pi * k1)) * (1.0 + 2.0 * std::cos(two_pi * k2)) / 9.0;
}

/// O(N^2) 2D DFT with negative exponent, row-major m x n.
inline std::vector<cd> naive_dft(const std::vector<cd> &x, std::size_t m, std::size_t n)
{
  std::vector<cd> out(m * n);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < n; ++b)
    {
      cd acc = 0.0;
      for (std::size_t u = 0; u < m; ++u)
        for (std::size_t v = 0; v < n; ++v)
        {
          const double t = static_cast<double>((a * u) % m) / static_cast<double>(m) +
                           static_cast<double>((b * v) % n) / static_cast<double>(n);
          acc += x[u * n + v] * std::polar(1.0, -2.0 * std::numbers::pi * t);
        }
      out[a * n + b] = acc;
    }
  return out;
}

inline std::size_t wrap(long v, std::size_t period)
{
  const long p = static_cast<long>(period);
  return static_cast<std::size_t>(((v % p) + p) % p);
}

//
// Dense unrolled operator (f -> sum_y M_y f(x + y)) assembled cell by cell. Rows are
// (x1 * n + x2) * c_out + o, columns (x1 * n + x2) * c_in + i, x1 along the height m.
//
inline Eigen::MatrixXd dense_operator(const ConvKernel &w, SpatialDims d, bool periodic)
{
  const std::size_t co = w.c_out(), ci = w.c_in();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d.points() * co),
                                            static_cast<Eigen::Index>(d.points() * ci));
  for (std::size_t x1 = 0; x1 < d.m; ++x1)
    for (std::size_t x2 = 0; x2 < d.n; ++x2)
      for (std::size_t p = 0; p < w.k_h(); ++p)
        for (std::size_t q = 0; q < w.k_w(); ++q)
        {
          const long s1 = static_cast<long>(x1) + static_cast<long>(p) - static_cast<long>(w.k_h() / 2);
          const long s2 = static_cast<long>(x2) + static_cast<long>(q) - static_cast<long>(w.k_w() / 2);
          const bool inside = s1 >= 0 && s2 >= 0 && s1 < static_cast<long>(d.m) &&
                              s2 < static_cast<long>(d.n);
          if (!periodic && !inside)
            continue;
          const std::size_t in_pt = wrap(s1, d.m) * d.n + wrap(s2, d.n);
          const std::size_t out_pt = x1 * d.n + x2;
          for (std::size_t o = 0; o < co; ++o)
            for (std::size_t i = 0; i < ci; ++i)
              a(static_cast<Eigen::Index>(out_pt * co + o), static_cast<Eigen::Index>(in_pt * ci + i)) +=
                  w(o, i, p, q);
        }
  return a;
}

inline std::vector<double> descending(const Eigen::VectorXd &v)
{
  std::vector<double> out(v.data(), v.data() + v.size());
  std::sort(out.begin(), out.end(), std::greater<double>{});
  return out;
}

/// Singular values by Eigen's two-sided Jacobi SVD.
inline std::vector<double> singular_values(const Eigen::MatrixXd &a)
{
  return descending(Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues());
}

/// Singular values as square roots of the eigenvalues of the smaller Gram matrix.
inline std::vector<double> gram_singular_values(const Eigen::MatrixXcd &a)
{
  const Eigen::MatrixXcd g = a.rows() >= a.cols() ? Eigen::MatrixXcd(a.adjoint() * a)
                                                  : Eigen::MatrixXcd(a * a.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g, Eigen::EigenvaluesOnly);
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index j = 0; j < ev.size(); ++j)
    ev(j) = std::sqrt(std::max(0.0, ev(j)));
  return descending(ev);
}

/// W1 for equal-length samples: mean absolute difference of the ascending order statistics.
inline double w1_equal_length(std::vector<double> a, std::vector<double> b)
{
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

inline double max_rel_error(const std::vector<double> &got, const std::vector<double> &want)
{
  double worst = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i)
    worst = std::max(worst, std::abs(got[i] - want[i]) / std::max(std::abs(want[i]), 1e-300));
  return worst;
}

} // namespace oracle

#endif // CONVSPECTRA_TESTS_ORACLES_HPP
