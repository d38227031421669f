// Copyright The convspectra Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef CONVSPECTRA_BLOCK_SVD_HPP
#define CONVSPECTRA_BLOCK_SVD_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "convspectra/core.hpp"
#include "convspectra/parallel.hpp"
#include "convspectra/symbol.hpp"

namespace convspectra
{

struct SvdOptions
{
  int max_sweeps = 100;
};

/// Per-frequency factors A_k = U diag(sigma) V^*, r = min(c_out, c_in) columns each.
struct SvdTriplet
{
  Frequency k{};
  CMatrix U;                 // c_out x r
  std::vector<double> sigma; // descending
  CMatrix V;                 // c_in x r
};

namespace detail
{

inline double squared_norm(const double *col, std::size_t len)
{
  double s = 0.0;
#pragma omp simd reduction(+ : s)
  for (std::size_t r = 0; r < 2 * len; ++r)
    s += col[r] * col[r];
  return s;
}

//
// One-sided (Hestenes) Jacobi on a complex matrix of `ncols` columns of length `len`. Each
// column is stored as `len` real parts followed by `len` imaginary parts. Columns are rotated
// pairwise until mutually orthogonal; the column norms are then the singular values. When `v`
// is non-null the same rotations are applied to the ncols x ncols matrix it points to (same
// storage convention), which must be initialised by the caller.
//
// Squared column norms are refreshed exactly at the start of every sweep and updated in
// closed form after each rotation in between.
//
// Returns the number of sweeps used. Throws ConvergenceFailure past max_sweeps.
//
inline int jacobi_orthogonalize(double *a, std::size_t len, std::size_t ncols, double *v,
                                int max_sweeps)
{
  const double tol = std::numeric_limits<double>::epsilon() * static_cast<double>(len);
  std::vector<double> sq(ncols);
  for (int sweep = 1; sweep <= max_sweeps; ++sweep)
  {
    for (std::size_t j = 0; j < ncols; ++j)
      sq[j] = squared_norm(a + 2 * len * j, len);
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < ncols; ++p)
    {
      for (std::size_t q = p + 1; q < ncols; ++q)
      {
        double *apr = a + 2 * len * p, *api = apr + len;
        double *aqr = a + 2 * len * q, *aqi = aqr + len;
        const double alpha = sq[p], beta = sq[q];
        double gre = 0.0, gim = 0.0;
        // conj(ap) . aq
#pragma omp simd reduction(+ : gre, gim)
        for (std::size_t r = 0; r < len; ++r)
        {
          gre += apr[r] * aqr[r] + api[r] * aqi[r];
          gim += apr[r] * aqi[r] - api[r] * aqr[r];
        }
        const double gabs = std::sqrt(gre * gre + gim * gim);
        if (!(gabs > tol * std::sqrt(alpha) * std::sqrt(beta)))
          continue;
        rotated = true;

        const double zeta = (beta - alpha) / (2.0 * gabs);
        const double az = std::abs(zeta);
        // 1/(2 zeta) is the limit of the smaller root once zeta^2 would overflow.
        const double t = az > 1e150 ? 0.5 / zeta
                                    : std::copysign(1.0, zeta) / (az + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        // e^{-i phi} = conj(gamma) / |gamma|
        const double er = gre / gabs, ei = -gim / gabs;
        const double ser = s * er, sei = s * ei, cer = c * er, cei = c * ei;

        auto rotate = [&](double *xr, double *xi, double *yr, double *yi, std::size_t n)
        {
#pragma omp simd
          for (std::size_t r = 0; r < n; ++r)
          {
            const double x_r = xr[r], x_i = xi[r], y_r = yr[r], y_i = yi[r];
            xr[r] = c * x_r - (ser * y_r - sei * y_i);
            xi[r] = c * x_i - (ser * y_i + sei * y_r);
            yr[r] = s * x_r + (cer * y_r - cei * y_i);
            yi[r] = s * x_i + (cer * y_i + cei * y_r);
          }
        };
        rotate(apr, api, aqr, aqi, len);
        if (v != nullptr)
        {
          double *vp = v + 2 * ncols * p, *vq = v + 2 * ncols * q;
          rotate(vp, vp + ncols, vq, vq + ncols, ncols);
        }
        sq[p] = alpha - t * gabs;
        sq[q] = beta + t * gabs;
      }
    }
    if (!rotated)
      return sweep;
  }
  throw Error(Errc::ConvergenceFailure,
              "Jacobi SVD did not converge within " + std::to_string(max_sweeps) + " sweeps");
}

// Work matrix for a c_out x c_in block: the block itself when c_out >= c_in, otherwise its
// conjugate transpose, so the rotated dimension is always r = min(c_out, c_in).
struct BlockWorkspace
{
  std::size_t c_out = 0, c_in = 0;
  bool transposed = false;
  std::size_t len = 0, ncols = 0;
  std::vector<double> a;
  std::vector<double> v;
  std::vector<double> norms;
  std::vector<std::size_t> order;

  void reset(std::size_t rows, std::size_t cols)
  {
    c_out = rows;
    c_in = cols;
    transposed = rows < cols;
    len = transposed ? cols : rows;
    ncols = transposed ? rows : cols;
    a.resize(2 * len * ncols);
    norms.resize(ncols);
    order.resize(ncols);
  }

  template <typename Get> void load(Get &&get)
  {
    for (std::size_t o = 0; o < c_out; ++o)
      for (std::size_t i = 0; i < c_in; ++i)
      {
        const Complex z = get(o, i);
        if (!transposed)
        {
          a[2 * len * i + o] = z.real();
          a[2 * len * i + len + o] = z.imag();
        }
        else
        {
          a[2 * len * o + i] = z.real();
          a[2 * len * o + len + i] = -z.imag();
        }
      }
  }

  void run(bool with_vectors, int max_sweeps)
  {
    double *vp = nullptr;
    if (with_vectors)
    {
      v.assign(2 * ncols * ncols, 0.0);
      for (std::size_t j = 0; j < ncols; ++j)
        v[2 * ncols * j + j] = 1.0;
      vp = v.data();
    }
    jacobi_orthogonalize(a.data(), len, ncols, vp, max_sweeps);
    for (std::size_t j = 0; j < ncols; ++j)
    {
      norms[j] = std::sqrt(squared_norm(a.data() + 2 * len * j, len));
      if (!std::isfinite(norms[j]))
        throw Error(Errc::ConvergenceFailure, "non-finite singular value (NaN/Inf in block)");
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });
  }

  void sorted_values(double *out) const
  {
    for (std::size_t j = 0; j < ncols; ++j)
      out[j] = norms[order[j]];
  }
};

// Orthonormalises the columns of a (len x r) matrix in place, in column order, keeping each
// column's direction as long as it is numerically independent of the previous ones; columns
// that collapse (zero singular values) are replaced by completing the basis.
inline void orthonormalize_columns(CMatrix &m)
{
  const std::size_t len = m.rows, r = m.cols;
  auto project_out = [&](std::vector<Complex> &x, std::size_t upto)
  {
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t j = 0; j < upto; ++j)
      {
        Complex d = 0.0;
        for (std::size_t row = 0; row < len; ++row)
          d += std::conj(m(row, j)) * x[row];
        for (std::size_t row = 0; row < len; ++row)
          x[row] -= d * m(row, j);
      }
  };
  auto norm = [](const std::vector<Complex> &x)
  {
    double s = 0.0;
    for (const auto &z : x)
      s += std::norm(z);
    return std::sqrt(s);
  };
  std::vector<Complex> x(len);
  for (std::size_t c = 0; c < r; ++c)
  {
    for (std::size_t row = 0; row < len; ++row)
      x[row] = m(row, c);
    const double before = norm(x);
    project_out(x, c);
    double after = norm(x);
    if (!(before > 0.0) || after < 0.5 * before)
    {
      // Degenerate direction: take the first unit vector that survives projection.
      for (std::size_t e = 0; e < len; ++e)
      {
        std::fill(x.begin(), x.end(), Complex{});
        x[e] = 1.0;
        project_out(x, c);
        after = norm(x);
        if (after > 0.5)
          break;
      }
    }
    for (std::size_t row = 0; row < len; ++row)
      m(row, c) = x[row] / after;
  }
}

inline SvdTriplet triplet_from_workspace(const BlockWorkspace &ws, Frequency k)
{
  const std::size_t r = ws.ncols;
  SvdTriplet out;
  out.k = k;
  out.sigma.resize(r);
  ws.sorted_values(out.sigma.data());

  // Normalised work columns and accumulated rotations, in sorted order.
  CMatrix cols(ws.len, r), rot(r, r);
  for (std::size_t j = 0; j < r; ++j)
  {
    const std::size_t src = ws.order[j];
    const double nrm = ws.norms[src];
    const double *col = ws.a.data() + 2 * ws.len * src;
    for (std::size_t row = 0; row < ws.len; ++row)
      cols(row, j) = nrm > 0.0 ? Complex{col[row] / nrm, col[ws.len + row] / nrm} : Complex{};
    const double *vc = ws.v.data() + 2 * r * src;
    for (std::size_t row = 0; row < r; ++row)
      rot(row, j) = {vc[row], vc[r + row]};
  }
  orthonormalize_columns(cols);
  if (!ws.transposed)
  {
    out.U = std::move(cols);
    out.V = std::move(rot);
  }
  else
  {
    out.U = std::move(rot);
    out.V = std::move(cols);
  }
  return out;
}

} // namespace detail

/// Full SVD of one complex block.
inline SvdTriplet svd_block(const CMatrix &block, Frequency k = {}, const SvdOptions &opts = {})
{
  for (const auto &z : block.data)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw Error(Errc::ConvergenceFailure, "block contains non-finite entries");
  detail::BlockWorkspace ws;
  ws.reset(block.rows, block.cols);
  ws.load([&](std::size_t o, std::size_t i) { return block(o, i); });
  ws.run(true, opts.max_sweeps);
  return detail::triplet_from_workspace(ws, k);
}

/// Singular values only, descending.
inline std::vector<double> block_singular_values(const CMatrix &block, const SvdOptions &opts = {})
{
  detail::BlockWorkspace ws;
  ws.reset(block.rows, block.cols);
  ws.load([&](std::size_t o, std::size_t i) { return block(o, i); });
  ws.run(false, opts.max_sweeps);
  std::vector<double> out(ws.ncols);
  ws.sorted_values(out.data());
  return out;
}

//
// Batch interface: singular values of blocks [begin, end) of `field`, written to
// out[(b - begin) * r ...] per block in descending order. Reads the field only.
//
inline void batch_singular_values(const SymbolField &field, std::size_t begin, std::size_t end,
                                  std::span<double> out, const SvdOptions &opts = {})
{
  const std::size_t r = std::min(field.c_out(), field.c_in());
  detail::BlockWorkspace ws;
  ws.reset(field.c_out(), field.c_in());
  const bool contiguous = field.layout() == Layout::block_contiguous;
  const std::size_t ci = field.c_in();
  for (std::size_t b = begin; b < end; ++b)
  {
    if (contiguous)
    {
      const auto blk = field.block_span(b);
      ws.load([&](std::size_t o, std::size_t i) { return blk[o * ci + i]; });
    }
    else
      ws.load([&](std::size_t o, std::size_t i) { return field.at(b, o, i); });
    try
    {
      ws.run(false, opts.max_sweeps);
    }
    catch (const Error &e)
    {
      throw Error(e.code(), std::string(e.what()) + " at frequency index " + std::to_string(b));
    }
    ws.sorted_values(out.data() + (b - begin) * r);
  }
}

/// Stable descending sort; equal values keep frequency order.
inline void sort_descending(std::vector<double> &values)
{
  std::stable_sort(values.begin(), values.end(), std::greater<double>{});
}

struct FieldSpectrum
{
  SpectrumResult result;
  std::vector<SvdTriplet> triplets; // empty when values_only
};

struct SpectrumOptions
{
  bool values_only = true;
  std::size_t workers = 1;
  SvdOptions svd{};
};

inline FieldSpectrum spectrum_from_field(const SymbolField &field, const SpectrumOptions &opts = {})
{
  const std::size_t r = std::min(field.c_out(), field.c_in());
  const std::size_t blocks = field.block_count();
  FieldSpectrum out;
  auto &res = out.result;
  res.dims = field.grid().dims();
  res.c_in = field.c_in();
  res.c_out = field.c_out();
  res.method = Method::lfa;
  res.boundary = Boundary::periodic;
  res.values.resize(blocks * r);

  Stopwatch clock;
  if (opts.values_only)
  {
    parallel_ranges(blocks, opts.workers,
                    [&](std::size_t, std::size_t b0, std::size_t b1)
                    {
                      batch_singular_values(
                          field, b0, b1, std::span<double>(res.values).subspan(b0 * r, (b1 - b0) * r),
                          opts.svd);
                    });
  }
  else
  {
    out.triplets.resize(blocks);
    parallel_ranges(blocks, opts.workers,
                    [&](std::size_t, std::size_t b0, std::size_t b1)
                    {
                      detail::BlockWorkspace ws;
                      ws.reset(field.c_out(), field.c_in());
                      for (std::size_t b = b0; b < b1; ++b)
                      {
                        ws.load([&](std::size_t o, std::size_t i) { return field.at(b, o, i); });
                        try
                        {
                          ws.run(true, opts.svd.max_sweeps);
                        }
                        catch (const Error &e)
                        {
                          throw Error(e.code(), std::string(e.what()) + " at frequency index " +
                                                    std::to_string(b));
                        }
                        ws.sorted_values(res.values.data() + b * r);
                        out.triplets[b] = detail::triplet_from_workspace(ws, field.grid()[b]);
                      }
                    });
  }
  sort_descending(res.values);
  PhaseTimings t;
  t.s_transform = field.build_seconds();
  t.s_copy = field.copy_seconds();
  t.s_svd = clock.seconds();
  t.reconcile();
  res.timings = t;
  return out;
}

enum class Side
{
  left,
  right
};

//
// Global singular vector on the torus: v(x, c) = e^{2 pi i <k, x>} W[c, column] / sqrt(n m)
// with W = U (left) or V (right). Indexed (x1 * n + x2) * channels + c, the same
// linearisation as the explicit operator.
//
inline std::vector<Complex> materialize_singular_vector(const SvdTriplet &triplet,
                                                        std::size_t column, Side side,
                                                        SpatialDims dims)
{
  const CMatrix &w = side == Side::left ? triplet.U : triplet.V;
  if (column >= w.cols)
    throw Error(Errc::IndexOutOfRange, "column " + std::to_string(column) + " >= rank " +
                                           std::to_string(w.cols));
  const std::size_t channels = w.rows;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dims.points()));
  std::vector<Complex> out(dims.points() * channels);
  for (std::size_t x1 = 0; x1 < dims.m; ++x1)
    for (std::size_t x2 = 0; x2 < dims.n; ++x2)
    {
      const double theta = 2.0 * std::numbers::pi *
                           (triplet.k.k1 * static_cast<double>(x1) +
                            triplet.k.k2 * static_cast<double>(x2));
      const Complex phase = Complex{std::cos(theta), std::sin(theta)} * scale;
      for (std::size_t c = 0; c < channels; ++c)
        out[(x1 * dims.n + x2) * channels + c] = phase * w(c, column);
    }
  return out;
}

} // namespace convspectra

#endif // CONVSPECTRA_BLOCK_SVD_HPP
