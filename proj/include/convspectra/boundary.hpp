// Copyright The convspectra Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef CONVSPECTRA_BOUNDARY_HPP
#define CONVSPECTRA_BOUNDARY_HPP

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "convspectra/analysis.hpp"
#include "convspectra/pipeline.hpp"

namespace convspectra
{

/// One grid size of the periodic-vs-zero-padding comparison.
struct BoundaryComparison
{
  SpatialDims dims{};
  SpectrumResult periodic;  // LFA
  SpectrumResult dirichlet; // explicit, zero padding
  double w1 = 0.0;
  double rel_max_diff = 0.0;
};

//
// For each grid size: LFA spectrum (periodic), dense spectrum of the zero-padded operator, their
// Wasserstein-1 distance and relative spectral-norm difference. Every size is checked against
// the explicit cap before any work starts.
//
inline std::vector<BoundaryComparison> boundary_compare(const ConvKernel &kernel,
                                                        const std::vector<SpatialDims> &dims_list,
                                                        std::size_t workers = 1,
                                                        const Limits &limits = {})
{
  validate_kernel(kernel);
  for (const auto &d : dims_list)
    check_explicit_cap(d.points() * kernel.c_out(), d.points() * kernel.c_in(),
                       limits.explicit_cap);

  std::vector<BoundaryComparison> rows;
  rows.reserve(dims_list.size());
  for (const auto &d : dims_list)
  {
    BoundaryComparison row;
    row.dims = d;
    RunOptions opts;
    opts.workers = workers;
    opts.limits = limits;
    row.periodic = compute_spectrum(kernel, d, opts).spectrum;
    opts.method = Method::explicit_matrix;
    opts.boundary = Boundary::dirichlet;
    row.dirichlet = compute_spectrum(kernel, d, opts).spectrum;
    row.w1 = wasserstein1(row.periodic, row.dirichlet);
    row.rel_max_diff = relative_max_difference(row.periodic, row.dirichlet);
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace detail
{

inline std::string fmt17(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_boundary_row(std::ostream &os, const SpectrumResult &s, double w1,
                               double rel_max_diff)
{
  os << s.dims.n << ',' << s.dims.m << ',' << s.c_in << ',' << s.c_out << ','
     << to_string(s.method) << ',' << to_string(s.boundary) << ',' << fmt17(s.max()) << ','
     << fmt17(s.min()) << ',' << fmt17(w1) << ',' << s.count() << ',' << fmt17(rel_max_diff)
     << '\n';
}

} // namespace detail

//
// Two lines per size: the periodic LFA spectrum (its distance to itself, 0, serves as the
// self-check) and the zero-padded explicit spectrum with its distance to the periodic one.
//
inline void write_boundary_csv(std::ostream &os, const std::vector<BoundaryComparison> &rows)
{
  os << "n,m,c_in,c_out,method,boundary,sigma_max,sigma_min,w1_vs_periodic,count,"
        "rel_sigma_max_diff\n";
  for (const auto &r : rows)
  {
    detail::write_boundary_row(os, r.periodic, wasserstein1(r.periodic, r.periodic), 0.0);
    detail::write_boundary_row(os, r.dirichlet, r.w1, r.rel_max_diff);
  }
}

} // namespace convspectra

#endif // CONVSPECTRA_BOUNDARY_HPP
