// Copyright The convspectra Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef CONVSPECTRA_PIPELINE_HPP
#define CONVSPECTRA_PIPELINE_HPP

#include <algorithm>
#include <string>
#include <vector>

#include "convspectra/block_svd.hpp"
#include "convspectra/core.hpp"
#include "convspectra/explicit.hpp"
#include "convspectra/fft.hpp"
#include "convspectra/parallel.hpp"
#include "convspectra/symbol.hpp"

namespace convspectra
{

struct RunOptions
{
  Method method = Method::lfa;
  Boundary boundary = Boundary::periodic;
  bool values_only = true;
  std::size_t workers = 1;
  Layout layout = Layout::block_contiguous;
  Limits limits{};
  SvdOptions svd{};
  // Frequencies per streamed chunk in the values-only LFA path; 0 builds the whole field.
  std::size_t chunk_blocks = 16384;
};

struct RunResult
{
  SpectrumResult spectrum;
  std::vector<SvdTriplet> triplets; // filled for lfa/fft when !values_only
};

namespace detail
{

//
// Values-only LFA over the grid in fixed chunks: each chunk's symbols are built, then its
// blocks decomposed, so peak memory is one chunk regardless of n and m. Per-block arithmetic
// is identical to build_symbol_field + spectrum_from_field.
//
inline SpectrumResult lfa_streamed(const ConvKernel &kernel, SpatialDims dims,
                                   const RunOptions &opts)
{
  const FrequencyGrid grid(dims);
  const std::size_t co = kernel.c_out(), ci = kernel.c_in(), r = std::min(co, ci);
  const std::size_t blocks = grid.size(), bsize = co * ci;
  const std::size_t chunk = std::min(blocks, opts.chunk_blocks);
  check_field_budget(chunk * bsize, opts.limits);
  const auto offsets = kernel.offsets();

  SpectrumResult res;
  res.method = Method::lfa;
  res.boundary = Boundary::periodic;
  res.dims = dims;
  res.c_in = ci;
  res.c_out = co;
  res.values.resize(blocks * r);

  std::vector<Complex> buffer(chunk * bsize);
  PhaseTimings t;
  Stopwatch clock;
  for (std::size_t c0 = 0; c0 < blocks; c0 += chunk)
  {
    const std::size_t c1 = std::min(blocks, c0 + chunk);
    clock.restart();
    parallel_ranges(c1 - c0, opts.workers,
                    [&](std::size_t, std::size_t b0, std::size_t b1)
                    {
                      std::vector<Complex> phases;
                      for (std::size_t b = b0; b < b1; ++b)
                      {
                        tap_phases(offsets, grid[c0 + b], phases);
                        accumulate_symbol(kernel, phases, buffer.data() + b * bsize, 1);
                      }
                    });
    t.s_transform += clock.seconds();

    clock.restart();
    parallel_ranges(c1 - c0, opts.workers,
                    [&](std::size_t, std::size_t b0, std::size_t b1)
                    {
                      BlockWorkspace ws;
                      ws.reset(co, ci);
                      for (std::size_t b = b0; b < b1; ++b)
                      {
                        const Complex *blk = buffer.data() + b * bsize;
                        ws.load([&](std::size_t o, std::size_t i) { return blk[o * ci + i]; });
                        try
                        {
                          ws.run(false, opts.svd.max_sweeps);
                        }
                        catch (const Error &e)
                        {
                          throw Error(e.code(), std::string(e.what()) + " at frequency index " +
                                                    std::to_string(c0 + b));
                        }
                        ws.sorted_values(res.values.data() + (c0 + b) * r);
                      }
                    });
    t.s_svd += clock.seconds();
  }
  clock.restart();
  sort_descending(res.values);
  t.s_svd += clock.seconds();
  t.reconcile();
  res.timings = t;
  return res;
}

} // namespace detail

//
// End-to-end spectrum by any method. Timing starts before the weight transform and stops once
// the sorted singular values are available. Only the explicit method accepts Dirichlet.
//
inline RunResult compute_spectrum(const ConvKernel &kernel, SpatialDims dims,
                                  const RunOptions &opts = {})
{
  validate_kernel(kernel);
  if (!dims.valid())
    throw Error(Errc::ZeroDimension, "spatial dims must be >= 1");
  if (opts.boundary == Boundary::dirichlet && opts.method != Method::explicit_matrix)
    throw Error(Errc::InvalidArgument,
                std::string("method ") + to_string(opts.method) +
                    " assumes periodic boundaries; only explicit supports dirichlet");

  RunResult out;
  SpectrumOptions sopts;
  sopts.values_only = opts.values_only;
  sopts.workers = opts.workers;
  sopts.svd = opts.svd;

  switch (opts.method)
  {
    case Method::lfa:
    {
      if (opts.values_only && opts.layout == Layout::block_contiguous && opts.chunk_blocks > 0)
      {
        out.spectrum = detail::lfa_streamed(kernel, dims, opts);
        return out;
      }
      SymbolField field = build_symbol_field(kernel, dims, Layout::block_contiguous, opts.workers,
                                             opts.limits);
      if (opts.layout == Layout::frequency_strided)
      {
        check_field_budget(2 * field.raw().size(), opts.limits);
        Stopwatch copy;
        SymbolField strided = field.with_layout(Layout::frequency_strided, opts.workers);
        strided.set_build_seconds(field.build_seconds());
        strided.set_copy_seconds(copy.seconds());
        field = std::move(strided);
      }
      auto fs = spectrum_from_field(field, sopts);
      out.spectrum = std::move(fs.result);
      out.triplets = std::move(fs.triplets);
      return out;
    }
    case Method::fft:
    {
      SymbolField field = fft_symbol_field(kernel, dims, opts.workers, opts.limits);
      auto fs = spectrum_from_field(field, sopts);
      out.spectrum = std::move(fs.result);
      out.spectrum.method = Method::fft;
      out.triplets = std::move(fs.triplets);
      return out;
    }
    case Method::explicit_matrix:
    {
      Stopwatch clock;
      const ExplicitMatrix matrix = build_explicit(kernel, dims, opts.boundary, opts.limits);
      const double s_build = clock.seconds();
      out.spectrum = dense_spectrum(matrix, kernel, opts.limits);
      auto t = out.spectrum.timings.value_or(PhaseTimings{});
      t.s_transform = s_build;
      t.reconcile();
      out.spectrum.timings = t;
      return out;
    }
  }
  return out;
}

/// Largest relative elementwise difference between two sorted spectra, scaled by max(|a|, tiny).
inline double max_relative_difference(const std::vector<double> &a, const std::vector<double> &b)
{
  if (a.size() != b.size())
    return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), 1e-300});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

/// numpy-style allclose: |a - b| <= atol + rtol |b| elementwise.
inline bool spectra_close(const std::vector<double> &a, const std::vector<double> &b, double rtol,
                          double atol = 0.0)
{
  if (a.size() != b.size())
    return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(std::abs(a[i] - b[i]) <= atol + rtol * std::abs(b[i])))
      return false;
  return true;
}

} // namespace convspectra

#endif // CONVSPECTRA_PIPELINE_HPP
