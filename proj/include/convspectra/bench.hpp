// Copyright The convspectra Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef CONVSPECTRA_BENCH_HPP
#define CONVSPECTRA_BENCH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "convspectra/core.hpp"
#include "convspectra/io.hpp"
#include "convspectra/pipeline.hpp"
#include "convspectra/rng.hpp"

namespace convspectra
{

struct BenchRecord
{
  Method method = Method::lfa;
  std::size_t n = 0, m = 0, c_in = 0, c_out = 0;
  Layout layout = Layout::block_contiguous;
  std::size_t repeat_index = 0;
  double s_transform = 0.0, s_copy = 0.0, s_svd = 0.0, s_total = 0.0;
  std::size_t sv_count = 0;
  std::size_t worker_count = 1;
  bool warmup = false;
  // Result of the cell's built-in check (oracle agreement for explicit cells, bit-identical
  // spectra for layout pairs); empty when the cell has none.
  std::optional<bool> verified;
};

struct BenchConfig
{
  std::vector<Method> methods{Method::lfa};
  std::vector<std::size_t> sizes{4};    // n = m
  std::vector<std::size_t> channels{1}; // c_in = c_out
  std::size_t kernel_size = 3;
  std::size_t repeats = 1;
  std::size_t warmups = 1;
  Layout layout = Layout::block_contiguous;
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  bool skip_infeasible = false;
  bool emit_warmups = false;
  double oracle_rtol = 1e-6;
  Limits limits{};
};

namespace detail
{

inline BenchRecord record_from(const SpectrumResult &s, Layout layout, std::size_t repeat,
                               std::size_t workers, bool warmup)
{
  BenchRecord r;
  r.method = s.method;
  r.n = s.dims.n;
  r.m = s.dims.m;
  r.c_in = s.c_in;
  r.c_out = s.c_out;
  r.layout = layout;
  r.repeat_index = repeat;
  const PhaseTimings t = s.timings.value_or(PhaseTimings{});
  r.s_transform = t.s_transform;
  r.s_copy = t.s_copy;
  r.s_svd = t.s_svd;
  r.s_total = t.s_total;
  r.sv_count = s.count();
  r.worker_count = resolve_workers(workers);
  r.warmup = warmup;
  return r;
}

} // namespace detail

//
// Runs every (channels, size, method) cell: `warmups` discarded runs then `repeats` timed runs,
// values-only. Explicit cells are cross-checked against the LFA spectrum of the same kernel
// before their records are emitted; a mismatch aborts the run. Strided LFA cells carry a flag
// saying whether their spectrum is bit-identical to the block-contiguous one.
//
inline std::vector<BenchRecord> run_bench(const BenchConfig &config)
{
  if (config.repeats == 0)
    throw Error(Errc::InvalidArgument, "repeat count must be >= 1");
  std::vector<BenchRecord> records;
  for (std::size_t c : config.channels)
    for (std::size_t size : config.sizes)
    {
      const ConvKernel kernel =
          random_kernel({c, c, config.kernel_size, config.kernel_size}, config.seed);
      const SpatialDims dims{size, size};
      for (Method method : config.methods)
      {
        RunOptions opts;
        opts.method = method;
        opts.workers = config.workers;
        opts.layout = method == Method::lfa ? config.layout : Layout::block_contiguous;
        opts.limits = config.limits;

        std::optional<bool> verified;
        if (method == Method::explicit_matrix)
        {
          try
          {
            check_explicit_cap(dims.points() * c, dims.points() * c, config.limits.explicit_cap);
          }
          catch (const Error &e)
          {
            if (!config.skip_infeasible)
              throw;
            warn(std::string("skipping infeasible cell: ") + e.what());
            continue;
          }
        }

        auto run_once = [&](std::size_t repeat, bool warmup)
        {
          const SpectrumResult s = compute_spectrum(kernel, dims, opts).spectrum;
          if (method == Method::explicit_matrix && !verified)
          {
            RunOptions lfa;
            lfa.workers = config.workers;
            const auto reference = compute_spectrum(kernel, dims, lfa).spectrum;
            verified = spectra_close(reference.values, s.values, config.oracle_rtol);
            if (!*verified)
              throw Error(Errc::ConvergenceFailure,
                          "explicit spectrum disagrees with LFA at n=" + std::to_string(size) +
                              ", c=" + std::to_string(c));
          }
          if (method == Method::lfa && opts.layout == Layout::frequency_strided && !verified)
          {
            RunOptions contiguous = opts;
            contiguous.layout = Layout::block_contiguous;
            contiguous.chunk_blocks = 0;
            verified = compute_spectrum(kernel, dims, contiguous).spectrum.values == s.values;
          }
          BenchRecord r = detail::record_from(s, opts.layout, repeat, config.workers, warmup);
          r.verified = verified;
          return r;
        };

        for (std::size_t w = 0; w < config.warmups; ++w)
        {
          BenchRecord r = run_once(w, true);
          if (config.emit_warmups)
            records.push_back(r);
        }
        for (std::size_t rep = 0; rep < config.repeats; ++rep)
          records.push_back(run_once(rep, false));
      }
    }
  return records;
}

struct LayoutPair
{
  BenchRecord contiguous;
  BenchRecord strided;
  bool identical = false;
};

//
// Same kernel and grid twice: once decomposing the block-contiguous field directly, once after
// a timed conversion to frequency-strided storage. The spectra must match bit for bit.
//
inline LayoutPair layout_experiment(const ConvKernel &kernel, SpatialDims dims,
                                    std::size_t workers = 1, const Limits &limits = {})
{
  RunOptions opts;
  opts.workers = workers;
  opts.limits = limits;
  opts.chunk_blocks = 0;
  opts.layout = Layout::block_contiguous;
  const SpectrumResult a = compute_spectrum(kernel, dims, opts).spectrum;
  opts.layout = Layout::frequency_strided;
  const SpectrumResult b = compute_spectrum(kernel, dims, opts).spectrum;

  LayoutPair out;
  out.identical = a.values == b.values;
  out.contiguous = detail::record_from(a, Layout::block_contiguous, 0, workers, false);
  out.strided = detail::record_from(b, Layout::frequency_strided, 0, workers, false);
  out.contiguous.verified = out.identical;
  out.strided.verified = out.identical;
  if (out.contiguous.s_svd < 0.1)
    warn("layout experiment SVD phase took " + std::to_string(out.contiguous.s_svd) +
         " s (< 0.1 s); timings are dominated by noise");
  return out;
}

inline void write_bench_csv_header(std::ostream &os)
{
  os << "method,n,m,c_in,c_out,layout,repeat_index,s_transform,s_copy,s_svd,s_total,sv_count,"
        "worker_count,warmup,verified\n";
}

inline void write_bench_csv_row(std::ostream &os, const BenchRecord &r)
{
  os << to_string(r.method) << ',' << r.n << ',' << r.m << ',' << r.c_in << ',' << r.c_out << ','
     << to_string(r.layout) << ',' << r.repeat_index << ',' << format_double(r.s_transform) << ','
     << format_double(r.s_copy) << ',' << format_double(r.s_svd) << ','
     << format_double(r.s_total) << ',' << r.sv_count << ',' << r.worker_count << ','
     << (r.warmup ? "true" : "false") << ','
     << (r.verified ? (*r.verified ? "true" : "false") : "") << '\n';
}

inline void write_bench_csv(std::ostream &os, const std::vector<BenchRecord> &records)
{
  write_bench_csv_header(os);
  for (const auto &r : records)
    write_bench_csv_row(os, r);
}

inline double median(std::vector<double> v)
{
  if (v.empty())
    throw Error(Errc::InsufficientPoints, "median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// Median timings of one benchmark cell.
struct CellSummary
{
  Method method = Method::lfa;
  std::size_t n = 0, m = 0, c_in = 0, c_out = 0;
  Layout layout = Layout::block_contiguous;
  std::size_t samples = 0;
  double s_transform = 0.0, s_copy = 0.0, s_svd = 0.0, s_total = 0.0;
};

inline std::vector<CellSummary> summarize(const std::vector<BenchRecord> &records)
{
  using Key = std::tuple<int, std::size_t, std::size_t, std::size_t, std::size_t, int>;
  std::map<Key, std::vector<const BenchRecord *>> cells;
  for (const auto &r : records)
    if (!r.warmup)
      cells[{static_cast<int>(r.method), r.n, r.m, r.c_in, r.c_out, static_cast<int>(r.layout)}]
          .push_back(&r);
  std::vector<CellSummary> out;
  for (const auto &[key, rs] : cells)
  {
    CellSummary s;
    s.method = rs.front()->method;
    s.n = rs.front()->n;
    s.m = rs.front()->m;
    s.c_in = rs.front()->c_in;
    s.c_out = rs.front()->c_out;
    s.layout = rs.front()->layout;
    s.samples = rs.size();
    auto med = [&](double BenchRecord::*field)
    {
      std::vector<double> v;
      for (const auto *r : rs)
        v.push_back(r->*field);
      return median(v);
    };
    s.s_transform = med(&BenchRecord::s_transform);
    s.s_copy = med(&BenchRecord::s_copy);
    s.s_svd = med(&BenchRecord::s_svd);
    s.s_total = med(&BenchRecord::s_total);
    out.push_back(s);
  }
  return out;
}

struct RatioRow
{
  std::size_t n = 0, m = 0, c = 0;
  std::size_t sv_count = 0;
  double s_fft = 0.0, s_lfa = 0.0;
  double ratio = 0.0; // s_fft / s_lfa
};

/// Median FFT over median LFA total time for every cell measured with both methods.
inline std::vector<RatioRow> fft_lfa_ratios(const std::vector<BenchRecord> &records)
{
  std::vector<RatioRow> rows;
  const auto cells = summarize(records);
  for (const auto &f : cells)
  {
    if (f.method != Method::fft)
      continue;
    for (const auto &l : cells)
      if (l.method == Method::lfa && l.n == f.n && l.m == f.m && l.c_in == f.c_in &&
          l.c_out == f.c_out && l.layout == Layout::block_contiguous)
      {
        RatioRow r;
        r.n = f.n;
        r.m = f.m;
        r.c = f.c_in;
        r.sv_count = f.n * f.m * std::min(f.c_in, f.c_out);
        r.s_fft = f.s_total;
        r.s_lfa = l.s_total;
        r.ratio = l.s_total > 0.0 ? f.s_total / l.s_total : 0.0;
        rows.push_back(r);
      }
  }
  return rows;
}

enum class ScalingAxis
{
  spatial, // linear grid extent sqrt(n m), channels fixed
  channel  // c = c_in = c_out, grid fixed
};

struct ScalingEstimate
{
  Method method = Method::lfa;
  ScalingAxis axis = ScalingAxis::spatial;
  double exponent = 0.0;
  std::size_t points = 0;
};

/// Least-squares slope of y on x.
inline double least_squares_slope(const std::vector<double> &x, const std::vector<double> &y)
{
  const double nx = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
  {
    mx += x[i];
    my += y[i];
  }
  mx /= nx;
  my /= nx;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
  {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

//
// Log-log slope of median total time for one method along one axis. The spatial axis uses the
// linear extent sqrt(n m), so O(n^2) work on an n x n grid fits to 2. Needs >= 3 distinct
// positions along the axis with the other axis held fixed.
//
inline ScalingEstimate fit_exponent(const std::vector<BenchRecord> &records, Method method,
                                    ScalingAxis axis)
{
  std::vector<double> xs, ys;
  std::optional<std::size_t> fixed;
  for (const auto &cell : summarize(records))
  {
    if (cell.method != method || cell.layout != Layout::block_contiguous)
      continue;
    const std::size_t other = axis == ScalingAxis::spatial ? cell.c_in * 1000003 + cell.c_out
                                                           : cell.n * 1000003 + cell.m;
    if (!fixed)
      fixed = other;
    if (*fixed != other)
      throw Error(Errc::InvalidArgument, "records vary along both axes for method " +
                                             std::string(to_string(method)));
    const double x = axis == ScalingAxis::spatial
                         ? 0.5 * std::log(static_cast<double>(cell.n * cell.m))
                         : std::log(static_cast<double>(cell.c_in));
    if (!(cell.s_total > 0.0))
      throw Error(Errc::InvalidArgument, "non-positive timing in scaling fit");
    xs.push_back(x);
    ys.push_back(std::log(cell.s_total));
  }
  if (xs.size() < 3)
    throw Error(Errc::InsufficientPoints,
                std::string(to_string(method)) + " has " + std::to_string(xs.size()) +
                    " distinct positions along the axis; need >= 3");
  return {method, axis, least_squares_slope(xs, ys), xs.size()};
}

/// Every (method, axis) combination the records support; InsufficientPoints if none.
inline std::vector<ScalingEstimate> scaling_fit(const std::vector<BenchRecord> &records)
{
  std::vector<ScalingEstimate> out;
  std::string last_error = "no records";
  for (Method method : {Method::lfa, Method::fft, Method::explicit_matrix})
    for (ScalingAxis axis : {ScalingAxis::spatial, ScalingAxis::channel})
    {
      try
      {
        out.push_back(fit_exponent(records, method, axis));
      }
      catch (const Error &e)
      {
        last_error = e.what();
      }
    }
  if (out.empty())
    throw Error(Errc::InsufficientPoints, last_error);
  return out;
}

} // namespace convspectra

#endif // CONVSPECTRA_BENCH_HPP
