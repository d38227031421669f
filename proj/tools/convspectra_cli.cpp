// Copyright The convspectra Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: spectra, boundary comparison, benchmarks and fixture generation.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "convspectra/convspectra.hpp"

namespace cs = convspectra;

namespace
{

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitResource = 3;
constexpr int kExitNumerical = 4;

// Plain `key = value` lines in a --config file configure the bench subcommand.
class BenchConfigFile : public CLI::ConfigINI
{
public:
  std::vector<CLI::ConfigItem> from_config(std::istream &input) const override
  {
    auto items = CLI::ConfigINI::from_config(input);
    for (auto &item : items)
      if (item.parents.empty())
        item.parents = {"bench"};
    return items;
  }
};

int exit_code_for(cs::Errc code)
{
  switch (code)
  {
    case cs::Errc::SizeCapExceeded:
    case cs::Errc::AllocationFailure:
      return kExitResource;
    case cs::Errc::ConvergenceFailure:
      return kExitNumerical;
    default:
      return kExitUsage;
  }
}

struct SingvalsArgs
{
  std::string weights;
  std::size_t height = 0, width = 0;
  std::string method = "lfa";
  std::string boundary = "periodic";
  bool values_only = false;
  std::size_t workers = 1;
  std::string out, meta, dump_matrix;
  std::optional<std::uint64_t> seed;
  std::size_t explicit_cap = cs::Limits{}.explicit_cap;
};

struct CompareArgs
{
  std::string weights;
  std::vector<std::size_t> sizes;
  std::string out;
  std::size_t workers = 1;
  std::size_t explicit_cap = cs::Limits{}.explicit_cap;
};

struct BenchArgs
{
  std::vector<std::string> methods{"lfa", "fft"};
  std::vector<std::size_t> sizes{256, 512};
  std::vector<std::size_t> channels{16};
  std::size_t kernel_size = 3;
  std::size_t repeats = 3;
  std::size_t warmups = 1;
  std::string layout = "block";
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  bool skip_infeasible = false;
  std::string out;
  std::size_t explicit_cap = cs::Limits{}.explicit_cap;
};

struct GenArgs
{
  std::size_t c_out = 1, c_in = 1, k_h = 3, k_w = 3;
  std::uint64_t seed = 0;
  std::string dist = "normal";
  std::string precision = "f64";
  std::string out;
};

int run_singvals(const SingvalsArgs &a)
{
  cs::RunOptions opts;
  opts.method = cs::parse_method(a.method);
  opts.boundary = cs::parse_boundary(a.boundary);
  opts.values_only = a.values_only;
  opts.workers = a.workers;
  opts.limits = cs::Limits::from_env();
  opts.limits.explicit_cap = a.explicit_cap;
  if (a.height == 0 || a.width == 0)
    throw cs::Error(cs::Errc::ZeroDimension, "--height and --width must be >= 1");

  const cs::ConvKernel kernel = cs::read_npy_kernel(a.weights);
  const cs::SpatialDims dims{a.width, a.height};
  const cs::RunResult run = cs::compute_spectrum(kernel, dims, opts);

  if (!a.dump_matrix.empty())
  {
    const auto matrix = cs::build_explicit(kernel, dims, opts.boundary, opts.limits);
    std::ofstream dump(a.dump_matrix, std::ios::trunc);
    if (!dump)
      throw cs::Error(cs::Errc::IoError, "cannot write '" + a.dump_matrix + "'");
    matrix.write_coordinates(dump);
  }
  if (a.out.empty())
    cs::write_spectrum_csv(run.spectrum, std::cout);
  else
    cs::write_spectrum_csv(run.spectrum, a.out);
  if (!a.meta.empty())
  {
    cs::RunMetadata meta;
    meta.spectrum = run.spectrum;
    meta.seed = a.seed;
    meta.workers = cs::resolve_workers(a.workers);
    meta.values_only = a.values_only;
    meta.weights_path = a.weights;
    cs::write_run_metadata_json(meta, a.meta);
  }
  if (!a.out.empty())
  {
    const auto &s = run.spectrum;
    std::printf("%s/%s n=%zu m=%zu c_in=%zu c_out=%zu: %zu values, sigma_max=%.17g, "
                "s_total=%.6f\n",
                cs::to_string(s.method), cs::to_string(s.boundary), s.dims.n, s.dims.m, s.c_in,
                s.c_out, s.count(), s.max(), s.timings ? s.timings->s_total : 0.0);
  }
  return kExitOk;
}

int run_compare(const CompareArgs &a)
{
  cs::Limits limits = cs::Limits::from_env();
  limits.explicit_cap = a.explicit_cap;
  const cs::ConvKernel kernel = cs::read_npy_kernel(a.weights);
  std::vector<cs::SpatialDims> dims;
  for (std::size_t s : a.sizes)
  {
    if (s == 0)
      throw cs::Error(cs::Errc::ZeroDimension, "sizes must be >= 1");
    dims.push_back({s, s});
  }
  const auto rows = cs::boundary_compare(kernel, dims, a.workers, limits);
  std::ofstream out(a.out, std::ios::trunc);
  if (!out)
    throw cs::Error(cs::Errc::IoError, "cannot write '" + a.out + "'");
  cs::write_boundary_csv(out, rows);
  std::printf("%6s %6s %14s %14s %14s %14s\n", "n", "m", "sigma_max_P", "sigma_max_D", "W1",
              "rel_max_diff");
  for (const auto &r : rows)
    std::printf("%6zu %6zu %14.8g %14.8g %14.8g %14.8g\n", r.dims.n, r.dims.m, r.periodic.max(),
                r.dirichlet.max(), r.w1, r.rel_max_diff);
  return kExitOk;
}

int run_bench_cmd(const BenchArgs &a)
{
  cs::BenchConfig cfg;
  cfg.methods.clear();
  for (const auto &m : a.methods)
    cfg.methods.push_back(cs::parse_method(m));
  cfg.sizes = a.sizes;
  cfg.channels = a.channels;
  cfg.kernel_size = a.kernel_size;
  cfg.repeats = a.repeats;
  cfg.warmups = a.warmups;
  if (a.layout == "block")
    cfg.layout = cs::Layout::block_contiguous;
  else if (a.layout == "strided")
    cfg.layout = cs::Layout::frequency_strided;
  else
    throw cs::Error(cs::Errc::InvalidArgument, "--layout must be block or strided");
  cfg.workers = a.workers;
  cfg.seed = a.seed;
  cfg.skip_infeasible = a.skip_infeasible;
  cfg.limits = cs::Limits::from_env();
  cfg.limits.explicit_cap = a.explicit_cap;

  const auto records = cs::run_bench(cfg);
  if (a.out.empty())
    cs::write_bench_csv(std::cout, records);
  else
  {
    std::ofstream out(a.out, std::ios::trunc);
    if (!out)
      throw cs::Error(cs::Errc::IoError, "cannot write '" + a.out + "'");
    cs::write_bench_csv(out, records);
  }

  std::printf("%8s %8s %6s %14s %12s %12s %12s\n", "n", "m", "c", "no. of SVs", "s_fft",
              "s_lfa", "s_fft/s_lfa");
  for (const auto &r : cs::fft_lfa_ratios(records))
    std::printf("%8zu %8zu %6zu %14zu %12.6f %12.6f %12.4f\n", r.n, r.m, r.c, r.sv_count, r.s_fft,
                r.s_lfa, r.ratio);
  for (const auto &s : cs::summarize(records))
    std::printf("median %-8s n=%-6zu c=%-4zu %-17s s_transform=%.6f s_copy=%.6f s_svd=%.6f "
                "s_total=%.6f\n",
                cs::to_string(s.method), s.n, s.c_in, cs::to_string(s.layout), s.s_transform,
                s.s_copy, s.s_svd, s.s_total);
  for (cs::Method m : cfg.methods)
    for (cs::ScalingAxis axis : {cs::ScalingAxis::spatial, cs::ScalingAxis::channel})
    {
      try
      {
        const auto fit = cs::fit_exponent(records, m, axis);
        std::printf("scaling %-8s %-7s exponent %.3f over %zu points\n", cs::to_string(m),
                    axis == cs::ScalingAxis::spatial ? "spatial" : "channel", fit.exponent,
                    fit.points);
      }
      catch (const cs::Error &)
      {
      }
    }
  return kExitOk;
}

int run_gen(const GenArgs &a)
{
  if (a.c_out == 0 || a.c_in == 0 || a.k_h == 0 || a.k_w == 0)
    throw cs::Error(cs::Errc::ZeroDimension, "all kernel extents must be >= 1");
  cs::Precision precision;
  if (a.precision == "f32")
    precision = cs::Precision::f32;
  else if (a.precision == "f64")
    precision = cs::Precision::f64;
  else
    throw cs::Error(cs::Errc::InvalidArgument, "--precision must be f32 or f64");
  const auto kernel =
      cs::random_kernel({a.c_out, a.c_in, a.k_h, a.k_w}, a.seed, cs::parse_distribution(a.dist));
  cs::write_npy_kernel(kernel, a.out, precision);
  return kExitOk;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Exact singular value spectra of 2D multi-channel convolutions"};
  app.set_version_flag("--version", std::string(cs::kVersion));
  app.require_subcommand(1);

  SingvalsArgs sv;
  auto *singvals = app.add_subcommand("singvals", "Singular values of one convolution layer");
  singvals->add_option("--weights", sv.weights, "NPY kernel (c_out, c_in, k_h, k_w)")
      ->required()
      ->check(CLI::ExistingFile);
  singvals->add_option("--height", sv.height, "Grid height m")->required();
  singvals->add_option("--width", sv.width, "Grid width n")->required();
  singvals->add_option("--method", sv.method, "lfa | fft | explicit")
      ->check(CLI::IsMember({"lfa", "fft", "explicit"}));
  singvals->add_option("--boundary", sv.boundary, "periodic | dirichlet (explicit only)")
      ->check(CLI::IsMember({"periodic", "dirichlet"}));
  singvals->add_flag("--values-only", sv.values_only, "Skip singular vector accumulation");
  singvals->add_option("--workers", sv.workers, "Worker threads (0 = auto)");
  singvals->add_option("--out", sv.out, "Spectrum CSV (default: stdout)");
  singvals->add_option("--meta", sv.meta, "Run metadata JSON");
  singvals->add_option("--seed", sv.seed, "Seed the kernel was generated with (recorded)");
  singvals->add_option("--dump-matrix", sv.dump_matrix,
                       "Write the explicit operator as 'row col value' lines");
  singvals->add_option("--max-explicit", sv.explicit_cap, "Explicit matrix row/col cap");

  CompareArgs cmp;
  auto *compare =
      app.add_subcommand("compare-boundary", "Periodic LFA vs zero-padded explicit spectra");
  compare->add_option("--weights", cmp.weights, "NPY kernel")->required()->check(CLI::ExistingFile);
  compare->add_option("--sizes", cmp.sizes, "Square grid sizes, e.g. 4,8,32")
      ->required()
      ->delimiter(',');
  compare->add_option("--out", cmp.out, "Comparison CSV")->required();
  compare->add_option("--workers", cmp.workers, "Worker threads (0 = auto)");
  compare->add_option("--max-explicit", cmp.explicit_cap, "Explicit matrix row/col cap");

  BenchArgs bn;
  auto *bench = app.add_subcommand("bench", "Phase-split runtime benchmark");
  app.set_config("--config", "", "key = value file with bench settings (flags override it)");
  app.config_formatter(std::make_shared<BenchConfigFile>());
  bench->fallthrough();
  bench->add_option("--methods", bn.methods, "Comma list of lfa, fft, explicit")
      ->delimiter(',')
      ->check(CLI::IsMember({"lfa", "fft", "explicit"}));
  bench->add_option("--sizes", bn.sizes, "Square grid sizes")->delimiter(',');
  bench->add_option("--channels", bn.channels, "Channel counts (c_in = c_out)")->delimiter(',');
  bench->add_option("--kernel-size", bn.kernel_size, "Square kernel extent");
  bench->add_option("--repeats", bn.repeats, "Timed repetitions per cell")
      ->check(CLI::PositiveNumber);
  bench->add_option("--warmups", bn.warmups, "Discarded runs per cell");
  bench->add_option("--layout", bn.layout, "block | strided")
      ->check(CLI::IsMember({"block", "strided"}));
  bench->add_option("--workers", bn.workers, "Worker threads (0 = auto)");
  bench->add_option("--seed", bn.seed, "Kernel seed");
  bench->add_flag("--skip-infeasible", bn.skip_infeasible, "Skip explicit cells over the cap");
  bench->add_option("--out", bn.out, "Record CSV (default: stdout)");
  bench->add_option("--max-explicit", bn.explicit_cap, "Explicit matrix row/col cap");

  GenArgs gen;
  auto *gen_kernel = app.add_subcommand("gen-kernel", "Write a seeded random kernel as NPY");
  gen_kernel->add_option("--cout", gen.c_out, "Output channels")->required();
  gen_kernel->add_option("--cin", gen.c_in, "Input channels")->required();
  gen_kernel->add_option("--kh", gen.k_h, "Kernel height");
  gen_kernel->add_option("--kw", gen.k_w, "Kernel width");
  gen_kernel->add_option("--seed", gen.seed, "Seed");
  gen_kernel->add_option("--dist", gen.dist, "normal | uniform")
      ->check(CLI::IsMember({"normal", "uniform"}));
  gen_kernel->add_option("--precision", gen.precision, "f32 | f64")
      ->check(CLI::IsMember({"f32", "f64"}));
  gen_kernel->add_option("--out", gen.out, "Output NPY path")->required();

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::CallForHelp &e)
  {
    return app.exit(e);
  }
  catch (const CLI::CallForAllHelp &e)
  {
    return app.exit(e);
  }
  catch (const CLI::CallForVersion &e)
  {
    return app.exit(e);
  }
  catch (const CLI::ParseError &e)
  {
    app.exit(e);
    return kExitUsage;
  }

  try
  {
    if (*singvals)
      return run_singvals(sv);
    if (*compare)
      return run_compare(cmp);
    if (*bench)
      return run_bench_cmd(bn);
    if (*gen_kernel)
      return run_gen(gen);
  }
  catch (const cs::Error &e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  }
  catch (const std::bad_alloc &)
  {
    std::cerr << "error: out of memory\n";
    return kExitResource;
  }
  catch (const std::exception &e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
