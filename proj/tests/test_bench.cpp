// Copyright The convspectra Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "convspectra/convspectra.hpp"

using namespace convspectra;

namespace
{

struct QuietWarnings
{
  QuietWarnings() { warnings_enabled() = false; }
  ~QuietWarnings() { warnings_enabled() = true; }
};

BenchRecord synthetic(Method method, std::size_t n, std::size_t c, double seconds)
{
  BenchRecord r;
  r.method = method;
  r.n = r.m = n;
  r.c_in = r.c_out = c;
  r.s_svd = r.s_total = seconds;
  r.sv_count = n * n * c;
  return r;
}

} // namespace

TEST(RunBench, SmokeCellProducesOneRecord)
{
  BenchConfig cfg;
  cfg.methods = {Method::lfa};
  cfg.sizes = {4};
  cfg.channels = {1};
  cfg.repeats = 1;
  const auto recs = run_bench(cfg);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].sv_count, 16u);
  EXPECT_FALSE(recs[0].warmup);
  EXPECT_FALSE(recs[0].verified.has_value());
}

TEST(RunBench, RecordCountIsMethodsTimesSizesTimesRepeats)
{
  BenchConfig cfg;
  cfg.methods = {Method::lfa, Method::fft};
  cfg.sizes = {8, 16};
  cfg.channels = {2};
  cfg.repeats = 3;
  const auto recs = run_bench(cfg);
  ASSERT_EQ(recs.size(), 12u);
  for (const auto &r : recs)
  {
    EXPECT_EQ(r.sv_count, r.n * r.m * std::min(r.c_in, r.c_out));
    EXPECT_GE(r.s_transform, 0.0);
    EXPECT_GE(r.s_copy, 0.0);
    EXPECT_GE(r.s_svd, 0.0);
    EXPECT_DOUBLE_EQ(r.s_total, r.s_transform + r.s_copy + r.s_svd);
  }
  const auto ratios = fft_lfa_ratios(recs);
  ASSERT_EQ(ratios.size(), 2u);
  for (const auto &row : ratios)
    EXPECT_NEAR(row.ratio, row.s_fft / row.s_lfa, 1e-12);
}

TEST(RunBench, WarmupsCanBeEmitted)
{
  BenchConfig cfg;
  cfg.methods = {Method::lfa};
  cfg.sizes = {4};
  cfg.channels = {1};
  cfg.repeats = 2;
  cfg.warmups = 2;
  cfg.emit_warmups = true;
  const auto recs = run_bench(cfg);
  ASSERT_EQ(recs.size(), 4u);
  EXPECT_TRUE(recs[0].warmup);
  EXPECT_TRUE(recs[1].warmup);
  EXPECT_FALSE(recs[2].warmup);
}

TEST(RunBench, ExplicitCellsAreCrossChecked)
{
  BenchConfig cfg;
  cfg.methods = {Method::explicit_matrix};
  cfg.sizes = {6};
  cfg.channels = {3};
  cfg.repeats = 2;
  const auto recs = run_bench(cfg);
  ASSERT_EQ(recs.size(), 2u);
  for (const auto &r : recs)
  {
    ASSERT_TRUE(r.verified.has_value());
    EXPECT_TRUE(*r.verified);
  }
}

TEST(RunBench, StridedLfaCellsFlagIdenticalSpectra)
{
  BenchConfig cfg;
  cfg.methods = {Method::lfa};
  cfg.sizes = {8};
  cfg.channels = {4};
  cfg.layout = Layout::frequency_strided;
  const auto recs = run_bench(cfg);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].layout, Layout::frequency_strided);
  ASSERT_TRUE(recs[0].verified.has_value());
  EXPECT_TRUE(*recs[0].verified);
}

TEST(RunBench, InfeasibleExplicitCell)
{
  BenchConfig cfg;
  cfg.methods = {Method::explicit_matrix, Method::lfa};
  cfg.sizes = {8};
  cfg.channels = {4};
  cfg.limits.explicit_cap = 100;
  try
  {
    run_bench(cfg);
    FAIL();
  }
  catch (const Error &e)
  {
    EXPECT_EQ(e.code(), Errc::SizeCapExceeded);
  }
  QuietWarnings quiet;
  cfg.skip_infeasible = true;
  const auto recs = run_bench(cfg);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].method, Method::lfa);
}

TEST(RunBench, ZeroRepeatsRejected)
{
  BenchConfig cfg;
  cfg.repeats = 0;
  EXPECT_THROW(run_bench(cfg), Error);
}

TEST(LayoutExperiment, SmallGridWarnsButProducesPair)
{
  QuietWarnings quiet;
  const auto pair = layout_experiment(random_kernel({4, 4, 3, 3}, 80), {4, 4});
  EXPECT_TRUE(pair.identical);
  EXPECT_EQ(pair.contiguous.layout, Layout::block_contiguous);
  EXPECT_EQ(pair.strided.layout, Layout::frequency_strided);
  EXPECT_EQ(pair.contiguous.s_copy, 0.0);
  EXPECT_GT(pair.strided.s_copy, 0.0);
  for (const auto *r : {&pair.contiguous, &pair.strided})
    EXPECT_DOUBLE_EQ(r->s_total, r->s_transform + r->s_copy + r->s_svd);
}

TEST(BenchCsv, HeaderAndRowShape)
{
  BenchConfig cfg;
  cfg.methods = {Method::lfa};
  cfg.sizes = {4};
  cfg.channels = {2};
  std::ostringstream os;
  write_bench_csv(os, run_bench(cfg));
  std::istringstream is(os.str());
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  EXPECT_EQ(header, "method,n,m,c_in,c_out,layout,repeat_index,s_transform,s_copy,s_svd,s_total,"
                    "sv_count,worker_count,warmup,verified");
  EXPECT_EQ(row.rfind("lfa,4,4,2,2,block_contiguous,0,", 0), 0u) << row;
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 14);
  EXPECT_EQ(row.substr(row.size() - 12), ",32,1,false,") << row;
}

TEST(BenchSummary, MedianOverRepeats)
{
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  std::vector<BenchRecord> recs{synthetic(Method::lfa, 8, 2, 1.0), synthetic(Method::lfa, 8, 2, 5.0),
                                synthetic(Method::lfa, 8, 2, 2.0)};
  recs[0].repeat_index = 0;
  recs[1].repeat_index = 1;
  recs[2].repeat_index = 2;
  const auto cells = summarize(recs);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0].s_total, 2.0);
  EXPECT_EQ(cells[0].samples, 3u);
}

TEST(ScalingFit, RecoversPlantedExponents)
{
  std::vector<BenchRecord> recs;
  for (std::size_t n : {32u, 64u, 128u, 256u})
    recs.push_back(synthetic(Method::lfa, n, 16, 1e-7 * std::pow(double(n), 2.0)));
  for (std::size_t c : {4u, 8u, 16u, 32u})
    recs.push_back(synthetic(Method::fft, 64, c, 1e-6 * std::pow(double(c), 3.0)));
  const auto spatial = fit_exponent(recs, Method::lfa, ScalingAxis::spatial);
  const auto channel = fit_exponent(recs, Method::fft, ScalingAxis::channel);
  EXPECT_NEAR(spatial.exponent, 2.0, 1e-12);
  EXPECT_EQ(spatial.points, 4u);
  EXPECT_NEAR(channel.exponent, 3.0, 1e-12);
  EXPECT_EQ(scaling_fit(recs).size(), 2u);
}

TEST(ScalingFit, TwoSizesAreInsufficient)
{
  std::vector<BenchRecord> recs{synthetic(Method::lfa, 8, 4, 1.0), synthetic(Method::lfa, 16, 4, 4.0)};
  try
  {
    fit_exponent(recs, Method::lfa, ScalingAxis::spatial);
    FAIL();
  }
  catch (const Error &e)
  {
    EXPECT_EQ(e.code(), Errc::InsufficientPoints);
  }
  try
  {
    scaling_fit(recs);
    FAIL();
  }
  catch (const Error &e)
  {
    EXPECT_EQ(e.code(), Errc::InsufficientPoints);
  }
}

TEST(ScalingFit, LeastSquaresSlopeOfLine)
{
  EXPECT_NEAR(least_squares_slope({0.0, 1.0, 2.0, 3.0}, {1.0, 3.5, 6.0, 8.5}), 2.5, 1e-14);
}
