// Copyright The convspectra Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "convspectra/convspectra.hpp"

using namespace convspectra;
namespace fs = std::filesystem;

namespace
{

class IoTest : public ::testing::Test
{
protected:
  void SetUp() override
  {
    dir_ = fs::temp_directory_path() /
           ("convspectra_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string &name) const { return (dir_ / name).string(); }

  // Hand-assembled NPY v1.0 file with an arbitrary header dict and payload.
  std::string write_raw(const std::string &name, const std::string &dict, const std::string &payload,
                        const std::string &magic = "\x93NUMPY", char major = 1)
  {
    std::string header = dict;
    const std::size_t unpadded = 10 + header.size() + 1;
    header.append((64 - unpadded % 64) % 64, ' ');
    header += '\n';
    std::ofstream out(path(name), std::ios::binary);
    out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
    out.put(major);
    out.put(0);
    out.put(static_cast<char>(header.size() & 0xff));
    out.put(static_cast<char>(header.size() >> 8));
    out << header << payload;
    return path(name);
  }

  static std::string bytes_of(const std::vector<float> &v)
  {
    return std::string(reinterpret_cast<const char *>(v.data()), v.size() * sizeof(float));
  }

  static std::string slurp(const std::string &p)
  {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  fs::path dir_;
};

Errc read_error(const std::string &p)
{
  try
  {
    read_npy_kernel(p);
  }
  catch (const Error &e)
  {
    return e.code();
  }
  ADD_FAILURE() << "read_npy_kernel accepted " << p;
  return Errc::IoError;
}

} // namespace

TEST_F(IoTest, ReadsF4KernelAndWidens)
{
  std::vector<float> w(16 * 16 * 3 * 3);
  for (std::size_t e = 0; e < w.size(); ++e)
    w[e] = static_cast<float>(e) * 0.1f - 100.0f;
  const auto p = write_raw("k.npy", "{'descr': '<f4', 'fortran_order': False, 'shape': (16, 16, 3, 3), }",
                           bytes_of(w));
  const ConvKernel k = read_npy_kernel(p);
  EXPECT_EQ(k.c_out(), 16u);
  EXPECT_EQ(k.c_in(), 16u);
  EXPECT_EQ(k.k_h(), 3u);
  EXPECT_EQ(k.k_w(), 3u);
  EXPECT_EQ(k.precision(), Precision::f32);
  for (std::size_t e = 0; e < w.size(); ++e)
    ASSERT_EQ(k.weights()[e], static_cast<double>(w[e]));
}

TEST_F(IoTest, RoundTripF64IsBitExact)
{
  const auto k = random_kernel({8, 4, 3, 3}, 90);
  write_npy_kernel(k, path("k.npy"));
  const auto back = read_npy_kernel(path("k.npy"));
  EXPECT_EQ(back.shape().c_out, 8u);
  EXPECT_EQ(back.precision(), Precision::f64);
  EXPECT_EQ(std::memcmp(back.weights().data(), k.weights().data(), k.weights().size() * 8), 0);
}

TEST_F(IoTest, RoundTripF32IsBitExact)
{
  std::vector<double> w(2 * 3 * 1 * 5);
  for (std::size_t e = 0; e < w.size(); ++e)
    w[e] = static_cast<float>(0.37 * static_cast<double>(e) - 3.0);
  const ConvKernel k({2, 3, 1, 5}, w, Precision::f32);
  write_npy_kernel(k, path("a.npy"));
  const auto back = read_npy_kernel(path("a.npy"));
  EXPECT_EQ(back.precision(), Precision::f32);
  EXPECT_TRUE(std::equal(w.begin(), w.end(), back.weights().begin()));
  write_npy_kernel(back, path("b.npy"));
  EXPECT_EQ(slurp(path("a.npy")), slurp(path("b.npy")));
}

TEST_F(IoTest, WrittenHeaderIsAlignedAndNumpyShaped)
{
  write_npy_kernel(random_kernel({16, 16, 3, 3}, 91), path("k.npy"));
  const std::string raw = slurp(path("k.npy"));
  ASSERT_GT(raw.size(), 10u);
  EXPECT_EQ(raw.substr(0, 6), "\x93NUMPY");
  EXPECT_EQ(raw[6], 1);
  EXPECT_EQ(raw[7], 0);
  const std::size_t hlen = static_cast<unsigned char>(raw[8]) |
                           (static_cast<std::size_t>(static_cast<unsigned char>(raw[9])) << 8);
  EXPECT_EQ((10 + hlen) % 64, 0u);
  const std::string header = raw.substr(10, hlen);
  EXPECT_EQ(header.back(), '\n');
  EXPECT_NE(header.find("'descr': '<f8'"), std::string::npos);
  EXPECT_NE(header.find("'fortran_order': False"), std::string::npos);
  EXPECT_NE(header.find("'shape': (16, 16, 3, 3)"), std::string::npos);
  EXPECT_EQ(raw.size(), 10 + hlen + 16 * 16 * 9 * 8);
}

TEST_F(IoTest, FortranOrderRejected)
{
  const auto p = write_raw("f.npy", "{'descr': '<f8', 'fortran_order': True, 'shape': (1, 1, 1, 1), }",
                           std::string(8, '\0'));
  EXPECT_EQ(read_error(p), Errc::FortranOrderUnsupported);
}

TEST_F(IoTest, BadMagicRejected)
{
  const auto p = write_raw("m.npy", "{'descr': '<f8', 'fortran_order': False, 'shape': (1, 1, 1, 1), }",
                           std::string(8, '\0'), "\x93NUMPX");
  EXPECT_EQ(read_error(p), Errc::BadMagic);
}

TEST_F(IoTest, VersionTwoRejected)
{
  const auto p = write_raw("v.npy", "{'descr': '<f8', 'fortran_order': False, 'shape': (1, 1, 1, 1), }",
                           std::string(8, '\0'), "\x93NUMPY", 2);
  EXPECT_EQ(read_error(p), Errc::BadMagic);
}

TEST_F(IoTest, UnsupportedDescrRejected)
{
  for (const char *descr : {"<i4", ">f8", "<f2", "<c16"})
  {
    const auto p = write_raw("d.npy",
                             std::string("{'descr': '") + descr +
                                 "', 'fortran_order': False, 'shape': (1, 1, 1, 1), }",
                             std::string(16, '\0'));
    EXPECT_EQ(read_error(p), Errc::UnsupportedDescr) << descr;
  }
}

TEST_F(IoTest, RankOtherThanFourRejected)
{
  const auto p2 = write_raw("r2.npy", "{'descr': '<f8', 'fortran_order': False, 'shape': (3, 3), }",
                            std::string(72, '\0'));
  EXPECT_EQ(read_error(p2), Errc::ShapeRankNot4);
  const auto p5 = write_raw("r5.npy",
                            "{'descr': '<f8', 'fortran_order': False, 'shape': (1, 1, 1, 1, 1), }",
                            std::string(8, '\0'));
  EXPECT_EQ(read_error(p5), Errc::ShapeRankNot4);
}

TEST_F(IoTest, TruncatedPayloadRejected)
{
  const auto p = write_raw("t.npy", "{'descr': '<f4', 'fortran_order': False, 'shape': (2, 2, 3, 3), }",
                           std::string(4 * 35, '\0'));
  EXPECT_EQ(read_error(p), Errc::TruncatedPayload);
}

TEST_F(IoTest, MissingFileIsIoError)
{
  EXPECT_EQ(read_error(path("absent.npy")), Errc::IoError);
}

TEST_F(IoTest, SpectrumCsvFourValues)
{
  SpectrumResult s;
  s.values = {1.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 9.0};
  write_spectrum_csv(s, path("s.csv"));
  const std::string text = slurp(path("s.csv"));
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
  EXPECT_EQ(text.substr(0, 12), "index,sigma\n");
  EXPECT_NE(text.find("1,0.33333333333333331\n"), std::string::npos);
}

TEST_F(IoTest, SpectrumCsvRoundTripsBits)
{
  const auto s = compute_spectrum(random_kernel({3, 3, 3, 3}, 92), {6, 6}).spectrum;
  write_spectrum_csv(s, path("s.csv"));
  const auto back = read_spectrum_csv(path("s.csv"));
  ASSERT_EQ(back.size(), s.values.size());
  EXPECT_EQ(std::memcmp(back.data(), s.values.data(), back.size() * sizeof(double)), 0);
}

TEST_F(IoTest, EmptySpectrumCsvIsHeaderOnly)
{
  write_spectrum_csv(SpectrumResult{}, path("e.csv"));
  EXPECT_EQ(slurp(path("e.csv")), "index,sigma\n");
}

TEST_F(IoTest, UnwritablePathIsIoError)
{
  try
  {
    write_spectrum_csv(SpectrumResult{}, path("no/such/dir/x.csv"));
    FAIL();
  }
  catch (const Error &e)
  {
    EXPECT_EQ(e.code(), Errc::IoError);
  }
}

TEST_F(IoTest, MetadataJsonKeys)
{
  RunMetadata meta;
  meta.spectrum = compute_spectrum(identity_kernel(2), {4, 4}).spectrum;
  meta.seed = 1234;
  meta.workers = 3;
  write_run_metadata_json(meta, path("m.json"));
  const auto j = nlohmann::json::parse(slurp(path("m.json")));
  EXPECT_EQ(j.at("method"), "lfa");
  EXPECT_EQ(j.at("boundary"), "periodic");
  EXPECT_EQ(j.at("sv_count"), 32);
  EXPECT_EQ(j.at("dims").at("n"), 4);
  EXPECT_EQ(j.at("channels").at("c_in"), 2);
  EXPECT_EQ(j.at("seed"), 1234);
  EXPECT_EQ(j.at("workers"), 3);
  EXPECT_EQ(j.at("tool_version"), kVersion);
  ASSERT_TRUE(j.at("timings").is_object());
  EXPECT_TRUE(j.at("timings").contains("s_svd"));
}

TEST_F(IoTest, MetadataWithoutTimingsOrSeed)
{
  RunMetadata meta;
  meta.spectrum.values = {1.0};
  const auto j = to_json(meta);
  EXPECT_TRUE(j.at("timings").is_null());
  EXPECT_TRUE(j.at("seed").is_null());
  EXPECT_EQ(j.at("sv_count"), 1);
}
