// Copyright The convspectra Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef CONVSPECTRA_IO_HPP
#define CONVSPECTRA_IO_HPP

#include <nlohmann/json.hpp>

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "convspectra/core.hpp"

namespace convspectra
{

static_assert(std::endian::native == std::endian::little,
              "NPY payloads are read and written as little-endian host memory");

namespace npy
{

inline constexpr char kMagic[] = "\x93NUMPY";
inline constexpr std::size_t kMagicLen = 6;

struct Header
{
  std::string descr;
  bool fortran_order = false;
  std::vector<std::size_t> shape;
};

// Parses the Python-literal header dict of an NPY v1.0 file.
inline Header parse_header(const std::string &text)
{
  Header h;
  std::smatch match;
  static const std::regex descr_re(R"('descr'\s*:\s*'([^']*)')");
  static const std::regex fortran_re(R"('fortran_order'\s*:\s*(True|False))");
  static const std::regex shape_re(R"('shape'\s*:\s*\(([^)]*)\))");
  if (!std::regex_search(text, match, descr_re))
    throw Error(Errc::UnsupportedDescr, "header has no 'descr' entry");
  h.descr = match[1];
  if (!std::regex_search(text, match, fortran_re))
    throw Error(Errc::IoError, "header has no 'fortran_order' entry");
  h.fortran_order = match[1] == "True";
  if (!std::regex_search(text, match, shape_re))
    throw Error(Errc::IoError, "header has no 'shape' entry");
  std::stringstream dims(match[1]);
  std::string item;
  while (std::getline(dims, item, ','))
  {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos)
      continue;
    h.shape.push_back(static_cast<std::size_t>(std::stoull(item.substr(first))));
  }
  return h;
}

inline std::string format_header(const std::string &descr, const std::vector<std::size_t> &shape)
{
  std::string dict = "{'descr': '" + descr + "', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < shape.size(); ++i)
  {
    dict += std::to_string(shape[i]);
    if (shape.size() == 1 || i + 1 < shape.size())
      dict += shape.size() == 1 ? "," : ", ";
  }
  dict += "), }";
  // magic(6) + version(2) + length(2) + dict + padding + '\n' is a multiple of 64.
  const std::size_t unpadded = kMagicLen + 2 + 2 + dict.size() + 1;
  dict.append((64 - unpadded % 64) % 64, ' ');
  dict += '\n';
  return dict;
}

} // namespace npy

//
// Reads an NPY v1.0 file holding a rank-4 '<f4' or '<f8' C-order array as a (c_out, c_in, k_h,
// k_w) kernel. f32 payloads are widened to f64 exactly.
//
inline ConvKernel read_npy_kernel(const std::string &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(Errc::IoError, "cannot open '" + path + "'");
  char magic[npy::kMagicLen];
  if (!in.read(magic, npy::kMagicLen) || std::memcmp(magic, npy::kMagic, npy::kMagicLen) != 0)
    throw Error(Errc::BadMagic, "'" + path + "' is not an NPY file");
  unsigned char version[2];
  if (!in.read(reinterpret_cast<char *>(version), 2))
    throw Error(Errc::TruncatedPayload, "'" + path + "' ends inside the preamble");
  if (version[0] != 1 || version[1] != 0)
    throw Error(Errc::BadMagic, "unsupported NPY version " + std::to_string(version[0]) + "." +
                                    std::to_string(version[1]));
  unsigned char len_bytes[2];
  if (!in.read(reinterpret_cast<char *>(len_bytes), 2))
    throw Error(Errc::TruncatedPayload, "'" + path + "' ends inside the preamble");
  const std::size_t header_len = len_bytes[0] | (static_cast<std::size_t>(len_bytes[1]) << 8);
  std::string text(header_len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(header_len)))
    throw Error(Errc::TruncatedPayload, "'" + path + "' ends inside the header");

  const npy::Header h = npy::parse_header(text);
  if (h.descr != "<f4" && h.descr != "<f8")
    throw Error(Errc::UnsupportedDescr, "descr '" + h.descr + "' (need '<f4' or '<f8')");
  if (h.fortran_order)
    throw Error(Errc::FortranOrderUnsupported, "'" + path + "' is stored in Fortran order");
  if (h.shape.size() != 4)
    throw Error(Errc::ShapeRankNot4,
                "kernel arrays must have rank 4, got rank " + std::to_string(h.shape.size()));

  const KernelShape shape{h.shape[0], h.shape[1], h.shape[2], h.shape[3]};
  const std::size_t count = shape.size();
  const bool f32 = h.descr == "<f4";
  const std::size_t item = f32 ? 4 : 8;
  std::vector<char> raw(count * item);
  if (!in.read(raw.data(), static_cast<std::streamsize>(raw.size())))
    throw Error(Errc::TruncatedPayload, "'" + path + "' payload holds fewer than " +
                                            std::to_string(count) + " elements");
  std::vector<double> w(count);
  for (std::size_t e = 0; e < count; ++e)
  {
    if (f32)
    {
      float x;
      std::memcpy(&x, raw.data() + e * 4, 4);
      w[e] = x;
    }
    else
      std::memcpy(&w[e], raw.data() + e * 8, 8);
  }
  return {shape, std::move(w), f32 ? Precision::f32 : Precision::f64};
}

/// Writes the kernel as NPY v1.0 in the given precision (defaults to the kernel's own).
inline void write_npy_kernel(const ConvKernel &kernel, const std::string &path,
                             std::optional<Precision> precision = std::nullopt)
{
  const bool f32 = precision.value_or(kernel.precision()) == Precision::f32;
  const auto &s = kernel.shape();
  const std::string header = npy::format_header(f32 ? "<f4" : "<f8", {s.c_out, s.c_in, s.k_h, s.k_w});
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(Errc::IoError, "cannot write '" + path + "'");
  out.write(npy::kMagic, npy::kMagicLen);
  const char version[2] = {1, 0};
  out.write(version, 2);
  const char len_bytes[2] = {static_cast<char>(header.size() & 0xff),
                             static_cast<char>((header.size() >> 8) & 0xff)};
  out.write(len_bytes, 2);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (double x : kernel.weights())
  {
    if (f32)
    {
      const float f = static_cast<float>(x);
      out.write(reinterpret_cast<const char *>(&f), 4);
    }
    else
      out.write(reinterpret_cast<const char *>(&x), 8);
  }
  if (!out)
    throw Error(Errc::IoError, "failed writing '" + path + "'");
}

inline std::string format_double(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_spectrum_csv(const SpectrumResult &spectrum, std::ostream &out)
{
  out << "index,sigma\n";
  for (std::size_t i = 0; i < spectrum.values.size(); ++i)
    out << i << ',' << format_double(spectrum.values[i]) << '\n';
}

inline void write_spectrum_csv(const SpectrumResult &spectrum, const std::string &path)
{
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw Error(Errc::IoError, "cannot write '" + path + "'");
  write_spectrum_csv(spectrum, out);
  if (!out)
    throw Error(Errc::IoError, "failed writing '" + path + "'");
}

/// Values column of a file written by write_spectrum_csv.
inline std::vector<double> read_spectrum_csv(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
    throw Error(Errc::IoError, "cannot open '" + path + "'");
  std::string line;
  std::getline(in, line);
  if (line != "index,sigma")
    throw Error(Errc::IoError, "'" + path + "' lacks the index,sigma header");
  std::vector<double> values;
  while (std::getline(in, line))
  {
    if (line.empty())
      continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw Error(Errc::IoError, "malformed line '" + line + "'");
    values.push_back(std::strtod(line.c_str() + comma + 1, nullptr));
  }
  return values;
}

/// Everything needed to reproduce one spectrum run.
struct RunMetadata
{
  SpectrumResult spectrum;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
  bool values_only = true;
  std::string weights_path;
};

inline nlohmann::json to_json(const RunMetadata &meta)
{
  const auto &s = meta.spectrum;
  nlohmann::json j;
  j["method"] = to_string(s.method);
  j["boundary"] = to_string(s.boundary);
  j["dims"] = {{"n", s.dims.n}, {"m", s.dims.m}};
  j["channels"] = {{"c_in", s.c_in}, {"c_out", s.c_out}};
  j["sv_count"] = s.count();
  if (s.timings)
    j["timings"] = {{"s_transform", s.timings->s_transform},
                    {"s_svd", s.timings->s_svd},
                    {"s_copy", s.timings->s_copy},
                    {"s_total", s.timings->s_total}};
  else
    j["timings"] = nullptr;
  j["tool_version"] = kVersion;
  j["seed"] = meta.seed ? nlohmann::json(*meta.seed) : nlohmann::json(nullptr);
  j["workers"] = meta.workers;
  j["values_only"] = meta.values_only;
  if (!meta.weights_path.empty())
    j["weights"] = meta.weights_path;
  return j;
}

inline void write_run_metadata_json(const RunMetadata &meta, const std::string &path)
{
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw Error(Errc::IoError, "cannot write '" + path + "'");
  out << to_json(meta).dump(2) << '\n';
  if (!out)
    throw Error(Errc::IoError, "failed writing '" + path + "'");
}

} // namespace convspectra

#endif // CONVSPECTRA_IO_HPP
