// Copyright The convspectra Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef CONVSPECTRA_CORE_HPP
#define CONVSPECTRA_CORE_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace convspectra
{

inline constexpr const char *kVersion = "1.0.0";

using Complex = std::complex<double>;

//
// Error handling: every failure surfaces as convspectra::Error carrying a code, so callers
// (the CLI in particular) can map failures onto exit codes without string matching.
//
enum class Errc
{
  NonFiniteWeight,
  ZeroDimension,
  AllocationFailure,
  ConvergenceFailure,
  IndexOutOfRange,
  KernelLargerThanTorus,
  SizeCapExceeded,
  ShapeMismatch,
  EmptySpectrum,
  InsufficientPoints,
  BadMagic,
  UnsupportedDescr,
  FortranOrderUnsupported,
  ShapeRankNot4,
  TruncatedPayload,
  IoError,
  InvalidArgument,
};

inline const char *to_string(Errc code)
{
  switch (code)
  {
    case Errc::NonFiniteWeight:
      return "NonFiniteWeight";
    case Errc::ZeroDimension:
      return "ZeroDimension";
    case Errc::AllocationFailure:
      return "AllocationFailure";
    case Errc::ConvergenceFailure:
      return "ConvergenceFailure";
    case Errc::IndexOutOfRange:
      return "IndexOutOfRange";
    case Errc::KernelLargerThanTorus:
      return "KernelLargerThanTorus";
    case Errc::SizeCapExceeded:
      return "SizeCapExceeded";
    case Errc::ShapeMismatch:
      return "ShapeMismatch";
    case Errc::EmptySpectrum:
      return "EmptySpectrum";
    case Errc::InsufficientPoints:
      return "InsufficientPoints";
    case Errc::BadMagic:
      return "BadMagic";
    case Errc::UnsupportedDescr:
      return "UnsupportedDescr";
    case Errc::FortranOrderUnsupported:
      return "FortranOrderUnsupported";
    case Errc::ShapeRankNot4:
      return "ShapeRankNot4";
    case Errc::TruncatedPayload:
      return "TruncatedPayload";
    case Errc::IoError:
      return "IoError";
    case Errc::InvalidArgument:
      return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error
{
public:
  Error(Errc code, const std::string &what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
  {
  }

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

/// Warnings go to stderr unless silenced (tests silence them).
inline bool &warnings_enabled()
{
  static bool enabled = true;
  return enabled;
}

inline void warn(const std::string &msg)
{
  if (warnings_enabled())
    std::cerr << "convspectra: warning: " << msg << '\n';
}

enum class Precision
{
  f32,
  f64
};

enum class Method
{
  lfa,
  fft,
  explicit_matrix
};

enum class Boundary
{
  periodic,
  dirichlet
};

inline const char *to_string(Method m)
{
  switch (m)
  {
    case Method::lfa:
      return "lfa";
    case Method::fft:
      return "fft";
    case Method::explicit_matrix:
      return "explicit";
  }
  return "unknown";
}

inline const char *to_string(Boundary b)
{
  return b == Boundary::periodic ? "periodic" : "dirichlet";
}

inline Method parse_method(const std::string &s)
{
  if (s == "lfa")
    return Method::lfa;
  if (s == "fft")
    return Method::fft;
  if (s == "explicit")
    return Method::explicit_matrix;
  throw Error(Errc::InvalidArgument, "unknown method '" + s + "'");
}

inline Boundary parse_boundary(const std::string &s)
{
  if (s == "periodic")
    return Boundary::periodic;
  if (s == "dirichlet")
    return Boundary::dirichlet;
  throw Error(Errc::InvalidArgument, "unknown boundary '" + s + "'");
}

/// Spatial extent of the torus: n columns (width) by m rows (height).
struct SpatialDims
{
  std::size_t n = 1;
  std::size_t m = 1;

  std::size_t points() const noexcept { return n * m; }
  bool valid() const noexcept { return n >= 1 && m >= 1; }
  friend bool operator==(const SpatialDims &, const SpatialDims &) = default;
};

/// Integer kernel offset y = (row, col); row runs along the height axis (mod m).
struct Offset
{
  int row = 0;
  int col = 0;
  friend bool operator==(const Offset &, const Offset &) = default;
};

/// Offsets y(p,q) = (p - floor(k_h/2), q - floor(k_w/2)) in row-major tensor order.
inline std::vector<Offset> neighborhood_offsets(std::size_t k_h, std::size_t k_w)
{
  if (k_h == 0 || k_w == 0)
    throw Error(Errc::ZeroDimension, "kernel extents must be >= 1");
  const int ch = static_cast<int>(k_h / 2);
  const int cw = static_cast<int>(k_w / 2);
  std::vector<Offset> out;
  out.reserve(k_h * k_w);
  for (std::size_t p = 0; p < k_h; ++p)
    for (std::size_t q = 0; q < k_w; ++q)
      out.push_back({static_cast<int>(p) - ch, static_cast<int>(q) - cw});
  return out;
}

struct KernelShape
{
  std::size_t c_out = 1;
  std::size_t c_in = 1;
  std::size_t k_h = 1;
  std::size_t k_w = 1;

  std::size_t size() const noexcept { return c_out * c_in * k_h * k_w; }
  friend bool operator==(const KernelShape &, const KernelShape &) = default;
};

//
// Real 4D weight tensor indexed (o, i, p, q), row-major, always held in f64. The precision
// tag records what the tensor was loaded from. Construction checks only that the payload
// size matches the shape; validate_kernel() checks the numerical invariants.
//
class ConvKernel
{
public:
  ConvKernel() = default;

  ConvKernel(KernelShape shape, std::vector<double> weights, Precision precision = Precision::f64)
    : shape_(shape), weights_(std::move(weights)), precision_(precision)
  {
    if (weights_.size() != shape_.size())
      throw Error(Errc::ShapeMismatch, "weight count " + std::to_string(weights_.size()) +
                                           " does not match shape product " +
                                           std::to_string(shape_.size()));
  }

  const KernelShape &shape() const noexcept { return shape_; }
  std::size_t c_out() const noexcept { return shape_.c_out; }
  std::size_t c_in() const noexcept { return shape_.c_in; }
  std::size_t k_h() const noexcept { return shape_.k_h; }
  std::size_t k_w() const noexcept { return shape_.k_w; }
  Precision precision() const noexcept { return precision_; }

  std::span<const double> weights() const noexcept { return weights_; }

  std::size_t index(std::size_t o, std::size_t i, std::size_t p, std::size_t q) const noexcept
  {
    return ((o * shape_.c_in + i) * shape_.k_h + p) * shape_.k_w + q;
  }

  double operator()(std::size_t o, std::size_t i, std::size_t p, std::size_t q) const noexcept
  {
    return weights_[index(o, i, p, q)];
  }

  std::vector<Offset> offsets() const { return neighborhood_offsets(shape_.k_h, shape_.k_w); }

  /// Copy with every weight multiplied by alpha.
  ConvKernel scaled(double alpha) const
  {
    std::vector<double> w(weights_);
    for (auto &x : w)
      x *= alpha;
    return {shape_, std::move(w), precision_};
  }

  /// Spatially reversed kernel: tap (p, q) moves to (k_h-1-p, k_w-1-q).
  ConvKernel flipped() const
  {
    std::vector<double> w(weights_.size());
    for (std::size_t o = 0; o < shape_.c_out; ++o)
      for (std::size_t i = 0; i < shape_.c_in; ++i)
        for (std::size_t p = 0; p < shape_.k_h; ++p)
          for (std::size_t q = 0; q < shape_.k_w; ++q)
            w[index(o, i, shape_.k_h - 1 - p, shape_.k_w - 1 - q)] = (*this)(o, i, p, q);
    return {shape_, std::move(w), precision_};
  }

  /// Sum over taps of the squared Frobenius norms of the multiplication matrices.
  double frobenius_norm_sq() const noexcept
  {
    double s = 0.0;
    for (double x : weights_)
      s += x * x;
    return s;
  }

private:
  KernelShape shape_{};
  std::vector<double> weights_{1.0};
  Precision precision_ = Precision::f64;
};

inline void validate_kernel(const ConvKernel &kernel)
{
  const auto &s = kernel.shape();
  if (s.c_out == 0 || s.c_in == 0 || s.k_h == 0 || s.k_w == 0)
    throw Error(Errc::ZeroDimension, "kernel shape (" + std::to_string(s.c_out) + "," +
                                         std::to_string(s.c_in) + "," + std::to_string(s.k_h) +
                                         "," + std::to_string(s.k_w) + ") has a zero extent");
  for (std::size_t o = 0; o < s.c_out; ++o)
    for (std::size_t i = 0; i < s.c_in; ++i)
      for (std::size_t p = 0; p < s.k_h; ++p)
        for (std::size_t q = 0; q < s.k_w; ++q)
          if (!std::isfinite(kernel(o, i, p, q)))
            throw Error(Errc::NonFiniteWeight,
                        "weight at (" + std::to_string(o) + "," + std::to_string(i) + "," +
                            std::to_string(p) + "," + std::to_string(q) + ") is not finite");
}

inline ConvKernel identity_kernel(std::size_t channels)
{
  std::vector<double> w(channels * channels, 0.0);
  for (std::size_t c = 0; c < channels; ++c)
    w[c * channels + c] = 1.0;
  return {{channels, channels, 1, 1}, std::move(w)};
}

/// Single-channel 3x3 box filter with all taps 1/9.
inline ConvKernel averaging_kernel()
{
  return {{1, 1, 3, 3}, std::vector<double>(9, 1.0 / 9.0)};
}

/// Frequency pair k = (k1, k2), k1 paired with the row axis and k2 with the column axis.
struct Frequency
{
  double k1 = 0.0;
  double k2 = 0.0;
  friend bool operator==(const Frequency &, const Frequency &) = default;
};

//
// The discrete dual torus. Index (i, j) with i in [0, m) over the row axis and j in [0, n)
// over the column axis maps to k = (i/m, j/n); flat index is i*n + j (row-major).
//
class FrequencyGrid
{
public:
  explicit FrequencyGrid(SpatialDims dims) : dims_(dims)
  {
    if (!dims.valid())
      throw Error(Errc::ZeroDimension, "spatial dims must be >= 1");
  }

  const SpatialDims &dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return dims_.points(); }

  std::size_t row_index(std::size_t flat) const noexcept { return flat / dims_.n; }
  std::size_t col_index(std::size_t flat) const noexcept { return flat % dims_.n; }

  Frequency operator[](std::size_t flat) const noexcept
  {
    return {static_cast<double>(row_index(flat)) / static_cast<double>(dims_.m),
            static_cast<double>(col_index(flat)) / static_cast<double>(dims_.n)};
  }

  /// Flat index of -k mod 1.
  std::size_t negated(std::size_t flat) const noexcept
  {
    const std::size_t i = row_index(flat), j = col_index(flat);
    return ((dims_.m - i) % dims_.m) * dims_.n + (dims_.n - j) % dims_.n;
  }

  std::vector<Frequency> frequencies() const
  {
    std::vector<Frequency> out(size());
    for (std::size_t f = 0; f < size(); ++f)
      out[f] = (*this)[f];
    return out;
  }

private:
  SpatialDims dims_;
};

/// Dense complex matrix, row-major.
struct CMatrix
{
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Complex> data;

  CMatrix() = default;
  CMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

  Complex &operator()(std::size_t r, std::size_t c) noexcept { return data[r * cols + c]; }
  const Complex &operator()(std::size_t r, std::size_t c) const noexcept
  {
    return data[r * cols + c];
  }

  double frobenius_norm() const noexcept
  {
    double s = 0.0;
    for (const auto &z : data)
      s += std::norm(z);
    return std::sqrt(s);
  }
};

/// Phase-split wall-clock seconds.
struct PhaseTimings
{
  double s_transform = 0.0;
  double s_svd = 0.0;
  double s_copy = 0.0;
  double s_total = 0.0;

  /// Sets s_total from the phases.
  void reconcile() noexcept { s_total = s_transform + s_copy + s_svd; }

  PhaseTimings &operator+=(const PhaseTimings &o) noexcept
  {
    s_transform += o.s_transform;
    s_svd += o.s_svd;
    s_copy += o.s_copy;
    s_total += o.s_total;
    return *this;
  }
};

struct SpectrumResult
{
  std::vector<double> values; // descending, nonnegative
  Method method = Method::lfa;
  Boundary boundary = Boundary::periodic;
  SpatialDims dims{};
  std::size_t c_in = 1;
  std::size_t c_out = 1;
  std::optional<PhaseTimings> timings;

  std::size_t count() const noexcept { return values.size(); }
  double max() const { return values.empty() ? 0.0 : values.front(); }
  double min() const { return values.empty() ? 0.0 : values.back(); }
};

/// Expected spectrum length for a method.
inline std::size_t expected_count(Method method, SpatialDims dims, std::size_t c_in,
                                  std::size_t c_out)
{
  const std::size_t p = dims.points();
  if (method == Method::explicit_matrix)
    return std::min(p * c_in, p * c_out);
  return p * std::min(c_in, c_out);
}

//
// Runtime limits. The memory budget bounds the symbol field allocation and can be overridden
// through CONV_SPECTRA_MEM_BUDGET_GIB.
//
struct Limits
{
  double memory_budget_bytes = 16.0 * 1024.0 * 1024.0 * 1024.0;
  std::size_t explicit_cap = 20000;
  int max_sweeps = 100;

  static Limits from_env()
  {
    Limits lim;
    if (const char *env = std::getenv("CONV_SPECTRA_MEM_BUDGET_GIB"))
    {
      char *end = nullptr;
      const double gib = std::strtod(env, &end);
      if (end != env && gib > 0.0)
        lim.memory_budget_bytes = gib * 1024.0 * 1024.0 * 1024.0;
    }
    return lim;
  }
};

} // namespace convspectra

#endif // CONVSPECTRA_CORE_HPP
