// Copyright The convspectra Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef CONVSPECTRA_SYMBOL_HPP
#define CONVSPECTRA_SYMBOL_HPP

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "convspectra/core.hpp"
#include "convspectra/parallel.hpp"

namespace convspectra
{

enum class Layout
{
  block_contiguous, // each c_out x c_in block consecutive, row-major inside the block
  frequency_strided // entry (o, i) of every block consecutive across the grid
};

inline const char *to_string(Layout l)
{
  return l == Layout::block_contiguous ? "block_contiguous" : "frequency_strided";
}

//
// Per-frequency c_out x c_in complex blocks over a FrequencyGrid. Storage order is given by
// the layout tag; block values do not depend on it.
//
class SymbolField
{
public:
  SymbolField(FrequencyGrid grid, std::size_t c_out, std::size_t c_in, Layout layout)
    : grid_(grid), c_out_(c_out), c_in_(c_in), layout_(layout),
      data_(grid.size() * c_out * c_in)
  {
  }

  const FrequencyGrid &grid() const noexcept { return grid_; }
  std::size_t c_out() const noexcept { return c_out_; }
  std::size_t c_in() const noexcept { return c_in_; }
  std::size_t block_count() const noexcept { return grid_.size(); }
  std::size_t block_size() const noexcept { return c_out_ * c_in_; }
  Layout layout() const noexcept { return layout_; }

  std::size_t offset(std::size_t block, std::size_t o, std::size_t i) const noexcept
  {
    if (layout_ == Layout::block_contiguous)
      return block * block_size() + o * c_in_ + i;
    return (o * c_in_ + i) * grid_.size() + block;
  }

  Complex &at(std::size_t block, std::size_t o, std::size_t i) noexcept
  {
    return data_[offset(block, o, i)];
  }
  const Complex &at(std::size_t block, std::size_t o, std::size_t i) const noexcept
  {
    return data_[offset(block, o, i)];
  }

  /// Contiguous view of one block; only valid for block_contiguous storage.
  std::span<const Complex> block_span(std::size_t block) const noexcept
  {
    return {data_.data() + block * block_size(), block_size()};
  }
  std::span<Complex> block_span(std::size_t block) noexcept
  {
    return {data_.data() + block * block_size(), block_size()};
  }

  CMatrix block(std::size_t block) const
  {
    CMatrix out(c_out_, c_in_);
    for (std::size_t o = 0; o < c_out_; ++o)
      for (std::size_t i = 0; i < c_in_; ++i)
        out(o, i) = at(block, o, i);
    return out;
  }

  std::span<const Complex> raw() const noexcept { return data_; }

  /// Wall-clock seconds spent producing the field (transform phase).
  double build_seconds() const noexcept { return build_seconds_; }
  void set_build_seconds(double s) noexcept { build_seconds_ = s; }

  /// Seconds spent on layout conversion or scatter after the transform (0 if none).
  double copy_seconds() const noexcept { return copy_seconds_; }
  void set_copy_seconds(double s) noexcept { copy_seconds_ = s; }

  /// Same block values in the other storage order.
  SymbolField with_layout(Layout layout, std::size_t workers = 1) const
  {
    SymbolField out(grid_, c_out_, c_in_, layout);
    parallel_ranges(block_count(), workers,
                    [&](std::size_t, std::size_t b0, std::size_t b1)
                    {
                      for (std::size_t b = b0; b < b1; ++b)
                        for (std::size_t o = 0; o < c_out_; ++o)
                          for (std::size_t i = 0; i < c_in_; ++i)
                            out.at(b, o, i) = at(b, o, i);
                    });
    return out;
  }

private:
  FrequencyGrid grid_;
  std::size_t c_out_, c_in_;
  Layout layout_;
  std::vector<Complex> data_;
  double build_seconds_ = 0.0;
  double copy_seconds_ = 0.0;
};

namespace detail
{

// Unit-modulus phases e^{2 pi i <k, y>} for every tap, row-major in (p, q).
inline void tap_phases(const std::vector<Offset> &offsets, Frequency k, std::vector<Complex> &out)
{
  out.resize(offsets.size());
  for (std::size_t t = 0; t < offsets.size(); ++t)
  {
    const double theta = 2.0 * std::numbers::pi * (k.k1 * offsets[t].row + k.k2 * offsets[t].col);
    out[t] = {std::cos(theta), std::sin(theta)};
  }
}

// dst(o, i) at stride `entry_stride` = sum_t w[o, i, t] * phase[t], summed in tap order.
inline void accumulate_symbol(const ConvKernel &kernel, std::span<const Complex> phases,
                              Complex *dst, std::size_t entry_stride)
{
  const auto w = kernel.weights();
  const std::size_t taps = phases.size();
  const std::size_t entries = kernel.c_out() * kernel.c_in();
  for (std::size_t e = 0; e < entries; ++e)
  {
    const double *wt = w.data() + e * taps;
    double re = 0.0, im = 0.0;
    for (std::size_t t = 0; t < taps; ++t)
    {
      re += wt[t] * phases[t].real();
      im += wt[t] * phases[t].imag();
    }
    dst[e * entry_stride] = {re, im};
  }
}

} // namespace detail

/// A_k = sum_y M_y e^{2 pi i <k, y>}; k1 pairs with the row offset, k2 with the column offset.
inline CMatrix symbol_at(const ConvKernel &kernel, Frequency k)
{
  validate_kernel(kernel);
  std::vector<Complex> phases;
  detail::tap_phases(kernel.offsets(), k, phases);
  CMatrix out(kernel.c_out(), kernel.c_in());
  detail::accumulate_symbol(kernel, phases, out.data.data(), 1);
  return out;
}

inline void check_field_budget(std::size_t entries, const Limits &limits)
{
  const double bytes = static_cast<double>(entries) * sizeof(Complex);
  if (bytes > limits.memory_budget_bytes)
    throw Error(Errc::AllocationFailure,
                "symbol field needs " + std::to_string(bytes / (1024.0 * 1024.0 * 1024.0)) +
                    " GiB, budget is " +
                    std::to_string(limits.memory_budget_bytes / (1024.0 * 1024.0 * 1024.0)) +
                    " GiB");
}

inline void fill_symbol_blocks(const ConvKernel &kernel, SymbolField &field, std::size_t begin,
                               std::size_t end)
{
  const auto offsets = kernel.offsets();
  std::vector<Complex> phases;
  const bool contiguous = field.layout() == Layout::block_contiguous;
  for (std::size_t b = begin; b < end; ++b)
  {
    detail::tap_phases(offsets, field.grid()[b], phases);
    Complex *dst = &field.at(b, 0, 0);
    detail::accumulate_symbol(kernel, phases, dst, contiguous ? 1 : field.block_count());
  }
}

inline SymbolField build_symbol_field(const ConvKernel &kernel, SpatialDims dims,
                                      Layout layout = Layout::block_contiguous,
                                      std::size_t workers = 1, const Limits &limits = {})
{
  validate_kernel(kernel);
  FrequencyGrid grid(dims);
  check_field_budget(grid.size() * kernel.c_out() * kernel.c_in(), limits);
  Stopwatch clock;
  SymbolField field(grid, kernel.c_out(), kernel.c_in(), layout);
  parallel_ranges(grid.size(), workers,
                  [&](std::size_t, std::size_t b0, std::size_t b1)
                  { fill_symbol_blocks(kernel, field, b0, b1); });
  field.set_build_seconds(clock.seconds());
  return field;
}

} // namespace convspectra

#endif // CONVSPECTRA_SYMBOL_HPP
