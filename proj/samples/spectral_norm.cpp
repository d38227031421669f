// Copyright The convspectra Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Spectral norm and condition number of a random 3x3 layer on a 32x32 torus, then the
// effect of rescaling the layer so its largest singular value is one.

#include <cstdio>

#include "convspectra/convspectra.hpp"

int main()
{
  using namespace convspectra;

  const ConvKernel kernel = random_kernel({8, 8, 3, 3}, 7);
  const SpatialDims dims{32, 32};

  RunOptions opts;
  opts.values_only = true;
  const SpectrumResult spectrum = compute_spectrum(kernel, dims, opts).spectrum;
  const SpectralSummary summary = spectral_summary(spectrum);

  std::printf("singular values: %zu\n", summary.count);
  std::printf("sigma_max      : %.12g\n", summary.max);
  std::printf("sigma_min      : %.12g\n", summary.min);
  std::printf("condition      : %.6g\n", summary.condition);

  // Dividing by the spectral norm yields a 1-Lipschitz layer.
  const ConvKernel normalized = kernel.scaled(1.0 / summary.max);
  const SpectrumResult after = compute_spectrum(normalized, dims, opts).spectrum;
  std::printf("after rescale  : %.12g\n", after.max());

  // Same spectrum through the FFT route.
  opts.method = Method::fft;
  const SpectrumResult via_fft = compute_spectrum(kernel, dims, opts).spectrum;
  std::printf("lfa vs fft     : max rel diff %.3g\n",
              max_relative_difference(spectrum.values, via_fft.values));
  return 0;
}
