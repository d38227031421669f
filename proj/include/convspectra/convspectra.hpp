// Copyright The convspectra Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

/// \file
/// Umbrella header: singular value spectra of 2D multi-channel convolutions.

#ifndef CONVSPECTRA_CONVSPECTRA_HPP
#define CONVSPECTRA_CONVSPECTRA_HPP

#include "convspectra/analysis.hpp"
#include "convspectra/bench.hpp"
#include "convspectra/block_svd.hpp"
#include "convspectra/boundary.hpp"
#include "convspectra/core.hpp"
#include "convspectra/explicit.hpp"
#include "convspectra/fft.hpp"
#include "convspectra/io.hpp"
#include "convspectra/parallel.hpp"
#include "convspectra/pipeline.hpp"
#include "convspectra/rng.hpp"
#include "convspectra/symbol.hpp"

#endif // CONVSPECTRA_CONVSPECTRA_HPP
