// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "polykit/errors.hpp"

namespace polykit {

/// Dense H x W x C feature grid, channels-last row-major storage.
struct FeatureMap {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    FeatureMap() = default;
    FeatureMap(int h, int w, int c)
        : height(h), width(w), channels(c),
          data(static_cast<std::size_t>(h) * w * c, 0.0) {}

    double& at(int y, int x, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    double at(int y, int x, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
};

enum class Interp { Nearest, Bilinear };

struct HypercolumnSpec {
    int levels = 0;           // n: level i has spatial size (H, W) / 2^(i-1)
    int target_channels = 0;  // delta, the aligned channel count
    Interp interpolation = Interp::Nearest;
};

/// Per-pixel linear projection to out_channels (1x1 convolution semantics).
struct ProjectionWeights {
    int in_channels = 0;
    int out_channels = 0;
    std::vector<double> w;  // [in][out], row-major

    double at(int in, int out) const { return w[static_cast<std::size_t>(in) * out_channels + out]; }
    static ProjectionWeights identity(int channels);
};

/// m(.) of the aggregation: projects every pixel's channel vector through the
/// weight matrix.  Throws std::invalid_argument on shape mismatch.
FeatureMap channel_align(const FeatureMap& f, int target_channels, const ProjectionWeights& weights);

/// u(., omega): integer upscaling.  Nearest replicates each source pixel into
/// an omega x omega block.  Bilinear samples source coordinate
/// (dst + 0.5) / omega - 0.5 with edge clamping (align-corners-false).
FeatureMap upsample(const FeatureMap& f, int omega, Interp mode);

/// Direct aggregation: levels upsampled straight to level-1 resolution and
/// summed.  Accumulation runs coarsest level first, so the per-pixel addition
/// order matches the stairstep scheme and the two agree bit-exactly under
/// nearest-neighbour interpolation.  Inputs must already be channel-aligned
/// and satisfy the dyadic size chain.
FeatureMap hypercolumn_direct(std::span<const FeatureMap> levels, const HypercolumnSpec& spec);

/// Stairstep aggregation: fold from the coarsest level, upsampling the running
/// sum by 2 and adding the next finer level.
FeatureMap hypercolumn_stairstep(std::span<const FeatureMap> levels, const HypercolumnSpec& spec);

enum class AggregationScheme { Direct, Stairstep };

/// Scalar additions performed by the aggregation formula, instrumented by
/// evaluating it per output element (every '+' node an output element pulls
/// through counts once).  Both schemes perform levels-1 additions per output
/// element, hence identical totals.
std::uint64_t count_added_elements(const HypercolumnSpec& spec, int base_h, int base_w,
                                   AggregationScheme scheme);

}  // namespace polykit
