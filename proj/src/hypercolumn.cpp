// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
#include "polykit/hypercolumn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace polykit {

namespace {

void check_chain(std::span<const FeatureMap> levels, const HypercolumnSpec& spec) {
    if (spec.levels < 1 || static_cast<std::size_t>(spec.levels) != levels.size()) {
        throw std::invalid_argument("hypercolumn: level count does not match the configured depth");
    }
    const int h = levels[0].height;
    const int w = levels[0].width;
    int factor = 1;
    for (int i = 0; i < spec.levels; ++i) {
        const FeatureMap& f = levels[static_cast<std::size_t>(i)];
        if (f.channels != spec.target_channels) {
            throw std::invalid_argument("hypercolumn: level " + std::to_string(i + 1) +
                                        " is not aligned to the target channel count");
        }
        if (f.height * factor != h || f.width * factor != w) {
            throw std::invalid_argument("hypercolumn: level " + std::to_string(i + 1) +
                                        " violates the dyadic size chain");
        }
        if (i + 1 < spec.levels) {
            if (f.height % 2 != 0 || f.width % 2 != 0) {
                throw std::invalid_argument("hypercolumn: level " + std::to_string(i + 1) +
                                            " is not divisible for the next halving");
            }
            factor *= 2;
        }
    }
}

void add_into(FeatureMap& acc, const FeatureMap& other) {
    for (std::size_t i = 0; i < acc.data.size(); ++i) {
        acc.data[i] += other.data[i];
    }
}

}  // namespace

ProjectionWeights ProjectionWeights::identity(int channels) {
    ProjectionWeights p;
    p.in_channels = channels;
    p.out_channels = channels;
    p.w.assign(static_cast<std::size_t>(channels) * channels, 0.0);
    for (int c = 0; c < channels; ++c) {
        p.w[static_cast<std::size_t>(c) * channels + c] = 1.0;
    }
    return p;
}

FeatureMap channel_align(const FeatureMap& f, int target_channels, const ProjectionWeights& weights) {
    if (weights.in_channels != f.channels || weights.out_channels != target_channels) {
        throw std::invalid_argument("channel_align: weight shape mismatch");
    }
    FeatureMap out(f.height, f.width, target_channels);
    for (int y = 0; y < f.height; ++y) {
        for (int x = 0; x < f.width; ++x) {
            for (int d = 0; d < target_channels; ++d) {
                double acc = 0.0;
                for (int c = 0; c < f.channels; ++c) {
                    acc += f.at(y, x, c) * weights.at(c, d);
                }
                out.at(y, x, d) = acc;
            }
        }
    }
    return out;
}

FeatureMap upsample(const FeatureMap& f, int omega, Interp mode) {
    if (omega < 1) {
        throw std::invalid_argument("upsample: factor must be >= 1");
    }
    if (omega == 1) {
        return f;
    }
    FeatureMap out(f.height * omega, f.width * omega, f.channels);
    if (mode == Interp::Nearest) {
        for (int y = 0; y < out.height; ++y) {
            for (int x = 0; x < out.width; ++x) {
                const int sy = y / omega;
                const int sx = x / omega;
                for (int c = 0; c < f.channels; ++c) {
                    out.at(y, x, c) = f.at(sy, sx, c);
                }
            }
        }
        return out;
    }
    for (int y = 0; y < out.height; ++y) {
        const double sy = (y + 0.5) / omega - 0.5;
        const double fy = std::floor(sy);
        const double ty = sy - fy;
        const int y0 = std::clamp(static_cast<int>(fy), 0, f.height - 1);
        const int y1 = std::clamp(static_cast<int>(fy) + 1, 0, f.height - 1);
        for (int x = 0; x < out.width; ++x) {
            const double sx = (x + 0.5) / omega - 0.5;
            const double fx = std::floor(sx);
            const double tx = sx - fx;
            const int x0 = std::clamp(static_cast<int>(fx), 0, f.width - 1);
            const int x1 = std::clamp(static_cast<int>(fx) + 1, 0, f.width - 1);
            for (int c = 0; c < f.channels; ++c) {
                const double top = f.at(y0, x0, c) * (1.0 - tx) + f.at(y0, x1, c) * tx;
                const double bot = f.at(y1, x0, c) * (1.0 - tx) + f.at(y1, x1, c) * tx;
                out.at(y, x, c) = top * (1.0 - ty) + bot * ty;
            }
        }
    }
    return out;
}

FeatureMap hypercolumn_direct(std::span<const FeatureMap> levels, const HypercolumnSpec& spec) {
    check_chain(levels, spec);
    const int n = spec.levels;
    // Coarsest first: keeps the per-pixel summation order identical to the
    // stairstep fold, which makes the two schemes bit-exact under nearest.
    FeatureMap acc = upsample(levels[static_cast<std::size_t>(n - 1)], 1 << (n - 1), spec.interpolation);
    for (int i = n - 2; i >= 0; --i) {
        add_into(acc, upsample(levels[static_cast<std::size_t>(i)], 1 << i, spec.interpolation));
    }
    return acc;
}

FeatureMap hypercolumn_stairstep(std::span<const FeatureMap> levels, const HypercolumnSpec& spec) {
    check_chain(levels, spec);
    const int n = spec.levels;
    FeatureMap acc = levels[static_cast<std::size_t>(n - 1)];
    for (int i = n - 2; i >= 0; --i) {
        acc = upsample(acc, 2, spec.interpolation);
        add_into(acc, levels[static_cast<std::size_t>(i)]);
    }
    return acc;
}

std::uint64_t count_added_elements(const HypercolumnSpec& spec, int base_h, int base_w,
                                   AggregationScheme scheme) {
    if (spec.levels < 1 || spec.target_channels < 1 || base_h < 1 || base_w < 1) {
        throw std::invalid_argument("count_added_elements: invalid spec");
    }
    std::uint64_t count = 0;
    for (int y = 0; y < base_h; ++y) {
        for (int x = 0; x < base_w; ++x) {
            for (int c = 0; c < spec.target_channels; ++c) {
                if (scheme == AggregationScheme::Direct) {
                    // One chain of pairwise sums over the n upsampled terms.
                    for (int i = 1; i < spec.levels; ++i) {
                        ++count;
                    }
                } else {
                    // The element pulls one value down the fold; every fold
                    // step contributes a single addition to it.
                    for (int i = spec.levels - 1; i >= 1; --i) {
                        ++count;
                    }
                }
            }
        }
    }
    return count;
}

}  // namespace polykit
