// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
#include "polykit/polar_codec.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace polykit {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct SectorPosition {
    int sector = 0;
    double beta = 0.0;   // in [0, 1)
    double alpha = 0.0;  // distance / box diagonal, unclamped
};

// Positions v on the polar grid around origin.  All intermediates are formed
// from component-wise ratios, so scaling (dx, dy, w, h) by a common factor
// leaves every value bit-identical.
SectorPosition locate(Point origin, Point v, double box_w, double box_h,
                      const PolarGridSpec& spec) {
    const double dx = v.x - origin.x;
    const double dy = v.y - origin.y;
    const double m = std::max(std::abs(dx), std::abs(dy));
    if (m == 0.0) {
        throw DataError("polar_codec: vertex coincides with the sector origin (zero radius)");
    }
    const double ux = dx / m;
    const double uy = dy / m;
    double angle = std::atan2(uy, ux);
    if (angle < 0.0) {
        angle += kTwoPi;
    }
    const double span = spec.sector_span();
    const double q = angle / span;
    double k_floor = std::floor(q);
    double beta = q - k_floor;  // exact: q in [k, k+1) makes the subtraction lossless
    int k = static_cast<int>(k_floor);
    if (k >= spec.n_vertices) {  // angle rounded up to the full turn
        k -= spec.n_vertices;
        beta = 0.0;
    }
    const double vw = box_w / m;
    const double vh = box_h / m;
    SectorPosition pos;
    pos.sector = k;
    pos.beta = beta;
    pos.alpha = std::sqrt(ux * ux + uy * uy) / std::sqrt(vw * vw + vh * vh);
    return pos;
}

void check_spec(const PolarGridSpec& spec) {
    if (spec.n_vertices < 3) {
        throw std::invalid_argument("PolarGridSpec: n_vertices must be >= 3");
    }
}

}  // namespace

double PolarGridSpec::sector_span() const {
    return kTwoPi / n_vertices;
}

int sector_index(Point origin, Point v, const PolarGridSpec& spec) {
    check_spec(spec);
    return locate(origin, v, 1.0, 1.0, spec).sector;
}

PolarPolygon encode_polygon(const Polygon& p, const Box& b, const PolarGridSpec& spec,
                            EncodeStats* stats) {
    check_spec(spec);
    if (box_diagonal(b) <= 0.0) {
        throw DataError("encode_polygon: box has zero diagonal");
    }
    const Point origin = box_center(b);
    PolarPolygon pp;
    pp.spec = spec;
    pp.cells.assign(static_cast<std::size_t>(spec.n_vertices), PolarVertex{});
    std::vector<double> best_alpha(static_cast<std::size_t>(spec.n_vertices), -1.0);
    EncodeStats local;
    for (const Point& v : p.vertices) {
        const SectorPosition pos = locate(origin, v, b.width(), b.height(), spec);
        auto& slot = pp.cells[static_cast<std::size_t>(pos.sector)];
        double& best = best_alpha[static_cast<std::size_t>(pos.sector)];
        if (pos.alpha > best) {
            if (best >= 0.0) {
                ++local.discarded_vertices;
            }
            best = pos.alpha;
            slot.alpha = pos.alpha;
            slot.beta = pos.beta;
            slot.gamma = 1.0;
            if (slot.alpha > 1.0) {
                slot.alpha = 1.0;
            }
        } else {
            ++local.discarded_vertices;
        }
    }
    for (std::size_t k = 0; k < best_alpha.size(); ++k) {
        if (best_alpha[k] > 1.0) {
            ++local.clamped_alpha;
        }
    }
    if (stats) {
        *stats = local;
    }
    return pp;
}

Polygon decode_polygon(const PolarPolygon& pp, const Box& b, double threshold) {
    check_spec(pp.spec);
    if (pp.cells.size() != static_cast<std::size_t>(pp.spec.n_vertices)) {
        throw std::invalid_argument("decode_polygon: cell count does not match the grid spec");
    }
    if (threshold < 0.0 || threshold > 1.0) {
        throw std::invalid_argument("decode_polygon: threshold must lie in [0, 1]");
    }
    const Point origin = box_center(b);
    const double diag = box_diagonal(b);
    const double span = pp.spec.sector_span();
    Polygon out;
    for (int k = 0; k < pp.spec.n_vertices; ++k) {
        const PolarVertex& c = pp.cells[static_cast<std::size_t>(k)];
        if (c.gamma < threshold) {
            continue;
        }
        const double angle = (static_cast<double>(k) + c.beta) * span;
        const double r = c.alpha * diag;
        out.vertices.push_back({origin.x + r * std::cos(angle), origin.y + r * std::sin(angle)});
    }
    if (out.vertices.size() < 3) {
        throw DataError("decode_polygon: fewer than 3 sectors pass the confidence threshold");
    }
    return out;
}

}  // namespace polykit
