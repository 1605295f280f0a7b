// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "polykit/geometry.hpp"

namespace polykit {

/// The circular-sector grid laid over an object: n_vertices sectors of equal
/// angular span partition [0, 360) degrees.  Sector k covers the half-open
/// interval [k * 360 / n, (k + 1) * 360 / n).
struct PolarGridSpec {
    int n_vertices = 0;

    double sector_span() const;  // radians
};

/// One sector slot: alpha = vertex distance from the box center divided by
/// the box diagonal, beta = angular position inside the sector mapped to
/// [0, 1), gamma = vertex confidence.  gamma == 0 encodes "no vertex in this
/// sector"; such target slots carry alpha = beta = 0.
struct PolarVertex {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
};

/// Per-sector polar encoding of one object's bounding polygon.
struct PolarPolygon {
    PolarGridSpec spec;
    std::vector<PolarVertex> cells;  // exactly spec.n_vertices entries
};

/// Dataset-QA counters filled by encode_polygon.
struct EncodeStats {
    int clamped_alpha = 0;       // vertices farther than the box diagonal
    int discarded_vertices = 0;  // vertices dropped in favour of a farther one in the same sector
};

/// Sector holding the point v as seen from origin.  Angles are measured
/// counter-clockwise from the positive x-axis in [0, 360); a vertex exactly on
/// a sector boundary belongs to the higher-indexed sector.  v == origin has no
/// defined angle and raises DataError.
int sector_index(Point origin, Point v, const PolarGridSpec& spec);

/// Encodes polygon vertices into per-sector (alpha, beta, gamma) slots around
/// the center of box b.  When several vertices fall into one sector the
/// farthest one is stored and the rest are counted in stats->discarded_vertices.
/// alpha is clamped to [0, 1]; clamps are counted in stats->clamped_alpha.
/// A degenerate box (zero diagonal) raises DataError.
PolarPolygon encode_polygon(const Polygon& p, const Box& b, const PolarGridSpec& spec,
                            EncodeStats* stats = nullptr);

/// Inverse transform: every sector whose gamma is >= threshold contributes a
/// vertex at origin + alpha * diagonal * (cos t, sin t) with t the absolute
/// angle recovered from beta.  Vertices come out ordered by sector index, so
/// their angles are strictly increasing.  Fewer than 3 surviving sectors
/// raises DataError.  Decoded polygons are not re-clipped to the box.
Polygon decode_polygon(const PolarPolygon& pp, const Box& b, double threshold);

}  // namespace polykit
