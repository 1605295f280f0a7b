// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "polykit/geometry.hpp"

namespace polykit {

/// The pixel coordinates of one object instance inside a width x height image.
struct PixelBlob {
    int width = 0;
    int height = 0;
    std::vector<std::pair<int, int>> pixels;  // (x, y), integer coordinates
};

/// Modular angle interval in degrees; may wrap through 0 (low > high).
/// low == high spans the full circle.
struct AngleInterval {
    double low = 0.0;
    double high = 0.0;
    int class_id = -1;
};

struct ExtractResult {
    Polygon polygon;
    Box box;
};

struct SplitResult {
    std::optional<Polygon> emphasized;  // complement of the interval
    std::optional<Polygon> dimmed;      // inside the interval
    bool star_shaped = true;            // false marks a best-effort split
};

/// Builds one blob per distinct non-zero gray level of an instance-level
/// image (level 0 is background).  Blobs come out ordered by gray level,
/// pixels in row-major order.
std::vector<PixelBlob> blobs_from_levels(int width, int height,
                                         std::span<const std::uint8_t> levels);

/// Extracts a bounding polygon from a pixel blob: the blob's boundary pixels
/// (those with a non-blob 4-neighbour) are binned into n_sectors angular bins
/// around the center of the blob's tight bounding box and the farthest
/// boundary pixel per bin is kept.  Each kept vertex is the pixel center
/// displaced half a pixel outward along its ray, so the polygon bounds the
/// pixel extent rather than inscribing the centers; the vertex still lies on
/// its source pixel.  Near-collinear points are then erased with tolerance
/// eps.  Inner boundaries of folded shapes never survive, only the most
/// distant points do.  Fewer than 3 surviving points raises DataError.
ExtractResult extract_polygon(const PixelBlob& blob, int n_sectors, double eps = 0.5);

/// Repeatedly removes the vertex with the smallest perpendicular distance to
/// the segment joining its neighbours while that distance is <= eps.  Raises
/// DataError when a removal would leave fewer than 3 vertices.
Polygon simplify_collinear(const Polygon& p, double eps);

/// Splits the polygon by the polar interval around the center of box b:
/// vertices plus interpolated crossing points on the interval's two bounding
/// rays are partitioned into the in-interval (dimmed) part and its complement
/// (emphasized); each part closes through the center so the two areas sum to
/// the polygon's area for star-shaped inputs.  Either part may be absent.
SplitResult split_by_angle_interval(const Polygon& p, const Box& b, const AngleInterval& interval);

}  // namespace polykit
