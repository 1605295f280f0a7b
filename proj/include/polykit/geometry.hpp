// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "polykit/errors.hpp"

namespace polykit {

/// Real-valued image point.  Image coordinates: x grows right, y grows down,
/// origin at the top-left corner.
struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Axis-aligned box in pixels, corner form: (x1, y1) top-left,
/// (x2, y2) bottom-right.  Center/size form is derived on demand.
struct Box {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;
    int class_id = 0;
    std::optional<double> score;

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double area() const { return width() * height(); }
    bool valid() const;
};

/// Simple polygon given by its vertices in order; the last vertex is
/// implicitly connected back to the first.
struct Polygon {
    std::vector<Point> vertices;
};

/// Dense binary mask, row-major, one byte per pixel (0 or 1).
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    Mask() = default;
    Mask(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0) {}

    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    void set(int x, int y, std::uint8_t v) { data[static_cast<std::size_t>(y) * width + x] = v; }
    std::size_t popcount() const;
};

Point box_center(const Box& b);
double box_diagonal(const Box& b);

/// Intersection-over-union of two boxes.  Two zero-area boxes make the union
/// empty; that is reported as a DataError rather than silently returning 0 so
/// degenerate annotations surface early.
double iou_box(const Box& a, const Box& b);

/// Absolute shoelace area.  Throws DataError for fewer than 3 vertices.
double polygon_area(const Polygon& p);

/// Tight axis-aligned bounds of the polygon's vertices.
Box polygon_bounds(const Polygon& p);

/// Even-odd containment test against pixel-space coordinates.  Boundary tie
/// rule: a point exactly on the left or top boundary of the enclosed region
/// counts as inside, on the right or bottom boundary as outside.  The rule is
/// deterministic and platform independent.
bool point_in_polygon(const Polygon& p, Point pt);

/// Rasterizes the polygon onto a width x height grid.  Pixel (i, j) is set
/// iff its center (i + 0.5, j + 0.5) lies inside the polygon under the
/// even-odd rule above.  Throws std::invalid_argument for non-positive
/// dimensions.
Mask rasterize_polygon(const Polygon& p, int width, int height);

/// IoU of two masks of identical dimensions (popcount of AND over OR).
/// Empty union is a DataError, mirroring iou_box.
double mask_iou(const Mask& a, const Mask& b);

}  // namespace polykit
