// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
#include "polykit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace polykit {

bool Box::valid() const {
    if (!(std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2))) {
        return false;
    }
    if (x2 < x1 || y2 < y1 || class_id < 0) {
        return false;
    }
    if (score && (*score < 0.0 || *score > 1.0)) {
        return false;
    }
    return true;
}

std::size_t Mask::popcount() const {
    return static_cast<std::size_t>(std::count(data.begin(), data.end(), std::uint8_t{1}));
}

Point box_center(const Box& b) {
    return {0.5 * (b.x1 + b.x2), 0.5 * (b.y1 + b.y2)};
}

double box_diagonal(const Box& b) {
    return std::hypot(b.width(), b.height());
}

double iou_box(const Box& a, const Box& b) {
    const double ix = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
    const double iy = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) {
        throw DataError("iou_box: both boxes are degenerate (zero union)");
    }
    return inter / uni;
}

double polygon_area(const Polygon& p) {
    const auto& v = p.vertices;
    if (v.size() < 3) {
        throw DataError("polygon_area: polygon needs at least 3 vertices");
    }
    double twice = 0.0;
    for (std::size_t i = 0, n = v.size(); i < n; ++i) {
        const Point& a = v[i];
        const Point& b = v[(i + 1) % n];
        twice += a.x * b.y - b.x * a.y;
    }
    return 0.5 * std::abs(twice);
}

Box polygon_bounds(const Polygon& p) {
    if (p.vertices.empty()) {
        throw DataError("polygon_bounds: empty polygon");
    }
    Box b;
    b.x1 = b.x2 = p.vertices.front().x;
    b.y1 = b.y2 = p.vertices.front().y;
    for (const Point& v : p.vertices) {
        b.x1 = std::min(b.x1, v.x);
        b.y1 = std::min(b.y1, v.y);
        b.x2 = std::max(b.x2, v.x);
        b.y2 = std::max(b.y2, v.y);
    }
    return b;
}

bool point_in_polygon(const Polygon& p, Point pt) {
    const auto& v = p.vertices;
    const std::size_t n = v.size();
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        // Half-open crossing test; counts edges strictly to the right of pt.
        if ((v[i].y > pt.y) != (v[j].y > pt.y)) {
            const double x_cross = v[i].x + (pt.y - v[i].y) * (v[j].x - v[i].x) / (v[j].y - v[i].y);
            if (pt.x < x_cross) {
                inside = !inside;
            }
        }
    }
    return inside;
}

Mask rasterize_polygon(const Polygon& p, int width, int height) {
    if (width <= 0 || height <= 0) {
        throw std::invalid_argument("rasterize_polygon: dimensions must be positive");
    }
    Mask m(width, height);
    if (p.vertices.size() < 3) {
        return m;
    }
    // Scanline even-odd fill over the polygon's rows.  Per row the edge
    // crossings use the same expression as point_in_polygon, so the two
    // agree exactly, ties included.
    const Box bounds = polygon_bounds(p);
    const int y_lo = std::max(0, static_cast<int>(std::floor(bounds.y1 - 0.5)));
    const int y_hi = std::min(height - 1, static_cast<int>(std::ceil(bounds.y2)));
    const auto& v = p.vertices;
    const std::size_t n = v.size();
    std::vector<double> crossings;
    for (int y = y_lo; y <= y_hi; ++y) {
        const double py = y + 0.5;
        crossings.clear();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            if ((v[i].y > py) != (v[j].y > py)) {
                crossings.push_back(v[i].x + (py - v[i].y) * (v[j].x - v[i].x) / (v[j].y - v[i].y));
            }
        }
        std::sort(crossings.begin(), crossings.end());
        for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
            // Pixel centers px = x + 0.5 with crossings[k] <= px < crossings[k+1];
            // the 0.5 subtraction is exact at these magnitudes.
            const int x_first = static_cast<int>(std::ceil(crossings[k] - 0.5));
            for (int x = std::max(0, x_first); x < width; ++x) {
                if (!(static_cast<double>(x) + 0.5 < crossings[k + 1])) {
                    break;
                }
                m.set(x, y, 1);
            }
        }
    }
    return m;
}

double mask_iou(const Mask& a, const Mask& b) {
    if (a.width != b.width || a.height != b.height) {
        throw std::invalid_argument("mask_iou: dimension mismatch");
    }
    std::size_t inter = 0;
    std::size_t uni = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const bool pa = a.data[i] != 0;
        const bool pb = b.data[i] != 0;
        inter += (pa && pb) ? 1 : 0;
        uni += (pa || pb) ? 1 : 0;
    }
    if (uni == 0) {
        throw DataError("mask_iou: both masks are empty");
    }
    return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace polykit
