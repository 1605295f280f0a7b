// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
#include "polykit/mask_polygons.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

namespace polykit {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double angle_of(Point origin, Point v) {
    double a = std::atan2(v.y - origin.y, v.x - origin.x);
    if (a < 0.0) {
        a += kTwoPi;
    }
    if (a >= kTwoPi) {
        a = 0.0;
    }
    return a;
}

double point_segment_distance(Point p, Point a, Point b) {
    const double abx = b.x - a.x;
    const double aby = b.y - a.y;
    const double len2 = abx * abx + aby * aby;
    if (len2 == 0.0) {
        return std::hypot(p.x - a.x, p.y - a.y);
    }
    double t = ((p.x - a.x) * abx + (p.y - a.y) * aby) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p.x - (a.x + t * abx), p.y - (a.y + t * aby));
}

// Intersection of segment p->q with the ray from origin at `angle`.
Point ray_crossing(Point origin, double angle, Point p, Point q) {
    const double dx = std::cos(angle);
    const double dy = std::sin(angle);
    const double cp = dx * (p.y - origin.y) - dy * (p.x - origin.x);
    const double cq = dx * (q.y - origin.y) - dy * (q.x - origin.x);
    const double den = cq - cp;
    double t = den == 0.0 ? 0.0 : -cp / den;
    t = std::clamp(t, 0.0, 1.0);
    return {p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)};
}

void append_vertex(Polygon& p, Point v) {
    if (!p.vertices.empty()) {
        const Point& last = p.vertices.back();
        if (last.x == v.x && last.y == v.y) {
            return;
        }
    }
    p.vertices.push_back(v);
}

}  // namespace

std::vector<PixelBlob> blobs_from_levels(int width, int height,
                                         std::span<const std::uint8_t> levels) {
    if (width <= 0 || height <= 0 || levels.size() != static_cast<std::size_t>(width) * height) {
        throw std::invalid_argument("blobs_from_levels: dimension mismatch");
    }
    std::map<std::uint8_t, PixelBlob> by_level;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const std::uint8_t level = levels[static_cast<std::size_t>(y) * width + x];
            if (level == 0) {
                continue;
            }
            PixelBlob& blob = by_level[level];
            blob.width = width;
            blob.height = height;
            blob.pixels.emplace_back(x, y);
        }
    }
    std::vector<PixelBlob> out;
    out.reserve(by_level.size());
    for (auto& [level, blob] : by_level) {
        out.push_back(std::move(blob));
    }
    return out;
}

ExtractResult extract_polygon(const PixelBlob& blob, int n_sectors, double eps) {
    if (blob.pixels.empty()) {
        throw DataError("extract_polygon: empty blob");
    }
    if (n_sectors < 3) {
        throw std::invalid_argument("extract_polygon: n_sectors must be >= 3");
    }
    int min_x = blob.width;
    int min_y = blob.height;
    int max_x = -1;
    int max_y = -1;
    Mask member(blob.width, blob.height);
    for (const auto& [x, y] : blob.pixels) {
        if (x < 0 || y < 0 || x >= blob.width || y >= blob.height) {
            throw DataError("extract_polygon: blob pixel outside the image");
        }
        member.set(x, y, 1);
        min_x = std::min(min_x, x);
        min_y = std::min(min_y, y);
        max_x = std::max(max_x, x);
        max_y = std::max(max_y, y);
    }
    Box box;
    box.x1 = min_x;
    box.y1 = min_y;
    box.x2 = max_x + 1;
    box.y2 = max_y + 1;
    const Point origin = box_center(box);

    auto is_blob = [&](int x, int y) {
        return x >= 0 && y >= 0 && x < blob.width && y < blob.height && member.at(x, y) != 0;
    };

    // Farthest boundary-pixel center per angular bin; row-major scan order
    // makes ties deterministic.
    const double span = kTwoPi / n_sectors;
    std::vector<double> best_d2(static_cast<std::size_t>(n_sectors), -1.0);
    std::vector<Point> best_pt(static_cast<std::size_t>(n_sectors));
    for (int y = min_y; y <= max_y; ++y) {
        for (int x = min_x; x <= max_x; ++x) {
            if (!is_blob(x, y)) {
                continue;
            }
            if (is_blob(x - 1, y) && is_blob(x + 1, y) && is_blob(x, y - 1) && is_blob(x, y + 1)) {
                continue;  // interior pixel
            }
            const Point c{x + 0.5, y + 0.5};
            const double dx = c.x - origin.x;
            const double dy = c.y - origin.y;
            const double d2 = dx * dx + dy * dy;
            if (d2 == 0.0) {
                continue;  // boundary pixel centered on the origin carries no angle
            }
            int bin = static_cast<int>(std::floor(angle_of(origin, c) / span));
            if (bin >= n_sectors) {
                bin = 0;
            }
            if (d2 > best_d2[static_cast<std::size_t>(bin)]) {
                best_d2[static_cast<std::size_t>(bin)] = d2;
                // Half a pixel outward along the ray: the vertex stays on its
                // source pixel but the polygon bounds the pixel's extent
                // instead of inscribing the centers.
                const double d = std::sqrt(d2);
                best_pt[static_cast<std::size_t>(bin)] = {c.x + 0.5 * dx / d, c.y + 0.5 * dy / d};
            }
        }
    }

    Polygon poly;
    for (int bin = 0; bin < n_sectors; ++bin) {
        if (best_d2[static_cast<std::size_t>(bin)] >= 0.0) {
            poly.vertices.push_back(best_pt[static_cast<std::size_t>(bin)]);
        }
    }
    if (poly.vertices.size() < 3) {
        throw DataError("extract_polygon: blob degenerates to fewer than 3 boundary points");
    }
    return {simplify_collinear(poly, eps), box};
}

Polygon simplify_collinear(const Polygon& p, double eps) {
    if (p.vertices.size() < 3) {
        throw DataError("simplify_collinear: polygon needs at least 3 vertices");
    }
    if (eps < 0.0) {
        throw std::invalid_argument("simplify_collinear: eps must be >= 0");
    }
    std::vector<Point> v = p.vertices;
    while (true) {
        const std::size_t n = v.size();
        std::size_t worst = n;
        double worst_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            const Point& prev = v[(i + n - 1) % n];
            const Point& next = v[(i + 1) % n];
            const double d = point_segment_distance(v[i], prev, next);
            if (d < worst_d) {
                worst_d = d;
                worst = i;
            }
        }
        if (worst == n || worst_d > eps) {
            break;
        }
        if (n == 3) {
            throw DataError("simplify_collinear: erasure would leave fewer than 3 vertices");
        }
        v.erase(v.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    return {std::move(v)};
}

SplitResult split_by_angle_interval(const Polygon& p, const Box& b, const AngleInterval& interval) {
    if (p.vertices.size() < 3) {
        throw DataError("split_by_angle_interval: polygon needs at least 3 vertices");
    }
    const Point origin = box_center(b);
    const double low = interval.low * std::numbers::pi / 180.0;
    double span = std::fmod(interval.high - interval.low, 360.0) * std::numbers::pi / 180.0;
    if (span < 0.0) {
        span += kTwoPi;
    }

    SplitResult result;
    if (span == 0.0) {  // modular full circle
        result.dimmed = p;
        return result;
    }

    // Orient counter-clockwise in the atan2 sense.
    std::vector<Point> v = p.vertices;
    double twice_signed = 0.0;
    for (std::size_t i = 0, n = v.size(); i < n; ++i) {
        const Point& a = v[i];
        const Point& c = v[(i + 1) % n];
        twice_signed += a.x * c.y - c.x * a.y;
    }
    if (twice_signed < 0.0) {
        std::reverse(v.begin(), v.end());
    }
    const std::size_t n = v.size();

    // Star-shapedness: the vertex angles must wind exactly once.
    std::vector<double> theta(n);
    for (std::size_t i = 0; i < n; ++i) {
        theta[i] = angle_of(origin, v[i]);
    }
    double winding = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = theta[(i + 1) % n] - theta[i];
        if (d < 0.0) {
            d += kTwoPi;
        }
        winding += d;
    }
    result.star_shaped = std::abs(winding - kTwoPi) < 1e-6;

    auto rel = [&](double t, double base) {
        double r = std::fmod(t - base, kTwoPi);
        if (r < 0.0) {
            r += kTwoPi;
        }
        return r;
    };

    // The boundary crosses a ray on the edge where the relative angle wraps.
    auto wrap_edge = [&](double base) {
        for (std::size_t i = 0; i < n; ++i) {
            if (rel(theta[(i + 1) % n], base) < rel(theta[i], base)) {
                return i;
            }
        }
        return n - 1;  // all angles equal; arbitrary but deterministic
    };
    const double high = low + span;
    const std::size_t low_edge = wrap_edge(low);
    const std::size_t high_edge = wrap_edge(high);
    const Point cross_low = ray_crossing(origin, low, v[low_edge], v[(low_edge + 1) % n]);
    const Point cross_high = ray_crossing(origin, high, v[high_edge], v[(high_edge + 1) % n]);

    Polygon dim;
    append_vertex(dim, cross_low);
    for (std::size_t step = 1, i = (low_edge + 1) % n; step <= n; ++step, i = (i + 1) % n) {
        if (rel(theta[i], low) >= span) {
            break;
        }
        append_vertex(dim, v[i]);
    }
    append_vertex(dim, cross_high);
    append_vertex(dim, {origin.x, origin.y});

    Polygon emph;
    append_vertex(emph, cross_high);
    for (std::size_t step = 1, i = (high_edge + 1) % n; step <= n; ++step, i = (i + 1) % n) {
        if (rel(theta[i], low) < span) {
            break;
        }
        append_vertex(emph, v[i]);
    }
    append_vertex(emph, cross_low);
    append_vertex(emph, {origin.x, origin.y});

    if (dim.vertices.size() >= 3) {
        result.dimmed = std::move(dim);
    }
    if (emph.vertices.size() >= 3) {
        result.emphasized = std::move(emph);
    }
    return result;
}

}  // namespace polykit
