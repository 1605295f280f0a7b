// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
#include "polykit/geometry.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

using namespace polykit;

namespace {

// Independent IoU oracle: counts sub-pixel sample points inside each box on a
// fine grid over their joint bounds.
double iou_rasterized_oracle(const Box& a, const Box& b, int subdiv) {
    const double x_lo = std::min(a.x1, b.x1);
    const double y_lo = std::min(a.y1, b.y1);
    const double x_hi = std::max(a.x2, b.x2);
    const double y_hi = std::max(a.y2, b.y2);
    const double step_x = (x_hi - x_lo) / subdiv;
    const double step_y = (y_hi - y_lo) / subdiv;
    std::int64_t inter = 0;
    std::int64_t uni = 0;
    for (int iy = 0; iy < subdiv; ++iy) {
        for (int ix = 0; ix < subdiv; ++ix) {
            const double x = x_lo + (ix + 0.5) * step_x;
            const double y = y_lo + (iy + 0.5) * step_y;
            const bool in_a = x > a.x1 && x < a.x2 && y > a.y1 && y < a.y2;
            const bool in_b = x > b.x1 && x < b.x2 && y > b.y1 && y < b.y2;
            inter += (in_a && in_b) ? 1 : 0;
            uni += (in_a || in_b) ? 1 : 0;
        }
    }
    return static_cast<double>(inter) / static_cast<double>(uni);
}

Polygon regular_ngon(double cx, double cy, double r, int n) {
    Polygon p;
    for (int i = 0; i < n; ++i) {
        const double t = 2.0 * std::numbers::pi * i / n;
        p.vertices.push_back({cx + r * std::cos(t), cy + r * std::sin(t)});
    }
    return p;
}

}  // namespace

TEST_CASE("box_center basics") {
    CHECK(box_center({0, 0, 10, 10}).x == doctest::Approx(5.0));
    CHECK(box_center({0, 0, 10, 10}).y == doctest::Approx(5.0));
    const Point degenerate = box_center({2, 4, 2, 4});
    CHECK(degenerate.x == doctest::Approx(2.0));
    CHECK(degenerate.y == doctest::Approx(4.0));
    const Point c = box_center({0, 0, 3, 7});
    CHECK(c.x == doctest::Approx(1.5));
    CHECK(c.y == doctest::Approx(3.5));
}

TEST_CASE("box_diagonal basics") {
    CHECK(box_diagonal({0, 0, 3, 4}) == doctest::Approx(5.0));
    CHECK(box_diagonal({0, 0, 0, 0}) == doctest::Approx(0.0));
    CHECK(box_diagonal({0, 0, 1, 1}) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("iou_box identity, disjoint and overlap") {
    const Box a{0, 0, 2, 2};
    CHECK(iou_box(a, a) == doctest::Approx(1.0));
    CHECK(iou_box(a, {5, 5, 7, 7}) == doctest::Approx(0.0));

    // Overlap case frozen against the rasterized oracle.
    const Box b{1, 1, 3, 3};
    const double oracle = iou_rasterized_oracle(a, b, 900);
    CHECK(oracle == doctest::Approx(1.0 / 7.0).epsilon(0.01));
    CHECK(iou_box(a, b) == doctest::Approx(1.0 / 7.0));
}

TEST_CASE("iou_box rejects two degenerate boxes") {
    CHECK_THROWS_AS(iou_box({1, 1, 1, 1}, {2, 2, 2, 2}), DataError);
    // A single degenerate operand is fine.
    CHECK(iou_box({1, 1, 1, 1}, {0, 0, 4, 4}) == doctest::Approx(0.0));
}

TEST_CASE("iou_box properties over random boxes") {
    std::mt19937_64 rng(7);
    auto u = [&](double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    for (int trial = 0; trial < 200; ++trial) {
        Box a{u(0, 50), u(0, 50), 0, 0};
        a.x2 = a.x1 + u(0.1, 40);
        a.y2 = a.y1 + u(0.1, 40);
        Box b{u(0, 50), u(0, 50), 0, 0};
        b.x2 = b.x1 + u(0.1, 40);
        b.y2 = b.y1 + u(0.1, 40);
        const double ab = iou_box(a, b);
        CHECK(ab == doctest::Approx(iou_box(b, a)));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
        CHECK(iou_box(a, a) == doctest::Approx(1.0));
    }
}

TEST_CASE("polygon_area basics and orientation invariance") {
    Polygon square{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
    CHECK(polygon_area(square) == doctest::Approx(1.0));
    Polygon reversed = square;
    std::reverse(reversed.vertices.begin(), reversed.vertices.end());
    CHECK(polygon_area(reversed) == doctest::Approx(1.0));
    const Polygon tri{{{0, 0}, {4, 0}, {0, 3}}};
    CHECK(polygon_area(tri) == doctest::Approx(6.0));
    CHECK_THROWS_AS(polygon_area(Polygon{{{0, 0}, {1, 1}}}), DataError);
}

TEST_CASE("polygon_area invariant under cyclic rotation") {
    std::mt19937_64 rng(11);
    auto u = [&](double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    for (int trial = 0; trial < 50; ++trial) {
        Polygon p = regular_ngon(u(10, 20), u(10, 20), u(2, 8), 3 + static_cast<int>(rng() % 10));
        const double base = polygon_area(p);
        std::rotate(p.vertices.begin(), p.vertices.begin() + 1, p.vertices.end());
        CHECK(polygon_area(p) == doctest::Approx(base));
        std::reverse(p.vertices.begin(), p.vertices.end());
        CHECK(polygon_area(p) == doctest::Approx(base));
    }
}

TEST_CASE("rasterize_polygon covers exactly the pixel centers of an integer square") {
    const int k = 7;
    const Polygon square{{{2, 3}, {2.0 + k, 3}, {2.0 + k, 3.0 + k}, {2, 3.0 + k}}};
    const Mask m = rasterize_polygon(square, 16, 16);
    CHECK(m.popcount() == static_cast<std::size_t>(k * k));
    // Left/top boundary pixels are inside, right/bottom outside.
    CHECK(m.at(2, 3) == 1);
    CHECK(m.at(2 + k - 1, 3 + k - 1) == 1);
    CHECK(m.at(2 + k, 3) == 0);
    CHECK(m.at(2, 3 + k) == 0);
}

TEST_CASE("rasterize_polygon of an out-of-bounds polygon is empty") {
    const Polygon p{{{100, 100}, {110, 100}, {110, 110}, {100, 110}}};
    CHECK(rasterize_polygon(p, 16, 16).popcount() == 0);
    CHECK_THROWS_AS(rasterize_polygon(p, 0, 16), std::invalid_argument);
}

TEST_CASE("rasterize_polygon of a 64-gon disk approximates the analytic area") {
    const double r = 10.0;
    const Polygon disk = regular_ngon(16, 16, r, 64);
    const Mask m = rasterize_polygon(disk, 32, 32);
    const double analytic = std::numbers::pi * r * r;
    CHECK(std::abs(static_cast<double>(m.popcount()) - analytic) / analytic < 0.02);
}

TEST_CASE("rasterization popcount converges to the shoelace area at scale") {
    for (int n : {3, 5, 8}) {
        const double scale = 120.0;
        const Polygon p = regular_ngon(150, 150, scale, n);
        const double area = polygon_area(p);
        const double pop = static_cast<double>(rasterize_polygon(p, 300, 300).popcount());
        CHECK(pop / area == doctest::Approx(1.0).epsilon(0.01));
    }
}

TEST_CASE("scanline rasterization agrees with the point-containment test") {
    std::mt19937_64 rng(23);
    auto u = [&](double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    for (int trial = 0; trial < 60; ++trial) {
        Polygon p;
        const int n = 3 + static_cast<int>(rng() % 10);
        for (int i = 0; i < n; ++i) {
            const double t = 2.0 * std::numbers::pi * (i + u(0.1, 0.9)) / n;
            const double r = u(2, 14);
            p.vertices.push_back({16 + r * std::cos(t), 16 + r * std::sin(t)});
        }
        const Mask fast = rasterize_polygon(p, 32, 32);
        for (int y = 0; y < 32; ++y) {
            for (int x = 0; x < 32; ++x) {
                CHECK(fast.at(x, y) == (point_in_polygon(p, {x + 0.5, y + 0.5}) ? 1 : 0));
            }
        }
    }
}

TEST_CASE("mask_iou basics") {
    Mask a(4, 4);
    Mask b(4, 4);
    a.set(0, 0, 1);
    b.set(0, 0, 1);
    b.set(1, 0, 1);
    CHECK(mask_iou(a, b) == doctest::Approx(0.5));
    CHECK_THROWS_AS(mask_iou(Mask(2, 2), Mask(2, 2)), DataError);
}
