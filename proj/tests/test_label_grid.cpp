// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
#include "polykit/label_grid.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "polykit/anchor_tools.hpp"

using namespace polykit;

namespace {

double urand(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<Box> random_scene(std::mt19937_64& rng, int input_w, int input_h, int max_boxes) {
    const int n = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_boxes));
    std::vector<Box> boxes;
    for (int i = 0; i < n; ++i) {
        const double w = urand(rng, 4, 60);
        const double h = urand(rng, 4, 60);
        const double cx = urand(rng, 1, input_w - 1);
        const double cy = urand(rng, 1, input_h - 1);
        Box b{cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h, static_cast<int>(rng() % 3)};
        boxes.push_back(b);
    }
    return boxes;
}

AnchorSet simple_anchors(std::initializer_list<std::pair<double, double>> sizes) {
    AnchorSet a;
    for (const auto& [w, h] : sizes) {
        a.anchors.push_back({w, h});
    }
    return a;
}

Polygon star_polygon(std::mt19937_64& rng, const Box& b, int n_vertices) {
    const Point c = box_center(b);
    const double extent = 0.45 * std::min(b.width(), b.height());
    const double span = 2.0 * std::numbers::pi / n_vertices;
    Polygon p;
    for (int k = 0; k < n_vertices; ++k) {
        if ((rng() & 1u) == 0 && n_vertices - k > 3) {
            continue;
        }
        const double angle = (k + urand(rng, 0.1, 0.9)) * span;
        const double r = urand(rng, 0.3, 1.0) * extent;
        p.vertices.push_back({c.x + r * std::cos(angle), c.y + r * std::sin(angle)});
    }
    return p;
}

}  // namespace

TEST_CASE("slot channel bookkeeping") {
    const TensorLayout layout{9, 20, 30};
    CHECK(layout.channels_per_anchor() == 5 + 20 + 3 * 30);
    CHECK(layout.class_channel(0) == 5);
    CHECK(layout.alpha_channel(0) == 25);
    CHECK(layout.gamma_channel(29) == layout.channels_per_anchor() - 1);
    // Polygon slots grow the head by 115/25 = 4.6x over boxes-only.
    const TensorLayout boxes_only{9, 20, 0};
    CHECK(static_cast<double>(layout.channels_per_anchor()) / boxes_only.channels_per_anchor() ==
          doctest::Approx(4.6));
}

TEST_CASE("xi floor-cell indicator") {
    CHECK(xi(100, 120, 1.0 / 32) == 1);
    CHECK(xi(100, 129, 1.0 / 32) == 0);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
        const double x = urand(rng, 0, 1000);
        const double z = urand(rng, 0.01, 1.0);
        CHECK(xi(x, x, z) == 1);
    }
}

TEST_CASE("match_anchor picks the maximal co-centered IoU") {
    const AnchorSet two = simple_anchors({{10, 10}, {100, 100}});
    CHECK(match_anchor({0, 0, 10, 10}, two) == 0);
    CHECK(match_anchor({0, 0, 100, 100}, two) == 1);

    const AnchorSet three = simple_anchors({{10, 10}, {32, 64}, {100, 100}});
    const Box b{0, 0, 30, 60};
    // Independent arithmetic oracle for the co-centered IoU of 30x60 vs each anchor.
    auto oracle = [](double w, double h, double aw, double ah) {
        const double inter = std::min(w, aw) * std::min(h, ah);
        return inter / (w * h + aw * ah - inter);
    };
    int best = 0;
    double best_iou = -1;
    for (int j = 0; j < 3; ++j) {
        const double iou = oracle(30, 60, three.anchors[static_cast<std::size_t>(j)].w,
                                  three.anchors[static_cast<std::size_t>(j)].h);
        if (iou > best_iou) {
            best_iou = iou;
            best = j;
        }
    }
    CHECK(best == 1);
    CHECK(match_anchor(b, three) == 1);
    CHECK_THROWS_AS(match_anchor({5, 5, 5, 9}, three), DataError);

    // Ties resolve to the lowest index.
    const AnchorSet twins = simple_anchors({{10, 10}, {10, 10}});
    CHECK(match_anchor({0, 0, 10, 10}, twins) == 0);
}

TEST_CASE("count_rewrites on the two-box example") {
    const AnchorSet one = simple_anchors({{20, 20}});
    std::vector<Box> boxes{{90, 90, 110, 110}, {100, 95, 120, 115}};  // centers (100,100), (110,105)
    const GridSpec coarse{416, 416, 1.0 / 32};
    RewriteReport r = count_rewrites(boxes, coarse, one);
    CHECK(r.total_labels == 2);
    CHECK(r.rewritten == 1);
    CHECK(r.ratio == doctest::Approx(0.5));
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0].overwritten_label == 0);
    CHECK(r.events[0].overwriting_label == 1);
    CHECK(r.events[0].cell_x == 3);
    CHECK(r.events[0].cell_y == 3);

    const GridSpec fine{416, 416, 1.0 / 4};
    r = count_rewrites(boxes, fine, one);
    CHECK(r.rewritten == 0);

    r = count_rewrites(std::vector<Box>{}, fine, one);
    CHECK(r.total_labels == 0);
    CHECK(r.ratio == 0.0);
}

TEST_CASE("pairwise auditor equals build_targets overwrite accounting") {
    std::mt19937_64 rng(2024);
    const int input = 128;
    for (int scene_idx = 0; scene_idx < 100; ++scene_idx) {
        const std::vector<Box> boxes = random_scene(rng, input, input, 50);
        std::vector<LabeledObject> labels;
        for (const Box& b : boxes) {
            labels.push_back({b, std::nullopt});
        }
        for (const double s : {1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32}) {
            for (const int k : {1, 3, 9}) {
                AnchorSet anchors;
                for (int j = 0; j < k; ++j) {
                    anchors.anchors.push_back({8.0 + 6.0 * j, 8.0 + 4.5 * j});
                }
                const GridSpec grid{input, input, s};
                const RewriteReport pairwise = count_rewrites(boxes, grid, anchors);
                const BuildResult built = build_targets(labels, grid, anchors, {0}, 3);
                CHECK(pairwise.rewritten == built.report.rewritten);
                CHECK(pairwise.colliding_pairs == built.report.colliding_pairs);
                REQUIRE(pairwise.events.size() == built.report.events.size());
                for (std::size_t e = 0; e < pairwise.events.size(); ++e) {
                    CHECK(pairwise.events[e].overwritten_label == built.report.events[e].overwritten_label);
                    CHECK(pairwise.events[e].overwriting_label == built.report.events[e].overwriting_label);
                    CHECK(pairwise.events[e].cell_x == built.report.events[e].cell_x);
                    CHECK(pairwise.events[e].cell_y == built.report.events[e].cell_y);
                    CHECK(pairwise.events[e].anchor == built.report.events[e].anchor);
                }
            }
        }
    }
}

TEST_CASE("multi-scale audit follows the partitioned anchor's grid") {
    // Two boxes sharing the 1/32 cell but not the 1/8 cell; whether they
    // collide depends entirely on which scale their shared anchor lives on.
    std::vector<Box> boxes{{90, 90, 110, 110}, {100, 95, 120, 115}};
    const std::vector<GridSpec> grids{{416, 416, 1.0 / 8}, {416, 416, 1.0 / 32}};
    AnchorSet anchors;
    anchors.anchors = {{20, 20}, {200, 200}};

    anchors.scale_of_anchor = {1, 0};  // the matching 20x20 anchor sits on 1/32
    CHECK(count_rewrites(boxes, grids, anchors).rewritten == 1);
    anchors.scale_of_anchor = {0, 1};  // now it sits on 1/8: cells 12 vs 13
    CHECK(count_rewrites(boxes, grids, anchors).rewritten == 0);

    // Different best anchors never collide, whatever the cells say.
    std::vector<Box> mixed{{90, 90, 110, 110}, {5, 5, 205, 205}};
    anchors.scale_of_anchor = {1, 1};
    CHECK(count_rewrites(mixed, grids, anchors).rewritten == 0);

    AnchorSet no_partition;
    no_partition.anchors = anchors.anchors;
    CHECK_THROWS_AS(count_rewrites(boxes, grids, no_partition), std::invalid_argument);
}

TEST_CASE("grid validation and column/row orientation") {
    CHECK_THROWS_AS(GridSpec({100, 100, 1.0 / 3}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec({0, 64, 1.0 / 8}).validate(), std::invalid_argument);

    // Non-square input: 64 wide, 32 tall at 1/8 gives an 8x4 grid, and a box
    // in the lower-right quadrant must land at (column 6, row 3).
    const GridSpec grid{64, 32, 1.0 / 8};
    grid.validate();
    CHECK(grid.grid_w() == 8);
    CHECK(grid.grid_h() == 4);
    const AnchorSet anchors = simple_anchors({{10, 6}});
    const Box b{48, 26, 58, 32, 0};  // center (53, 29)
    const BuildResult r = build_targets(std::vector<LabeledObject>{{b, std::nullopt}}, grid,
                                        anchors, {0}, 1);
    CHECK(r.targets.at(3, 6, 0, TensorLayout::kObj) == 1.0);
}

TEST_CASE("rewrite ratio is monotone as the grid coarsens") {
    std::mt19937_64 rng(99);
    const AnchorSet anchors = simple_anchors({{12, 12}, {28, 28}, {48, 48}});
    for (int scene_idx = 0; scene_idx < 30; ++scene_idx) {
        const std::vector<Box> boxes = random_scene(rng, 128, 128, 50);
        double prev = -1.0;
        for (const double s : {1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32}) {
            const double ratio = count_rewrites(boxes, GridSpec{128, 128, s}, anchors).ratio;
            CHECK(ratio >= prev);
            prev = ratio;
        }
    }
}

TEST_CASE("more k-means anchors never increase the rewrite ratio of a scene set") {
    std::mt19937_64 rng(4242);
    std::vector<std::vector<Box>> scenes;
    std::vector<SizeSample> sizes;
    for (int scene_idx = 0; scene_idx < 20; ++scene_idx) {
        scenes.push_back(random_scene(rng, 416, 416, 50));
        for (const Box& b : scenes.back()) {
            sizes.push_back({b.width(), b.height()});
        }
    }
    double prev = 2.0;
    for (const int k : {1, 3, 9}) {
        AnchorSet anchors;
        anchors.anchors = kmeans_iou(sizes, k, 1).centroids;
        std::size_t total = 0;
        std::size_t rewritten = 0;
        for (const auto& boxes : scenes) {
            const RewriteReport r = count_rewrites(boxes, GridSpec{416, 416, 1.0 / 32}, anchors);
            total += r.total_labels;
            rewritten += r.rewritten;
        }
        const double ratio = static_cast<double>(rewritten) / static_cast<double>(total);
        CHECK(ratio <= prev);
        prev = ratio;
    }
}

TEST_CASE("build_targets writes the documented slot values") {
    const GridSpec grid{64, 64, 1.0 / 8};
    const AnchorSet anchors = simple_anchors({{16, 8}});
    // Box centered exactly on the center of cell (2, 3), sized like the anchor.
    const Box b{20 - 8, 28 - 4, 20 + 8, 28 + 4, 1};
    const BuildResult r = build_targets(std::vector<LabeledObject>{{b, std::nullopt}}, grid, anchors, {0}, 2);
    const TargetTensor& t = r.targets;
    CHECK(t.at(3, 2, 0, TensorLayout::kTx) == doctest::Approx(0.5));
    CHECK(t.at(3, 2, 0, TensorLayout::kTy) == doctest::Approx(0.5));
    CHECK(t.at(3, 2, 0, TensorLayout::kTw) == doctest::Approx(0.0));
    CHECK(t.at(3, 2, 0, TensorLayout::kTh) == doctest::Approx(0.0));
    CHECK(t.at(3, 2, 0, TensorLayout::kObj) == 1.0);
    CHECK(t.at(3, 2, 0, t.layout.class_channel(1)) == 1.0);
    CHECK(t.at(3, 2, 0, t.layout.class_channel(0)) == 0.0);
    std::size_t object_slots = 0;
    for (int cy = 0; cy < t.grid_h; ++cy) {
        for (int cx = 0; cx < t.grid_w; ++cx) {
            object_slots += t.at(cy, cx, 0, TensorLayout::kObj) > 0.5 ? 1u : 0u;
        }
    }
    CHECK(object_slots == 1);
}

TEST_CASE("build_targets keeps the later label on collision") {
    const GridSpec grid{416, 416, 1.0 / 32};
    const AnchorSet anchors = simple_anchors({{20, 20}});
    const std::vector<LabeledObject> labels{
        {{90, 90, 110, 110, 0}, std::nullopt},
        {{100, 95, 120, 115, 1}, std::nullopt},
    };
    const BuildResult r = build_targets(labels, grid, anchors, {0}, 2);
    REQUIRE(r.report.events.size() == 1);
    CHECK(r.report.rewritten == 1);
    const TargetTensor& t = r.targets;
    // The surviving slot carries the second label's class and size.
    CHECK(t.at(3, 3, 0, t.layout.class_channel(1)) == 1.0);
    CHECK(t.at(3, 3, 0, t.layout.class_channel(0)) == 0.0);
    CHECK(t.at(3, 3, 0, TensorLayout::kTx) == doctest::Approx(110.0 / 32 - 3));
}

TEST_CASE("build_targets rejects centers outside the grid") {
    const GridSpec grid{64, 64, 1.0 / 8};
    const AnchorSet anchors = simple_anchors({{16, 8}});
    const Box outside{60, 60, 70, 70};  // center (65, 65) beyond the input
    CHECK_THROWS_AS(
        build_targets(std::vector<LabeledObject>{{outside, std::nullopt}}, grid, anchors, {0}, 1),
        DataError);
}

TEST_CASE("decode of the exact inverse encoding reproduces labels") {
    std::mt19937_64 rng(31337);
    const GridSpec grid{128, 128, 1.0 / 4};
    const AnchorSet anchors = simple_anchors({{12, 10}, {40, 44}});
    const PolarGridSpec polar{8};
    for (int trial = 0; trial < 25; ++trial) {
        const std::vector<Box> boxes = random_scene(rng, 128, 128, 12);
        std::vector<LabeledObject> labels;
        for (const Box& b : boxes) {
            LabeledObject obj{b, std::nullopt};
            Polygon poly = star_polygon(rng, b, polar.n_vertices);
            if (poly.vertices.size() >= 3) {
                obj.polygon = poly;
            }
            labels.push_back(obj);
        }
        const BuildResult built = build_targets(labels, grid, anchors, polar, 3);
        const RawPrediction raw = raw_from_targets(built.targets, grid, anchors);
        const std::vector<Decoded> dets = decode_predictions(raw, grid, anchors, polar, 0.5);

        std::vector<bool> overwritten(labels.size(), false);
        for (const RewriteEvent& e : built.report.events) {
            overwritten[static_cast<std::size_t>(e.overwritten_label)] = true;
        }
        std::size_t survivors = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (overwritten[i]) {
                continue;
            }
            ++survivors;
            const Point c = box_center(labels[i].box);
            const Decoded* best = nullptr;
            double best_d = 1e18;
            for (const Decoded& d : dets) {
                const Point dc = box_center(d.box);
                const double dist = std::hypot(dc.x - c.x, dc.y - c.y);
                if (dist < best_d) {
                    best_d = dist;
                    best = &d;
                }
            }
            REQUIRE(best != nullptr);
            CHECK(std::abs(best->box.x1 - labels[i].box.x1) < 1e-4);
            CHECK(std::abs(best->box.y1 - labels[i].box.y1) < 1e-4);
            CHECK(std::abs(best->box.x2 - labels[i].box.x2) < 1e-4);
            CHECK(std::abs(best->box.y2 - labels[i].box.y2) < 1e-4);
            CHECK(best->class_id == labels[i].box.class_id);
            if (labels[i].polygon) {
                // The tensor path must agree with the pure codec path.
                const Polygon expected =
                    decode_polygon(encode_polygon(*labels[i].polygon, labels[i].box, polar),
                                   labels[i].box, 0.5);
                REQUIRE(best->polygon.has_value());
                REQUIRE(best->polygon->vertices.size() == expected.vertices.size());
                for (std::size_t v = 0; v < expected.vertices.size(); ++v) {
                    CHECK(std::abs(best->polygon->vertices[v].x - expected.vertices[v].x) < 1e-4);
                    CHECK(std::abs(best->polygon->vertices[v].y - expected.vertices[v].y) < 1e-4);
                }
            }
        }
        CHECK(dets.size() == survivors);
    }
}

TEST_CASE("target tensors keep their slot invariants on random scenes") {
    std::mt19937_64 rng(616);
    const GridSpec grid{128, 128, 1.0 / 8};
    const AnchorSet anchors = simple_anchors({{12, 10}, {40, 44}, {70, 66}});
    const PolarGridSpec polar{6};
    for (int trial = 0; trial < 20; ++trial) {
        const std::vector<Box> boxes = random_scene(rng, 128, 128, 30);
        std::vector<LabeledObject> labels;
        for (const Box& b : boxes) {
            LabeledObject obj{b, std::nullopt};
            Polygon poly = star_polygon(rng, b, polar.n_vertices);
            if (poly.vertices.size() >= 3) {
                obj.polygon = poly;
            }
            labels.push_back(obj);
        }
        const TargetTensor t = build_targets(labels, grid, anchors, polar, 3).targets;
        for (int cy = 0; cy < t.grid_h; ++cy) {
            for (int cx = 0; cx < t.grid_w; ++cx) {
                for (int a = 0; a < t.layout.num_anchors; ++a) {
                    const double q = t.at(cy, cx, a, TensorLayout::kObj);
                    CHECK((q == 0.0 || q == 1.0));
                    double one_hot = 0.0;
                    for (int k = 0; k < t.layout.num_classes; ++k) {
                        one_hot += t.at(cy, cx, a, t.layout.class_channel(k));
                    }
                    CHECK(one_hot == q);
                    if (q == 0.0) {
                        for (int ch = 0; ch < t.layout.channels_per_anchor(); ++ch) {
                            CHECK(t.at(cy, cx, a, ch) == 0.0);
                        }
                    } else {
                        CHECK(t.at(cy, cx, a, TensorLayout::kTx) >= 0.0);
                        CHECK(t.at(cy, cx, a, TensorLayout::kTx) < 1.0);
                        CHECK(t.at(cy, cx, a, TensorLayout::kTy) >= 0.0);
                        CHECK(t.at(cy, cx, a, TensorLayout::kTy) < 1.0);
                        for (int v = 0; v < t.layout.num_vertices; ++v) {
                            if (t.at(cy, cx, a, t.layout.gamma_channel(v)) == 0.0) {
                                CHECK(t.at(cy, cx, a, t.layout.alpha_channel(v)) == 0.0);
                                CHECK(t.at(cy, cx, a, t.layout.beta_channel(v)) == 0.0);
                            }
                        }
                    }
                }
            }
        }
    }
}

TEST_CASE("decode confidence thresholds") {
    const GridSpec grid{32, 32, 1.0 / 8};
    const AnchorSet anchors = simple_anchors({{10, 10}});
    const TensorLayout layout{1, 2, 0};
    RawPrediction raw(grid.grid_h(), grid.grid_w(), layout);
    for (double& v : raw.data) {
        v = -kSaturatedLogit;
    }
    CHECK(decode_predictions(raw, grid, anchors, {0}, 0.5).empty());
    // Threshold 0: every slot clears the bar.
    const auto all = decode_predictions(raw, grid, anchors, {0}, 0.0);
    CHECK(all.size() == raw.num_slots());
}

TEST_CASE("ignore mask excludes confident unlabeled overlaps only above the threshold") {
    const GridSpec grid{16, 16, 1.0 / 4};
    const AnchorSet anchors = simple_anchors({{3, 1}});
    const TensorLayout layout{1, 1, 0};
    const TargetTensor empty_target(grid.grid_h(), grid.grid_w(), layout);
    RawPrediction raw(grid.grid_h(), grid.grid_w(), layout);
    // Slot (0, 0) holds all-zero logits and decodes to the box [0.5, 1.5] x [3.5, 2.5].
    const Box decoded{0.5, 1.5, 3.5, 2.5};

    SUBCASE("identical prediction is masked out") {
        const std::vector<Box> labels{decoded};
        const auto mask = compute_ignore_mask(raw, empty_target, grid, anchors, labels);
        CHECK(mask[raw.slot_index(0, 0, 0)] == 0);
    }
    SUBCASE("disjoint prediction stays in the loss") {
        const std::vector<Box> labels{{100, 100, 110, 110}};
        const auto mask = compute_ignore_mask(raw, empty_target, grid, anchors, labels);
        for (const std::uint8_t m : mask) {
            CHECK(m == 1);
        }
    }
    SUBCASE("IoU exactly at the threshold is kept (strict inequality)") {
        const std::vector<Box> labels{{1.5, 1.5, 4.5, 2.5}};  // IoU exactly 0.5 with the decode
        CHECK(iou_box(decoded, labels[0]) == 0.5);
        const auto mask = compute_ignore_mask(raw, empty_target, grid, anchors, labels);
        CHECK(mask[raw.slot_index(0, 0, 0)] == 1);
    }
    SUBCASE("object slots are never excluded") {
        TargetTensor target = empty_target;
        target.at(0, 0, 0, TensorLayout::kObj) = 1.0;
        const std::vector<Box> labels{decoded};
        const auto mask = compute_ignore_mask(raw, target, grid, anchors, labels);
        CHECK(mask[raw.slot_index(0, 0, 0)] == 1);
    }
}
