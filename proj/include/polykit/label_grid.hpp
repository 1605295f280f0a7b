// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "polykit/geometry.hpp"
#include "polykit/polar_codec.hpp"

namespace polykit {

/// Output-grid geometry: input resolution in pixels and the scale ratio s of
/// the output to the input (1/4, 1/8, 1/16, 1/32, ...).  Grid coordinates are
/// (column, row) with origin at the top-left; cell (cx, cy) covers pixels
/// [cx/s, (cx+1)/s) x [cy/s, (cy+1)/s).
struct GridSpec {
    int input_w = 0;
    int input_h = 0;
    double scale = 0.0;

    int grid_w() const;
    int grid_h() const;
    /// Throws std::invalid_argument unless input_w * scale and
    /// input_h * scale are positive integers.
    void validate() const;
};

struct Anchor {
    double w = 0.0;
    double h = 0.0;

    double diagonal() const;
};

/// Prior box sizes, optionally partitioned across output scales the way
/// YOLOv3 assigns anchor triplets to its three heads.  scale_of_anchor[j] is
/// the index into the grid list owning anchor j; leave it empty for a single
/// shared output.
struct AnchorSet {
    std::vector<Anchor> anchors;
    std::vector<int> scale_of_anchor;

    bool has_partition() const { return !scale_of_anchor.empty(); }
    void validate() const;
};

/// Channel bookkeeping for the dense per-anchor slot layout
/// (tx, ty, tw, th, q) + one-hot class + n_vertices x (alpha, beta, gamma).
struct TensorLayout {
    int num_anchors = 0;
    int num_classes = 0;
    int num_vertices = 0;

    static constexpr int kTx = 0;
    static constexpr int kTy = 1;
    static constexpr int kTw = 2;
    static constexpr int kTh = 3;
    static constexpr int kObj = 4;

    int class_channel(int k) const { return 5 + k; }
    int alpha_channel(int v) const { return 5 + num_classes + 3 * v; }
    int beta_channel(int v) const { return alpha_channel(v) + 1; }
    int gamma_channel(int v) const { return alpha_channel(v) + 2; }
    int channels_per_anchor() const { return 5 + num_classes + 3 * num_vertices; }
};

/// Dense tensor of shape grid_h x grid_w x num_anchors x channels_per_anchor.
/// Used both for ground-truth targets (activations/log offsets) and for raw
/// network predictions (pre-activation logits); see build_targets and
/// decode_predictions for the per-channel conventions.
struct SlotTensor {
    int grid_h = 0;
    int grid_w = 0;
    TensorLayout layout;
    std::vector<double> data;

    SlotTensor() = default;
    SlotTensor(int gh, int gw, const TensorLayout& l);

    std::size_t slot_index(int cy, int cx, int a) const;
    std::size_t num_slots() const;
    double& at(int cy, int cx, int a, int ch);
    double at(int cy, int cx, int a, int ch) const;
    bool same_shape(const SlotTensor& other) const;
};

using TargetTensor = SlotTensor;
using RawPrediction = SlotTensor;

struct RewriteEvent {
    int overwritten_label = 0;  // index of the label that is lost
    int overwriting_label = 0;  // index of the label that takes the slot
    int cell_x = 0;
    int cell_y = 0;
    int anchor = 0;
    int scale = 0;  // index into the audited grid list (0 for single scale)
};

struct RewriteReport {
    std::size_t total_labels = 0;
    std::size_t rewritten = 0;        // labels lost; later label wins
    std::size_t colliding_pairs = 0;  // unordered colliding pairs, for reference
    double ratio = 0.0;               // rewritten / total_labels (0 when empty)
    std::vector<RewriteEvent> events;
};

/// A ground-truth object: a box plus, optionally, its bounding polygon.
struct LabeledObject {
    Box box;
    std::optional<Polygon> polygon;
};

struct BuildResult {
    TargetTensor targets;
    RewriteReport report;
};

/// A detection decoded from a prediction tensor.
struct Decoded {
    Box box;
    std::optional<Polygon> polygon;
    double score = 0.0;
    int class_id = 0;
};

/// Cell-collision indicator: 1 iff floor(x * z) == floor(y * z).
int xi(double x, double y, double z);

/// IoU of two co-centered boxes given by their sizes only.
double co_centered_iou(double w, double h, double aw, double ah);

/// Index of the anchor maximizing co-centered IoU with the box size; ties go
/// to the lowest index.  Degenerate boxes raise DataError.
int match_anchor(const Box& b, const AnchorSet& anchors);

/// Pairwise label-rewrite audit: labels i < j collide when their centers share
/// a grid cell on the scale owning their common best anchor.  A label counts
/// as rewritten when any later label collides with it (later label wins, the
/// same convention build_targets applies while writing).  With several grids
/// the anchor partition selects each label's scale.
RewriteReport count_rewrites(std::span<const Box> boxes, std::span<const GridSpec> grids,
                             const AnchorSet& anchors);
RewriteReport count_rewrites(std::span<const Box> boxes, const GridSpec& grid,
                             const AnchorSet& anchors);

/// Builds the dense single-scale ground-truth tensor.  Per label, in input
/// order: cell = floor(center * s), anchor = match_anchor, then the slot gets
/// tx/ty = frac(center * s), tw/th = log(size / anchor size), q = 1, a one-hot
/// class row and the polar slots from encode_polygon (zeros when the polygon
/// is absent).  Earlier labels hitting the same slot are overwritten and
/// recorded in the report.  A box center outside the grid raises DataError
/// naming the label.  polar.n_vertices == 0 builds box-only targets.
BuildResult build_targets(std::span<const LabeledObject> labels, const GridSpec& grid,
                          const AnchorSet& anchors, const PolarGridSpec& polar,
                          int num_classes);

/// Decodes a raw prediction tensor (pre-activation values) into detections.
/// Per slot: center = (cell + logistic(t)) / s, size = anchor * exp(t),
/// score = logistic(q) * max_k logistic(class_k).  Slots with score below
/// conf_threshold are dropped.  Vertex distances are anchor-diagonal relative:
/// distance = anchor_diagonal * exp(alpha_hat), converted to the codec's
/// box-relative alpha before decode_polygon at gamma threshold 0.5; slots
/// whose polygon keeps fewer than 3 vertices yield a box-only detection.
std::vector<Decoded> decode_predictions(const RawPrediction& raw, const GridSpec& grid,
                                        const AnchorSet& anchors, const PolarGridSpec& polar,
                                        double conf_threshold);

/// Inverse of decode_predictions for exact targets: produces the raw tensor
/// whose decode reproduces the encoded labels.  Binary targets map to logits
/// +-kSaturatedLogit.
RawPrediction raw_from_targets(const TargetTensor& target, const GridSpec& grid,
                               const AnchorSet& anchors);

inline constexpr double kSaturatedLogit = 40.0;

/// No-object confidence-loss weights, one per slot, multiplying the q == 0
/// branch of the confidence loss.  A slot's weight is 0 (excluded) iff its
/// target q is 0 and its decoded box overlaps some label with
/// IoU > iou_threshold (strict); otherwise 1.
std::vector<std::uint8_t> compute_ignore_mask(const RawPrediction& raw, const TargetTensor& target,
                                              const GridSpec& grid, const AnchorSet& anchors,
                                              std::span<const Box> labels,
                                              double iou_threshold = 0.5);

}  // namespace polykit
