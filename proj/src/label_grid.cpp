// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
#include "polykit/label_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace polykit {

namespace {

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double clamped_logit(double p) {
    const double lo = sigmoid(-kSaturatedLogit);
    const double hi = sigmoid(kSaturatedLogit);
    if (p <= lo) {
        return -kSaturatedLogit;
    }
    if (p >= hi) {
        return kSaturatedLogit;
    }
    return std::log(p / (1.0 - p));
}

struct SlotRef {
    int scale;
    int cell_x;
    int cell_y;
    int anchor;

    bool operator==(const SlotRef&) const = default;
};

struct SlotRefHash {
    std::size_t operator()(const SlotRef& s) const {
        std::size_t h = static_cast<std::size_t>(s.scale);
        h = h * 1000003u + static_cast<std::size_t>(s.cell_x);
        h = h * 1000003u + static_cast<std::size_t>(s.cell_y);
        h = h * 1000003u + static_cast<std::size_t>(s.anchor);
        return h;
    }
};

Box slot_box(const RawPrediction& raw, const GridSpec& grid, const AnchorSet& anchors,
             int cy, int cx, int a) {
    const double stride = 1.0 / grid.scale;
    const double cxp = (static_cast<double>(cx) + sigmoid(raw.at(cy, cx, a, TensorLayout::kTx))) * stride;
    const double cyp = (static_cast<double>(cy) + sigmoid(raw.at(cy, cx, a, TensorLayout::kTy))) * stride;
    const double w = anchors.anchors[static_cast<std::size_t>(a)].w * std::exp(raw.at(cy, cx, a, TensorLayout::kTw));
    const double h = anchors.anchors[static_cast<std::size_t>(a)].h * std::exp(raw.at(cy, cx, a, TensorLayout::kTh));
    Box b;
    b.x1 = cxp - 0.5 * w;
    b.y1 = cyp - 0.5 * h;
    b.x2 = cxp + 0.5 * w;
    b.y2 = cyp + 0.5 * h;
    return b;
}

}  // namespace

int GridSpec::grid_w() const {
    return static_cast<int>(std::lround(input_w * scale));
}

int GridSpec::grid_h() const {
    return static_cast<int>(std::lround(input_h * scale));
}

void GridSpec::validate() const {
    if (input_w <= 0 || input_h <= 0 || scale <= 0.0) {
        throw std::invalid_argument("GridSpec: input dimensions and scale must be positive");
    }
    const double gw = input_w * scale;
    const double gh = input_h * scale;
    if (std::abs(gw - std::round(gw)) > 1e-9 || std::abs(gh - std::round(gh)) > 1e-9 ||
        std::round(gw) < 1.0 || std::round(gh) < 1.0) {
        throw std::invalid_argument("GridSpec: input size times scale must be a positive integer");
    }
}

double Anchor::diagonal() const {
    return std::hypot(w, h);
}

void AnchorSet::validate() const {
    if (anchors.empty()) {
        throw std::invalid_argument("AnchorSet: at least one anchor required");
    }
    for (const Anchor& a : anchors) {
        if (!(a.w > 0.0) || !(a.h > 0.0)) {
            throw std::invalid_argument("AnchorSet: anchor dimensions must be positive");
        }
    }
    if (!scale_of_anchor.empty() && scale_of_anchor.size() != anchors.size()) {
        throw std::invalid_argument("AnchorSet: partition size does not match anchor count");
    }
}

SlotTensor::SlotTensor(int gh, int gw, const TensorLayout& l)
    : grid_h(gh),
      grid_w(gw),
      layout(l),
      data(static_cast<std::size_t>(gh) * gw * l.num_anchors * l.channels_per_anchor(), 0.0) {}

std::size_t SlotTensor::slot_index(int cy, int cx, int a) const {
    return (static_cast<std::size_t>(cy) * grid_w + cx) * layout.num_anchors + a;
}

std::size_t SlotTensor::num_slots() const {
    return static_cast<std::size_t>(grid_h) * grid_w * layout.num_anchors;
}

double& SlotTensor::at(int cy, int cx, int a, int ch) {
    return data[slot_index(cy, cx, a) * layout.channels_per_anchor() + ch];
}

double SlotTensor::at(int cy, int cx, int a, int ch) const {
    return data[slot_index(cy, cx, a) * layout.channels_per_anchor() + ch];
}

bool SlotTensor::same_shape(const SlotTensor& other) const {
    return grid_h == other.grid_h && grid_w == other.grid_w &&
           layout.num_anchors == other.layout.num_anchors &&
           layout.num_classes == other.layout.num_classes &&
           layout.num_vertices == other.layout.num_vertices;
}

int xi(double x, double y, double z) {
    return std::floor(x * z) == std::floor(y * z) ? 1 : 0;
}

double co_centered_iou(double w, double h, double aw, double ah) {
    const double inter = std::min(w, aw) * std::min(h, ah);
    const double uni = w * h + aw * ah - inter;
    return inter / uni;
}

int match_anchor(const Box& b, const AnchorSet& anchors) {
    anchors.validate();
    if (!(b.width() > 0.0) || !(b.height() > 0.0)) {
        throw DataError("match_anchor: degenerate box");
    }
    int best = 0;
    double best_iou = -1.0;
    for (std::size_t j = 0; j < anchors.anchors.size(); ++j) {
        const double iou = co_centered_iou(b.width(), b.height(), anchors.anchors[j].w, anchors.anchors[j].h);
        if (iou > best_iou) {
            best_iou = iou;
            best = static_cast<int>(j);
        }
    }
    return best;
}

RewriteReport count_rewrites(std::span<const Box> boxes, std::span<const GridSpec> grids,
                             const AnchorSet& anchors) {
    if (grids.empty()) {
        throw std::invalid_argument("count_rewrites: at least one grid required");
    }
    for (const GridSpec& g : grids) {
        g.validate();
    }
    anchors.validate();
    if (grids.size() > 1 && !anchors.has_partition()) {
        throw std::invalid_argument("count_rewrites: multi-scale audit needs an anchor partition");
    }
    if (anchors.has_partition()) {
        for (int s : anchors.scale_of_anchor) {
            if (s < 0 || static_cast<std::size_t>(s) >= grids.size()) {
                throw std::invalid_argument("count_rewrites: partition references an unknown scale");
            }
        }
    }

    RewriteReport report;
    report.total_labels = boxes.size();
    if (boxes.empty()) {
        return report;
    }

    const std::size_t n = boxes.size();
    std::vector<Point> centers(n);
    std::vector<int> anchor_of(n);
    std::vector<int> scale_of(n);
    for (std::size_t i = 0; i < n; ++i) {
        centers[i] = box_center(boxes[i]);
        anchor_of[i] = match_anchor(boxes[i], anchors);
        scale_of[i] = anchors.has_partition() ? anchors.scale_of_anchor[static_cast<std::size_t>(anchor_of[i])] : 0;
    }

    auto collides = [&](std::size_t i, std::size_t j) {
        if (anchor_of[i] != anchor_of[j]) {
            return false;
        }
        const double s = grids[static_cast<std::size_t>(scale_of[i])].scale;
        return xi(centers[i].x, centers[j].x, s) + xi(centers[i].y, centers[j].y, s) == 2;
    };

    for (std::size_t i = 0; i < n; ++i) {
        bool lost = false;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!collides(i, j)) {
                continue;
            }
            ++report.colliding_pairs;
            if (!lost) {
                lost = true;
                const double s = grids[static_cast<std::size_t>(scale_of[i])].scale;
                RewriteEvent e;
                e.overwritten_label = static_cast<int>(i);
                e.overwriting_label = static_cast<int>(j);
                e.cell_x = static_cast<int>(std::floor(centers[i].x * s));
                e.cell_y = static_cast<int>(std::floor(centers[i].y * s));
                e.anchor = anchor_of[i];
                e.scale = scale_of[i];
                report.events.push_back(e);
            }
        }
        if (lost) {
            ++report.rewritten;
        }
    }
    // Same order a sequential writer would emit: by arrival of the overwriter.
    std::stable_sort(report.events.begin(), report.events.end(),
                     [](const RewriteEvent& a, const RewriteEvent& b) {
                         return a.overwriting_label < b.overwriting_label;
                     });
    report.ratio = report.total_labels == 0
                       ? 0.0
                       : static_cast<double>(report.rewritten) / static_cast<double>(report.total_labels);
    return report;
}

RewriteReport count_rewrites(std::span<const Box> boxes, const GridSpec& grid,
                             const AnchorSet& anchors) {
    return count_rewrites(boxes, std::span<const GridSpec>(&grid, 1), anchors);
}

BuildResult build_targets(std::span<const LabeledObject> labels, const GridSpec& grid,
                          const AnchorSet& anchors, const PolarGridSpec& polar,
                          int num_classes) {
    grid.validate();
    anchors.validate();
    if (num_classes < 1) {
        throw std::invalid_argument("build_targets: num_classes must be >= 1");
    }
    if (polar.n_vertices != 0 && polar.n_vertices < 3) {
        throw std::invalid_argument("build_targets: n_vertices must be 0 (boxes only) or >= 3");
    }

    TensorLayout layout;
    layout.num_anchors = static_cast<int>(anchors.anchors.size());
    layout.num_classes = num_classes;
    layout.num_vertices = polar.n_vertices;

    BuildResult result{TargetTensor(grid.grid_h(), grid.grid_w(), layout), {}};
    TargetTensor& t = result.targets;
    RewriteReport& report = result.report;
    report.total_labels = labels.size();

    std::vector<int> occupant(t.num_slots(), -1);
    std::vector<int> arrivals(t.num_slots(), 0);
    const int channels = layout.channels_per_anchor();

    for (std::size_t i = 0; i < labels.size(); ++i) {
        const Box& b = labels[i].box;
        const Point c = box_center(b);
        const int gx = static_cast<int>(std::floor(c.x * grid.scale));
        const int gy = static_cast<int>(std::floor(c.y * grid.scale));
        if (gx < 0 || gy < 0 || gx >= t.grid_w || gy >= t.grid_h) {
            throw DataError("build_targets: center of label #" + std::to_string(i) + " lies outside the grid");
        }
        if (b.class_id < 0 || b.class_id >= num_classes) {
            throw DataError("build_targets: class id of label #" + std::to_string(i) + " out of range");
        }
        const int a = match_anchor(b, anchors);

        const std::size_t slot = t.slot_index(gy, gx, a);
        report.colliding_pairs += static_cast<std::size_t>(arrivals[slot]);
        ++arrivals[slot];
        if (occupant[slot] >= 0) {
            RewriteEvent e;
            e.overwritten_label = occupant[slot];
            e.overwriting_label = static_cast<int>(i);
            e.cell_x = gx;
            e.cell_y = gy;
            e.anchor = a;
            report.events.push_back(e);
            ++report.rewritten;
            double* base = &t.at(gy, gx, a, 0);
            std::fill(base, base + channels, 0.0);
        }
        occupant[slot] = static_cast<int>(i);

        t.at(gy, gx, a, TensorLayout::kTx) = c.x * grid.scale - gx;
        t.at(gy, gx, a, TensorLayout::kTy) = c.y * grid.scale - gy;
        t.at(gy, gx, a, TensorLayout::kTw) = std::log(b.width() / anchors.anchors[static_cast<std::size_t>(a)].w);
        t.at(gy, gx, a, TensorLayout::kTh) = std::log(b.height() / anchors.anchors[static_cast<std::size_t>(a)].h);
        t.at(gy, gx, a, TensorLayout::kObj) = 1.0;
        t.at(gy, gx, a, layout.class_channel(b.class_id)) = 1.0;

        if (labels[i].polygon && polar.n_vertices >= 3) {
            const PolarPolygon pp = encode_polygon(*labels[i].polygon, b, polar);
            for (int v = 0; v < polar.n_vertices; ++v) {
                const PolarVertex& cell = pp.cells[static_cast<std::size_t>(v)];
                t.at(gy, gx, a, layout.alpha_channel(v)) = cell.alpha;
                t.at(gy, gx, a, layout.beta_channel(v)) = cell.beta;
                t.at(gy, gx, a, layout.gamma_channel(v)) = cell.gamma;
            }
        }
    }
    report.ratio = report.total_labels == 0
                       ? 0.0
                       : static_cast<double>(report.rewritten) / static_cast<double>(report.total_labels);
    return result;
}

std::vector<Decoded> decode_predictions(const RawPrediction& raw, const GridSpec& grid,
                                        const AnchorSet& anchors, const PolarGridSpec& polar,
                                        double conf_threshold) {
    grid.validate();
    anchors.validate();
    const TensorLayout& L = raw.layout;
    if (raw.grid_h != grid.grid_h() || raw.grid_w != grid.grid_w() ||
        L.num_anchors != static_cast<int>(anchors.anchors.size()) ||
        L.num_classes < 1 || L.num_vertices != polar.n_vertices ||
        raw.data.size() != raw.num_slots() * static_cast<std::size_t>(L.channels_per_anchor())) {
        throw std::invalid_argument("decode_predictions: tensor shape mismatch");
    }

    std::vector<Decoded> out;
    for (int cy = 0; cy < raw.grid_h; ++cy) {
        for (int cx = 0; cx < raw.grid_w; ++cx) {
            for (int a = 0; a < L.num_anchors; ++a) {
                const double obj = sigmoid(raw.at(cy, cx, a, TensorLayout::kObj));
                int best_class = 0;
                double best_prob = -1.0;
                for (int k = 0; k < L.num_classes; ++k) {
                    const double p = sigmoid(raw.at(cy, cx, a, L.class_channel(k)));
                    if (p > best_prob) {
                        best_prob = p;
                        best_class = k;
                    }
                }
                const double score = obj * best_prob;
                if (score < conf_threshold) {
                    continue;
                }
                Decoded d;
                d.box = slot_box(raw, grid, anchors, cy, cx, a);
                d.box.class_id = best_class;
                d.box.score = score;
                d.score = score;
                d.class_id = best_class;

                if (L.num_vertices >= 3) {
                    const double anchor_diag = anchors.anchors[static_cast<std::size_t>(a)].diagonal();
                    const double box_diag = box_diagonal(d.box);
                    PolarPolygon pp;
                    pp.spec = polar;
                    pp.cells.resize(static_cast<std::size_t>(polar.n_vertices));
                    int confident = 0;
                    for (int v = 0; v < L.num_vertices; ++v) {
                        PolarVertex& cell = pp.cells[static_cast<std::size_t>(v)];
                        cell.gamma = sigmoid(raw.at(cy, cx, a, L.gamma_channel(v)));
                        cell.beta = sigmoid(raw.at(cy, cx, a, L.beta_channel(v)));
                        const double dist = anchor_diag * std::exp(raw.at(cy, cx, a, L.alpha_channel(v)));
                        cell.alpha = std::clamp(dist / box_diag, 0.0, 1.0);
                        if (cell.gamma >= 0.5) {
                            ++confident;
                        }
                    }
                    if (confident >= 3) {
                        d.polygon = decode_polygon(pp, d.box, 0.5);
                    }
                }
                out.push_back(std::move(d));
            }
        }
    }
    return out;
}

RawPrediction raw_from_targets(const TargetTensor& target, const GridSpec& grid,
                               const AnchorSet& anchors) {
    grid.validate();
    anchors.validate();
    const TensorLayout& L = target.layout;
    RawPrediction raw(target.grid_h, target.grid_w, L);
    for (int cy = 0; cy < target.grid_h; ++cy) {
        for (int cx = 0; cx < target.grid_w; ++cx) {
            for (int a = 0; a < L.num_anchors; ++a) {
                const bool has_object = target.at(cy, cx, a, TensorLayout::kObj) > 0.5;
                raw.at(cy, cx, a, TensorLayout::kObj) = has_object ? kSaturatedLogit : -kSaturatedLogit;
                for (int k = 0; k < L.num_classes; ++k) {
                    const bool on = has_object && target.at(cy, cx, a, L.class_channel(k)) > 0.5;
                    raw.at(cy, cx, a, L.class_channel(k)) = on ? kSaturatedLogit : -kSaturatedLogit;
                }
                if (!has_object) {
                    continue;
                }
                raw.at(cy, cx, a, TensorLayout::kTx) = clamped_logit(target.at(cy, cx, a, TensorLayout::kTx));
                raw.at(cy, cx, a, TensorLayout::kTy) = clamped_logit(target.at(cy, cx, a, TensorLayout::kTy));
                raw.at(cy, cx, a, TensorLayout::kTw) = target.at(cy, cx, a, TensorLayout::kTw);
                raw.at(cy, cx, a, TensorLayout::kTh) = target.at(cy, cx, a, TensorLayout::kTh);

                const Anchor& anc = anchors.anchors[static_cast<std::size_t>(a)];
                const double w = anc.w * std::exp(target.at(cy, cx, a, TensorLayout::kTw));
                const double h = anc.h * std::exp(target.at(cy, cx, a, TensorLayout::kTh));
                const double box_diag = std::hypot(w, h);
                for (int v = 0; v < L.num_vertices; ++v) {
                    const bool present = target.at(cy, cx, a, L.gamma_channel(v)) > 0.5;
                    raw.at(cy, cx, a, L.gamma_channel(v)) = present ? kSaturatedLogit : -kSaturatedLogit;
                    if (!present) {
                        continue;
                    }
                    const double alpha_rel = target.at(cy, cx, a, L.alpha_channel(v));
                    raw.at(cy, cx, a, L.alpha_channel(v)) = std::log(alpha_rel * box_diag / anc.diagonal());
                    raw.at(cy, cx, a, L.beta_channel(v)) = clamped_logit(target.at(cy, cx, a, L.beta_channel(v)));
                }
            }
        }
    }
    return raw;
}

std::vector<std::uint8_t> compute_ignore_mask(const RawPrediction& raw, const TargetTensor& target,
                                              const GridSpec& grid, const AnchorSet& anchors,
                                              std::span<const Box> labels, double iou_threshold) {
    if (!raw.same_shape(target)) {
        throw std::invalid_argument("compute_ignore_mask: prediction/target shape mismatch");
    }
    std::vector<std::uint8_t> keep(raw.num_slots(), 1);
    for (int cy = 0; cy < raw.grid_h; ++cy) {
        for (int cx = 0; cx < raw.grid_w; ++cx) {
            for (int a = 0; a < raw.layout.num_anchors; ++a) {
                if (target.at(cy, cx, a, TensorLayout::kObj) > 0.5) {
                    continue;
                }
                const Box pred = slot_box(raw, grid, anchors, cy, cx, a);
                for (const Box& label : labels) {
                    if (iou_box(pred, label) > iou_threshold) {
                        keep[raw.slot_index(cy, cx, a)] = 0;
                        break;
                    }
                }
            }
        }
    }
    return keep;
}

}  // namespace polykit
