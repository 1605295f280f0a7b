// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
#include "polykit/loss_eval.hpp"

#include <cmath>
#include <stdexcept>

namespace polykit {

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double bce(double target, double logit) {
    // max(l, 0) - l*t + log(1 + exp(-|l|))
    return std::max(logit, 0.0) - logit * target + std::log1p(std::exp(-std::abs(logit)));
}

namespace {

void check_inputs(const RawPrediction& pred, const TargetTensor& target, const GridSpec& grid,
                  const AnchorSet& anchors, std::span<const std::uint8_t> no_object_mask) {
    grid.validate();
    anchors.validate();
    if (!pred.same_shape(target) || pred.data.size() != target.data.size()) {
        throw std::invalid_argument("loss: prediction/target shape mismatch");
    }
    if (pred.grid_h != grid.grid_h() || pred.grid_w != grid.grid_w() ||
        pred.layout.num_anchors != static_cast<int>(anchors.anchors.size())) {
        throw std::invalid_argument("loss: tensor does not match grid/anchor configuration");
    }
    if (no_object_mask.size() != pred.num_slots()) {
        throw std::invalid_argument("loss: ignore mask size mismatch");
    }
}

// Evaluates the loss and, when grad is non-null, accumulates the analytic
// derivative of every term into it.
LossBreakdown evaluate(const RawPrediction& pred, const TargetTensor& target,
                       const GridSpec& grid, const AnchorSet& anchors,
                       std::span<const std::uint8_t> no_object_mask, RawPrediction* grad,
                       std::vector<LossBreakdown>* per_slot) {
    check_inputs(pred, target, grid, anchors, no_object_mask);
    const TensorLayout& L = pred.layout;
    LossBreakdown out;
    if (per_slot) {
        per_slot->assign(pred.num_slots(), LossBreakdown{});
    }

    for (int cy = 0; cy < pred.grid_h; ++cy) {
        for (int cx = 0; cx < pred.grid_w; ++cx) {
            for (int a = 0; a < L.num_anchors; ++a) {
                LossBreakdown slot;
                const double q = target.at(cy, cx, a, TensorLayout::kObj);
                const Anchor& anc = anchors.anchors[static_cast<std::size_t>(a)];

                // l3: objectness, both branches.
                {
                    const double logit = pred.at(cy, cx, a, TensorLayout::kObj);
                    const double keep = no_object_mask[pred.slot_index(cy, cx, a)] ? 1.0 : 0.0;
                    slot.l3 += q * bce(q, logit) + (1.0 - q) * bce(q, logit) * keep;
                    if (grad) {
                        const double d = sigmoid(logit) - q;
                        grad->at(cy, cx, a, TensorLayout::kObj) += q * d + (1.0 - q) * d * keep;
                    }
                }
                // l4: class BCE on every slot (zero one-hot where q == 0).
                for (int k = 0; k < L.num_classes; ++k) {
                    const double t = target.at(cy, cx, a, L.class_channel(k));
                    const double logit = pred.at(cy, cx, a, L.class_channel(k));
                    slot.l4 += bce(t, logit);
                    if (grad) {
                        grad->at(cy, cx, a, L.class_channel(k)) += sigmoid(logit) - t;
                    }
                }
                if (q <= 0.0) {
                    slot.total = slot.l3 + slot.l4;
                    out.l3 += slot.l3;
                    out.l4 += slot.l4;
                    if (per_slot) {
                        (*per_slot)[pred.slot_index(cy, cx, a)] = slot;
                    }
                    continue;
                }

                // Box size recovered from the target's log offsets; constants
                // with respect to the prediction.
                const double w = anc.w * std::exp(target.at(cy, cx, a, TensorLayout::kTw));
                const double h = anc.h * std::exp(target.at(cy, cx, a, TensorLayout::kTh));
                const double z = 2.0 - (w / grid.input_w) * (h / grid.input_h);

                // l1: center offsets.
                for (int ch : {TensorLayout::kTx, TensorLayout::kTy}) {
                    const double t = target.at(cy, cx, a, ch);
                    const double logit = pred.at(cy, cx, a, ch);
                    slot.l1 += q * z * bce(t, logit);
                    if (grad) {
                        grad->at(cy, cx, a, ch) += q * z * (sigmoid(logit) - t);
                    }
                }
                // l2: log-size offsets.
                for (int ch : {TensorLayout::kTw, TensorLayout::kTh}) {
                    const double t = target.at(cy, cx, a, ch);
                    const double p = pred.at(cy, cx, a, ch);
                    slot.l2 += q * 0.5 * z * (t - p) * (t - p);
                    if (grad) {
                        grad->at(cy, cx, a, ch) += q * z * (p - t);
                    }
                }
                // l5: polygon distance/angle gated by the vertex confidence
                // target; the confidence term itself is ungated.
                if (L.num_vertices > 0) {
                    const double box_diag = std::hypot(w, h);
                    const double anchor_diag = anc.diagonal();
                    for (int v = 0; v < L.num_vertices; ++v) {
                        const double gamma = target.at(cy, cx, a, L.gamma_channel(v));
                        const double gamma_logit = pred.at(cy, cx, a, L.gamma_channel(v));
                        slot.l5 += q * 0.2 * z * bce(gamma, gamma_logit);
                        if (grad) {
                            grad->at(cy, cx, a, L.gamma_channel(v)) +=
                                q * 0.2 * z * (sigmoid(gamma_logit) - gamma);
                        }
                        if (gamma <= 0.0) {
                            continue;
                        }
                        const double alpha_rel = target.at(cy, cx, a, L.alpha_channel(v));
                        const double t_alpha = std::log(alpha_rel * box_diag / anchor_diag);
                        const double p_alpha = pred.at(cy, cx, a, L.alpha_channel(v));
                        slot.l5 += q * 0.2 * z * gamma * (t_alpha - p_alpha) * (t_alpha - p_alpha);
                        const double beta = target.at(cy, cx, a, L.beta_channel(v));
                        const double beta_logit = pred.at(cy, cx, a, L.beta_channel(v));
                        slot.l5 += q * 0.2 * z * gamma * bce(beta, beta_logit);
                        if (grad) {
                            grad->at(cy, cx, a, L.alpha_channel(v)) +=
                                q * 0.2 * z * gamma * 2.0 * (p_alpha - t_alpha);
                            grad->at(cy, cx, a, L.beta_channel(v)) +=
                                q * 0.2 * z * gamma * (sigmoid(beta_logit) - beta);
                        }
                    }
                }
                slot.total = slot.l1 + slot.l2 + slot.l3 + slot.l4 + slot.l5;
                out.l1 += slot.l1;
                out.l2 += slot.l2;
                out.l3 += slot.l3;
                out.l4 += slot.l4;
                out.l5 += slot.l5;
                if (per_slot) {
                    (*per_slot)[pred.slot_index(cy, cx, a)] = slot;
                }
            }
        }
    }
    out.total = out.l1 + out.l2 + out.l3 + out.l4 + out.l5;
    return out;
}

}  // namespace

LossBreakdown loss_total(const RawPrediction& pred, const TargetTensor& target,
                         const GridSpec& grid, const AnchorSet& anchors,
                         std::span<const std::uint8_t> no_object_mask,
                         std::vector<LossBreakdown>* per_slot) {
    return evaluate(pred, target, grid, anchors, no_object_mask, nullptr, per_slot);
}

RawPrediction loss_gradient(const RawPrediction& pred, const TargetTensor& target,
                            const GridSpec& grid, const AnchorSet& anchors,
                            std::span<const std::uint8_t> no_object_mask) {
    RawPrediction grad(pred.grid_h, pred.grid_w, pred.layout);
    evaluate(pred, target, grid, anchors, no_object_mask, &grad, nullptr);
    return grad;
}

}  // namespace polykit
