// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "polykit/label_grid.hpp"

namespace polykit {

/// Loss split by part.  total is the sum over all slots of
/// q * (l1 + l2 + l5) + l3 + l4, i.e. the multi-part detection loss with the
/// confidence term's no-object branch active on every slot and the class term
/// evaluated outside the objectness gate.
struct LossBreakdown {
    double l1 = 0.0;  // box-center BCE, weighted by z = 2 - w*h (normalized sizes)
    double l2 = 0.0;  // box-size squared log-offset error, coefficient 0.5 z
    double l3 = 0.0;  // objectness BCE; no-object branch masked by the ignore mask
    double l4 = 0.0;  // per-class BCE over every slot
    double l5 = 0.0;  // polygon loss, coefficient 0.2 z: gated distance + angle, ungated confidence
    double total = 0.0;
};

double sigmoid(double x);

/// Numerically stable binary cross-entropy between a target in [0, 1] and a
/// prediction given as a logit.  Never NaN for finite input.
double bce(double target, double logit);

/// Evaluates the multi-part loss.  `pred` holds raw pre-activation values
/// laid out like `target`; `no_object_mask` comes from compute_ignore_mask
/// (1 = slot contributes to the no-object confidence loss).  When `per_slot`
/// is non-null it receives one breakdown per slot, indexed like
/// SlotTensor::slot_index; the per-slot totals sum to the returned total.
LossBreakdown loss_total(const RawPrediction& pred, const TargetTensor& target,
                         const GridSpec& grid, const AnchorSet& anchors,
                         std::span<const std::uint8_t> no_object_mask,
                         std::vector<LossBreakdown>* per_slot = nullptr);

/// Analytic partial derivatives of loss_total().total with respect to every
/// entry of `pred`, same shape as `pred`.
RawPrediction loss_gradient(const RawPrediction& pred, const TargetTensor& target,
                            const GridSpec& grid, const AnchorSet& anchors,
                            std::span<const std::uint8_t> no_object_mask);

}  // namespace polykit
