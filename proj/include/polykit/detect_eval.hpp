// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "polykit/geometry.hpp"

namespace polykit {

struct Detection {
    std::string image_id;
    Box box;
    std::optional<Polygon> polygon;
    double score = 0.0;
    int class_id = 0;
};

struct GtObject {
    Box box;
    std::optional<Polygon> polygon;
    int class_id = 0;
};

/// Ground truth for one image at its native resolution (masks are rasterized
/// at this resolution in mask mode).
struct GtImage {
    int width = 0;
    int height = 0;
    std::vector<GtObject> objects;
};

using GroundTruth = std::map<std::string, GtImage>;

/// Greedy per-(image, class) non-maximum suppression: detections are visited
/// by descending score (ties keep input order) and removed iff their box IoU
/// with an already kept detection exceeds iou_threshold.  Survivors come back
/// ordered by image id, class, then descending score.
std::vector<Detection> nms(std::vector<Detection> dets, double iou_threshold);

enum class EvalMode { Box, Mask };

struct ApTriple {
    double ap = 0.0;    // mean over the evaluated IoU thresholds
    double ap50 = 0.0;  // at threshold 0.50, when evaluated
    double ap75 = 0.0;  // at threshold 0.75, when evaluated
};

struct ClassEval {
    ApTriple summary;
    std::vector<double> ap_per_threshold;
    std::size_t ground_truths = 0;
};

struct EvalResult {
    std::map<int, ClassEval> per_class;  // classes with >= 1 ground truth
    ApTriple mean;                       // unweighted mean over those classes
    std::vector<double> iou_thresholds;
};

inline std::vector<double> coco_iou_thresholds() {
    std::vector<double> t;
    for (int i = 0; i < 10; ++i) {
        t.push_back(0.5 + 0.05 * i);
    }
    return t;
}

/// COCO-style evaluation: detections are matched per class by descending
/// score to the highest-IoU unmatched ground truth above the threshold, the
/// precision envelope is sampled at 101 recall points, and AP averages over
/// the given IoU thresholds.  Mask mode rasterizes polygons at the native
/// image resolution; a ground-truth object without a polygon falls back to
/// its box, a detection without one never matches.
EvalResult evaluate(std::span<const Detection> dets, const GroundTruth& gt, EvalMode mode,
                    std::vector<double> iou_thresholds = coco_iou_thresholds());

}  // namespace polykit
