// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "polykit/label_grid.hpp"

namespace polykit {

/// One training-box size (width, height) in pixels.
struct SizeSample {
    double w = 0.0;
    double h = 0.0;
};

struct KMeansResult {
    std::vector<Anchor> centroids;          // sorted by area ascending
    std::vector<int> assignments;           // sample -> centroid index
    std::vector<Anchor> initial_centroids;  // the seeded starting point
    std::vector<double> mean_iou_history;   // mean IoU after every assignment step
    double mean_iou = 0.0;
    int iterations = 0;
};

/// Lloyd k-means over box sizes with distance 1 - IoU of co-centered boxes.
/// The centroid update is the per-cluster arithmetic mean of (w, h), guarded:
/// a cluster keeps its previous centroid when the mean would lower the
/// cluster's summed IoU, which makes the per-iteration mean IoU
/// non-decreasing.  Seeding is k-means++ style driven by a generator seeded
/// with `seed`, so runs are reproducible.  An emptied cluster is re-seeded
/// from the sample farthest from its assigned centroid.  k larger than the
/// number of distinct sample sizes raises DataError.
KMeansResult kmeans_iou(std::span<const SizeSample> samples, int k, std::uint64_t seed,
                        int max_iter = 300);

/// Counts samples per output scale: each sample goes to the scale owning its
/// best-IoU anchor.  The anchor set must carry a partition covering all
/// anchors.
std::vector<std::size_t> scale_histogram(std::span<const SizeSample> samples,
                                         const AnchorSet& anchors);

/// One audit configuration for anchor_report.
struct AnchorReportConfig {
    std::string name;
    int input_w = 0;
    int input_h = 0;
    std::vector<double> scales;    // one entry for a shared output, three for YOLOv3 style
    bool per_scale = false;        // partition anchors into equal chunks across scales
};

/// One annotated scene at its native resolution.
struct Scene {
    int width = 0;
    int height = 0;
    std::vector<Box> boxes;
};

/// For every configuration: rescales all boxes to the configured input size,
/// estimates k anchors with kmeans_iou, audits label rewriting and, for
/// partitioned configs, the per-scale sample distribution.  Returns CSV text,
/// one row per configuration.  Empty input raises DataError.
std::string anchor_report(std::span<const Scene> scenes, int k, std::uint64_t seed,
                          std::span<const AnchorReportConfig> configs);

}  // namespace polykit
