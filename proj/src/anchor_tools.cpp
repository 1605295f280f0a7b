// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
#include "polykit/anchor_tools.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace polykit {

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double sample_iou(const SizeSample& s, const Anchor& a) {
    return co_centered_iou(s.w, s.h, a.w, a.h);
}

int best_anchor_for_size(const SizeSample& s, std::span<const Anchor> anchors) {
    int best = 0;
    double best_iou = -1.0;
    for (std::size_t j = 0; j < anchors.size(); ++j) {
        const double iou = sample_iou(s, anchors[j]);
        if (iou > best_iou) {
            best_iou = iou;
            best = static_cast<int>(j);
        }
    }
    return best;
}

std::vector<Anchor> seed_centroids(std::span<const SizeSample> samples, int k,
                                   std::mt19937_64& rng) {
    std::vector<Anchor> centroids;
    centroids.reserve(static_cast<std::size_t>(k));
    const std::size_t first = static_cast<std::size_t>(rng() % samples.size());
    centroids.push_back({samples[first].w, samples[first].h});
    std::vector<double> dist(samples.size());
    while (centroids.size() < static_cast<std::size_t>(k)) {
        double total = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            double d = 1.0;
            for (const Anchor& c : centroids) {
                d = std::min(d, 1.0 - sample_iou(samples[i], c));
            }
            dist[i] = d * d;
            total += dist[i];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            const double r = uniform01(rng) * total;
            double acc = 0.0;
            pick = samples.size() - 1;
            for (std::size_t i = 0; i < samples.size(); ++i) {
                acc += dist[i];
                if (acc > r) {
                    pick = i;
                    break;
                }
            }
        }
        centroids.push_back({samples[pick].w, samples[pick].h});
    }
    return centroids;
}

}  // namespace

KMeansResult kmeans_iou(std::span<const SizeSample> samples, int k, std::uint64_t seed,
                        int max_iter) {
    if (samples.empty()) {
        throw DataError("kmeans_iou: empty sample set");
    }
    if (k < 1) {
        throw std::invalid_argument("kmeans_iou: k must be >= 1");
    }
    for (const SizeSample& s : samples) {
        if (!(s.w > 0.0) || !(s.h > 0.0)) {
            throw DataError("kmeans_iou: sample sizes must be positive");
        }
    }
    std::set<std::pair<double, double>> distinct;
    for (const SizeSample& s : samples) {
        distinct.insert({s.w, s.h});
    }
    if (static_cast<std::size_t>(k) > distinct.size()) {
        throw DataError("kmeans_iou: k exceeds the number of distinct sample sizes");
    }

    std::mt19937_64 rng(seed);
    KMeansResult result;
    std::vector<Anchor> centroids = seed_centroids(samples, k, rng);
    result.initial_centroids = centroids;

    std::vector<int> assignments(samples.size(), -1);
    std::vector<int> prev(samples.size(), -2);
    int iterations = 0;
    for (int it = 0; it < max_iter; ++it) {
        ++iterations;
        double iou_sum = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            assignments[i] = best_anchor_for_size(samples[i], centroids);
            iou_sum += sample_iou(samples[i], centroids[static_cast<std::size_t>(assignments[i])]);
        }
        result.mean_iou_history.push_back(iou_sum / static_cast<double>(samples.size()));
        if (assignments == prev) {
            break;
        }
        prev = assignments;

        std::vector<double> sum_w(static_cast<std::size_t>(k), 0.0);
        std::vector<double> sum_h(static_cast<std::size_t>(k), 0.0);
        std::vector<std::size_t> count(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto c = static_cast<std::size_t>(assignments[i]);
            sum_w[c] += samples[i].w;
            sum_h[c] += samples[i].h;
            ++count[c];
        }
        std::vector<std::size_t> reseeded;
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            if (count[c] == 0) {
                // Deterministic re-seed: the sample farthest from its centroid,
                // skipping samples already consumed this round.
                std::size_t far_idx = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < samples.size(); ++i) {
                    if (std::find(reseeded.begin(), reseeded.end(), i) != reseeded.end()) {
                        continue;
                    }
                    const double d =
                        1.0 - sample_iou(samples[i], centroids[static_cast<std::size_t>(assignments[i])]);
                    if (d > far_d) {
                        far_d = d;
                        far_idx = i;
                    }
                }
                centroids[c] = {samples[far_idx].w, samples[far_idx].h};
                reseeded.push_back(far_idx);
            } else {
                // Guarded mean update: the member mean is only adopted when it
                // does not lower the cluster's summed IoU.  The guard keeps the
                // mean IoU non-decreasing across iterations, which the plain
                // mean cannot promise under the IoU distance.
                const Anchor candidate{sum_w[c] / static_cast<double>(count[c]),
                                       sum_h[c] / static_cast<double>(count[c])};
                double gain = 0.0;
                for (std::size_t i = 0; i < samples.size(); ++i) {
                    if (static_cast<std::size_t>(assignments[i]) == c) {
                        gain += sample_iou(samples[i], candidate) - sample_iou(samples[i], centroids[c]);
                    }
                }
                if (gain >= 0.0) {
                    centroids[c] = candidate;
                }
            }
        }
    }

    // Present centroids sorted by area ascending, remapping assignments.
    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const double aa = centroids[static_cast<std::size_t>(a)].w * centroids[static_cast<std::size_t>(a)].h;
        const double ab = centroids[static_cast<std::size_t>(b)].w * centroids[static_cast<std::size_t>(b)].h;
        return aa < ab;
    });
    std::vector<int> rank(static_cast<std::size_t>(k));
    result.centroids.resize(static_cast<std::size_t>(k));
    for (int r = 0; r < k; ++r) {
        rank[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r;
        result.centroids[static_cast<std::size_t>(r)] = centroids[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
    }
    result.assignments.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        result.assignments[i] = rank[static_cast<std::size_t>(assignments[i])];
    }
    result.mean_iou = result.mean_iou_history.back();
    result.iterations = iterations;
    return result;
}

std::vector<std::size_t> scale_histogram(std::span<const SizeSample> samples,
                                         const AnchorSet& anchors) {
    anchors.validate();
    if (!anchors.has_partition()) {
        throw std::invalid_argument("scale_histogram: anchor set carries no per-scale partition");
    }
    const int num_scales = *std::max_element(anchors.scale_of_anchor.begin(), anchors.scale_of_anchor.end()) + 1;
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_scales), 0);
    for (const SizeSample& s : samples) {
        const int a = best_anchor_for_size(s, anchors.anchors);
        ++counts[static_cast<std::size_t>(anchors.scale_of_anchor[static_cast<std::size_t>(a)])];
    }
    return counts;
}

std::string anchor_report(std::span<const Scene> scenes, int k, std::uint64_t seed,
                          std::span<const AnchorReportConfig> configs) {
    std::size_t total_boxes = 0;
    for (const Scene& sc : scenes) {
        total_boxes += sc.boxes.size();
    }
    if (total_boxes == 0) {
        throw DataError("anchor_report: no boxes in input scenes");
    }

    std::ostringstream csv;
    csv << "config,input_w,input_h,scales,k,mean_iou,total_labels,rewritten,rewrite_ratio,scale_counts\n";
    for (const AnchorReportConfig& cfg : configs) {
        // Rescale every scene to the audit resolution of this configuration.
        std::vector<Scene> scaled(scenes.begin(), scenes.end());
        std::vector<SizeSample> sizes;
        sizes.reserve(total_boxes);
        for (Scene& sc : scaled) {
            if (sc.width <= 0 || sc.height <= 0) {
                throw DataError("anchor_report: scene with non-positive dimensions");
            }
            const double fx = static_cast<double>(cfg.input_w) / sc.width;
            const double fy = static_cast<double>(cfg.input_h) / sc.height;
            for (Box& b : sc.boxes) {
                b.x1 *= fx;
                b.x2 *= fx;
                b.y1 *= fy;
                b.y2 *= fy;
                sizes.push_back({b.width(), b.height()});
            }
        }
        const KMeansResult km = kmeans_iou(sizes, k, seed);

        AnchorSet anchors;
        anchors.anchors = km.centroids;
        std::vector<GridSpec> grids;
        for (double s : cfg.scales) {
            grids.push_back({cfg.input_w, cfg.input_h, s});
        }
        if (cfg.per_scale) {
            if (k % static_cast<int>(cfg.scales.size()) != 0) {
                throw DataError("anchor_report: anchor count must divide evenly across scales");
            }
            // Finest grid (largest s) takes the smallest anchors; centroids are
            // already sorted by area ascending.
            std::vector<int> scale_order(cfg.scales.size());
            std::iota(scale_order.begin(), scale_order.end(), 0);
            std::stable_sort(scale_order.begin(), scale_order.end(),
                             [&](int a, int b) { return cfg.scales[static_cast<std::size_t>(a)] > cfg.scales[static_cast<std::size_t>(b)]; });
            const int per = k / static_cast<int>(cfg.scales.size());
            anchors.scale_of_anchor.resize(static_cast<std::size_t>(k));
            for (int j = 0; j < k; ++j) {
                anchors.scale_of_anchor[static_cast<std::size_t>(j)] = scale_order[static_cast<std::size_t>(j / per)];
            }
        }

        std::size_t total = 0;
        std::size_t rewritten = 0;
        for (const Scene& sc : scaled) {
            const RewriteReport r = count_rewrites(sc.boxes, grids, anchors);
            total += r.total_labels;
            rewritten += r.rewritten;
        }
        const double ratio = total == 0 ? 0.0 : static_cast<double>(rewritten) / static_cast<double>(total);

        csv << cfg.name << ',' << cfg.input_w << ',' << cfg.input_h << ',';
        for (std::size_t i = 0; i < cfg.scales.size(); ++i) {
            csv << (i ? ";" : "") << cfg.scales[i];
        }
        csv << ',' << k << ',' << km.mean_iou << ',' << total << ',' << rewritten << ',' << ratio << ',';
        if (cfg.per_scale) {
            const auto hist = scale_histogram(sizes, anchors);
            for (std::size_t i = 0; i < hist.size(); ++i) {
                csv << (i ? ";" : "") << hist[i];
            }
        } else {
            csv << "-";
        }
        csv << '\n';
    }
    return csv.str();
}

}  // namespace polykit
