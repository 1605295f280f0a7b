// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
#include "polykit/detect_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace polykit {

namespace {

Polygon box_polygon(const Box& b) {
    return {{{b.x1, b.y1}, {b.x2, b.y1}, {b.x2, b.y2}, {b.x1, b.y2}}};
}

struct MatchKey {
    std::string image_id;
    int class_id;

    bool operator<(const MatchKey& o) const {
        return image_id != o.image_id ? image_id < o.image_id : class_id < o.class_id;
    }
};

}  // namespace

std::vector<Detection> nms(std::vector<Detection> dets, double iou_threshold) {
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

    std::map<MatchKey, std::vector<std::size_t>> kept_by_group;
    std::vector<std::size_t> kept;
    for (std::size_t idx : order) {
        const Detection& d = dets[idx];
        auto& group = kept_by_group[{d.image_id, d.class_id}];
        bool suppressed = false;
        for (std::size_t k : group) {
            if (iou_box(d.box, dets[k].box) > iou_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) {
            group.push_back(idx);
            kept.push_back(idx);
        }
    }
    std::stable_sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) {
        const MatchKey ka{dets[a].image_id, dets[a].class_id};
        const MatchKey kb{dets[b].image_id, dets[b].class_id};
        if (ka < kb) return true;
        if (kb < ka) return false;
        return dets[a].score > dets[b].score;
    });
    std::vector<Detection> out;
    out.reserve(kept.size());
    for (std::size_t idx : kept) {
        out.push_back(std::move(dets[idx]));
    }
    return out;
}

EvalResult evaluate(std::span<const Detection> dets, const GroundTruth& gt, EvalMode mode,
                    std::vector<double> iou_thresholds) {
    if (iou_thresholds.empty()) {
        throw std::invalid_argument("evaluate: no IoU thresholds given");
    }
    for (const Detection& d : dets) {
        if (!gt.contains(d.image_id)) {
            throw DataError("evaluate: detection references unknown image '" + d.image_id + "'");
        }
        if (d.score < 0.0 || d.score > 1.0) {
            throw DataError("evaluate: detection score outside [0, 1]");
        }
    }

    std::set<int> classes;
    for (const auto& [id, image] : gt) {
        for (const GtObject& o : image.objects) {
            classes.insert(o.class_id);
        }
    }

    // IoU between one detection and one ground-truth object.
    auto pair_iou = [&](const Detection& d, const GtObject& o, const GtImage& image) {
        if (mode == EvalMode::Box) {
            return iou_box(d.box, o.box);
        }
        if (!d.polygon) {
            return 0.0;
        }
        const Polygon& gt_poly = o.polygon ? *o.polygon : box_polygon(o.box);
        const Mask md = rasterize_polygon(*d.polygon, image.width, image.height);
        const Mask mg = rasterize_polygon(gt_poly, image.width, image.height);
        if (md.popcount() == 0 || mg.popcount() == 0) {
            return 0.0;
        }
        return mask_iou(md, mg);
    };

    EvalResult result;
    result.iou_thresholds = iou_thresholds;
    const std::size_t num_thr = iou_thresholds.size();

    for (int cls : classes) {
        // Detections of this class, by descending score (stable).
        std::vector<std::size_t> det_order;
        for (std::size_t i = 0; i < dets.size(); ++i) {
            if (dets[i].class_id == cls) {
                det_order.push_back(i);
            }
        }
        std::stable_sort(det_order.begin(), det_order.end(),
                         [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

        // Ground-truth objects of this class, keyed by image.
        std::map<std::string, std::vector<const GtObject*>> gt_of;
        std::size_t npig = 0;
        for (const auto& [id, image] : gt) {
            for (const GtObject& o : image.objects) {
                if (o.class_id == cls) {
                    gt_of[id].push_back(&o);
                    ++npig;
                }
            }
        }

        // Cached IoUs per detection against its image's ground truths.
        std::vector<std::vector<double>> ious(det_order.size());
        for (std::size_t di = 0; di < det_order.size(); ++di) {
            const Detection& d = dets[det_order[di]];
            const auto it = gt_of.find(d.image_id);
            if (it == gt_of.end()) {
                continue;
            }
            const GtImage& image = gt.at(d.image_id);
            ious[di].reserve(it->second.size());
            for (const GtObject* o : it->second) {
                ious[di].push_back(pair_iou(d, *o, image));
            }
        }

        ClassEval ce;
        ce.ground_truths = npig;
        ce.ap_per_threshold.resize(num_thr, 0.0);
        for (std::size_t ti = 0; ti < num_thr; ++ti) {
            const double thr = iou_thresholds[ti];
            std::map<std::string, std::vector<bool>> used;
            std::vector<int> is_tp(det_order.size(), 0);
            for (std::size_t di = 0; di < det_order.size(); ++di) {
                const Detection& d = dets[det_order[di]];
                const auto it = gt_of.find(d.image_id);
                if (it == gt_of.end()) {
                    continue;
                }
                auto& used_flags = used[d.image_id];
                used_flags.resize(it->second.size(), false);
                std::size_t best = it->second.size();
                double best_iou = -1.0;
                for (std::size_t gi = 0; gi < it->second.size(); ++gi) {
                    if (used_flags[gi]) {
                        continue;
                    }
                    const double iou = ious[di][gi];
                    if (iou >= thr && iou > best_iou) {
                        best_iou = iou;
                        best = gi;
                    }
                }
                if (best < it->second.size()) {
                    used_flags[best] = true;
                    is_tp[di] = 1;
                }
            }

            // 101-point interpolated AP from the cumulated PR points.
            double ap = 0.0;
            if (npig > 0) {
                std::vector<double> recall(det_order.size());
                std::vector<double> precision(det_order.size());
                std::size_t tp = 0;
                for (std::size_t di = 0; di < det_order.size(); ++di) {
                    tp += static_cast<std::size_t>(is_tp[di]);
                    recall[di] = static_cast<double>(tp) / static_cast<double>(npig);
                    precision[di] = static_cast<double>(tp) / static_cast<double>(di + 1);
                }
                for (std::size_t di = precision.size(); di-- > 1;) {
                    precision[di - 1] = std::max(precision[di - 1], precision[di]);
                }
                for (int ri = 0; ri <= 100; ++ri) {
                    const double r = 0.01 * ri;
                    const auto pos = std::lower_bound(recall.begin(), recall.end(), r);
                    if (pos != recall.end()) {
                        ap += precision[static_cast<std::size_t>(pos - recall.begin())];
                    }
                }
                ap /= 101.0;
            }
            ce.ap_per_threshold[ti] = ap;
        }

        ce.summary.ap = std::accumulate(ce.ap_per_threshold.begin(), ce.ap_per_threshold.end(), 0.0) /
                        static_cast<double>(num_thr);
        for (std::size_t ti = 0; ti < num_thr; ++ti) {
            if (std::abs(iou_thresholds[ti] - 0.50) < 1e-9) {
                ce.summary.ap50 = ce.ap_per_threshold[ti];
            }
            if (std::abs(iou_thresholds[ti] - 0.75) < 1e-9) {
                ce.summary.ap75 = ce.ap_per_threshold[ti];
            }
        }
        result.per_class[cls] = std::move(ce);
    }

    if (!result.per_class.empty()) {
        for (const auto& [cls, ce] : result.per_class) {
            result.mean.ap += ce.summary.ap;
            result.mean.ap50 += ce.summary.ap50;
            result.mean.ap75 += ce.summary.ap75;
        }
        const double n = static_cast<double>(result.per_class.size());
        result.mean.ap /= n;
        result.mean.ap50 /= n;
        result.mean.ap75 /= n;
    }
    return result;
}

}  // namespace polykit
