#include "evspike/evaluation.hpp"

#include <algorithm>
#include <unordered_map>
#include <vector>

namespace evspike {

double iou(const BoundingBox& a, const BoundingBox& b) {
    const std::int32_t ix_min = std::max(a.x_min, b.x_min);
    const std::int32_t iy_min = std::max(a.y_min, b.y_min);
    const std::int32_t ix_max = std::min(a.x_max, b.x_max);
    const std::int32_t iy_max = std::min(a.y_max, b.y_max);
    if (ix_min > ix_max || iy_min > iy_max) return 0.0;
    const std::int64_t inter = (static_cast<std::int64_t>(ix_max) - ix_min + 1) *
                               (static_cast<std::int64_t>(iy_max) - iy_min + 1);
    const std::int64_t uni = a.area() + b.area() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

MatchResult match(std::span<const BoundingBox> predictions,
                  std::span<const BoundingBox> ground_truth) {
    MatchResult result;
    result.gt.resize(ground_truth.size());
    std::vector<bool> consumed(predictions.size(), false);
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
        double best = 0.0;
        std::size_t best_p = 0;
        bool found = false;
        for (std::size_t p = 0; p < predictions.size(); ++p) {
            if (consumed[p]) continue;
            const double v = iou(predictions[p], ground_truth[g]);
            if (v <= 0.0) continue;
            if (!found || v > best) {  // ties keep the lowest prediction index
                best = v;
                best_p = p;
                found = true;
            }
        }
        if (found) {
            consumed[best_p] = true;
            result.gt[g] = {best, best_p};
        }
    }
    for (std::size_t p = 0; p < predictions.size(); ++p) {
        if (!consumed[p]) result.unmatched_preds.push_back(p);
    }
    return result;
}

Metrics evaluate(std::span<const DetectionRecord> detections,
                 std::span<const GroundTruthFrame> ground_truth, const EvalOptions& options) {
    // Records are paired by exact timestamp; the first record at a timestamp
    // wins if a file carries duplicates.
    std::unordered_map<std::int64_t, const DetectionRecord*> by_time;
    by_time.reserve(detections.size());
    for (const DetectionRecord& rec : detections) {
        by_time.try_emplace(rec.t_us, &rec);
    }

    Metrics m;
    double iou_sum = 0.0;
    std::int64_t total_gt = 0;
    std::vector<BoundingBox> preds;
    std::vector<BoundingBox> gts;
    for (const GroundTruthFrame& frame : ground_truth) {
        preds.clear();
        gts.clear();
        auto it = by_time.find(frame.t_us);
        if (it != by_time.end()) {
            for (const DetectionBox& db : it->second->boxes) preds.push_back(db.box);
        }
        for (const GroundTruthBox& gb : frame.boxes) gts.push_back(gb.box);
        total_gt += static_cast<std::int64_t>(gts.size());

        const MatchResult mr = match(preds, gts);
        for (const auto& per_gt : mr.gt) {
            iou_sum += per_gt.best_iou;
            if (per_gt.pred_index.has_value() && per_gt.best_iou >= kTpIouThreshold) {
                ++m.tp;
            } else {
                ++m.fn;
            }
        }
        if (options.strict_paper_fp) {
            if (gts.empty()) m.fp += static_cast<std::int64_t>(mr.unmatched_preds.size());
        } else {
            m.fp += static_cast<std::int64_t>(mr.unmatched_preds.size());
        }
    }
    m.mean_iou = total_gt > 0 ? iou_sum / static_cast<double>(total_gt) : 0.0;
    m.precision = (m.tp + m.fp) > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
    m.recall = (m.tp + m.fn) > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
    return m;
}

}  // namespace evspike
