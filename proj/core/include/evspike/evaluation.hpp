#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "evspike/records.hpp"

namespace evspike {

// Intersection over union with inclusive pixel areas: a box spanning
// x_min..x_max covers (x_max - x_min + 1) columns. Kept deliberately
// explicit because off-by-one here silently skews every downstream metric.
double iou(const BoundingBox& a, const BoundingBox& b);

struct MatchResult {
    struct PerGt {
        double best_iou = 0.0;                  // 0 when nothing overlapped
        std::optional<std::size_t> pred_index;  // prediction consumed by this ground truth
    };
    std::vector<PerGt> gt;                     // one entry per ground-truth box, input order
    std::vector<std::size_t> unmatched_preds;  // prediction indices no ground truth consumed
};

// Greedy one-to-one matching: ground-truth boxes are visited in input order
// and each takes the unconsumed prediction with the highest IoU (ties go to
// the lowest prediction index). Zero-overlap pairs never match.
MatchResult match(std::span<const BoundingBox> predictions, std::span<const BoundingBox> ground_truth);

struct Metrics {
    double mean_iou = 0.0;  // mean best-IoU over all ground-truth boxes
    double precision = 0.0;
    double recall = 0.0;
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
};

struct EvalOptions {
    // When true, false positives are counted only at frames with zero
    // ground-truth boxes; extra unmatched predictions at annotated frames are
    // ignored. When false (default) both kinds count.
    bool strict_paper_fp = false;
};

inline constexpr double kTpIouThreshold = 0.5;

// Frame-aligned evaluation. Detection records are paired to ground-truth
// frames by exact timestamp; records at timestamps absent from the ground
// truth are ignored. A ground-truth frame without a record scores all its
// boxes as misses. tp + fn always equals the total ground-truth box count.
Metrics evaluate(std::span<const DetectionRecord> detections,
                 std::span<const GroundTruthFrame> ground_truth, const EvalOptions& options = {});

}  // namespace evspike
