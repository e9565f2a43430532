#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "evspike/errors.hpp"
#include "evspike/records.hpp"

namespace evspike {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

struct DbscanParams {
    double eps = 5.0;          // Euclidean neighborhood radius, inclusive
    std::int32_t min_pts = 10; // neighborhood size needed for a core point, including the point itself

    void validate() const;  // throws ConfigError
};

inline constexpr std::int32_t kNoise = -1;

// labels[i] is the cluster id of points[i] (0-based) or kNoise. Core points
// of one eps-connected component share an id; border points (non-core within
// eps of a core) carry the lowest candidate cluster id. Ids are assigned in
// lexicographic (x, y, input index) processing order, so the labeling is a
// pure function of the input sequence.
struct ClusterLabeling {
    std::vector<std::int32_t> labels;
    std::vector<char> core;  // core[i] != 0 iff points[i] has >= min_pts neighbors
    std::int32_t cluster_count = 0;
};

// Grid-hash accelerated DBSCAN (cell size = eps, 3x3 cell neighbor probes).
ClusterLabeling dbscan(std::span<const Point2> points, const DbscanParams& params);

// Reference implementation over an explicit pairwise distance matrix plus
// union-find on core points. Same contract and same deterministic labeling as
// dbscan. Capped at 2000 points; beyond that it throws DataError.
ClusterLabeling brute_force_dbscan(std::span<const Point2> points, const DbscanParams& params);

struct ClusterBox {
    BoundingBox box;
    std::int32_t cluster_id = 0;
    std::int64_t size = 0;
};

// Tight axis-aligned boxes of all clusters with at least min_cluster_size
// members, sorted by (x_min, y_min, x_max, y_max). Noise contributes nothing.
std::vector<ClusterBox> cluster_boxes(std::span<const Point2> points,
                                      const ClusterLabeling& labeling,
                                      std::int32_t min_cluster_size);

std::vector<BoundingBox> boxes_from_labeling(std::span<const Point2> points,
                                             const ClusterLabeling& labeling,
                                             std::int32_t min_cluster_size);

}  // namespace evspike
