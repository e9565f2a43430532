#include "evspike/dbscan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace evspike {

namespace {

// Both implementations must share this exact predicate, or their labelings
// could disagree on points sitting exactly on the radius.
inline bool within(const Point2& a, const Point2& b, double eps2) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy <= eps2;
}

std::vector<std::uint32_t> processing_order(std::span<const Point2> points) {
    std::vector<std::uint32_t> order(points.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (points[a].x != points[b].x) return points[a].x < points[b].x;
        if (points[a].y != points[b].y) return points[a].y < points[b].y;
        return a < b;
    });
    return order;
}

constexpr std::int32_t kUnlabeled = -2;

struct CellGrid {
    double cell;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells;

    static std::uint64_t key(std::int64_t cx, std::int64_t cy) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cx)) << 32) |
               static_cast<std::uint64_t>(static_cast<std::uint32_t>(cy));
    }

    std::int64_t coord(double v) const { return static_cast<std::int64_t>(std::floor(v / cell)); }

    void build(std::span<const Point2> points) {
        cells.reserve(points.size());
        for (std::uint32_t i = 0; i < points.size(); ++i) {
            cells[key(coord(points[i].x), coord(points[i].y))].push_back(i);
        }
    }

    // All point indices within eps of points[i], including i itself.
    void query(std::span<const Point2> points, std::uint32_t i, double eps2,
               std::vector<std::uint32_t>& out) const {
        out.clear();
        const std::int64_t cx = coord(points[i].x);
        const std::int64_t cy = coord(points[i].y);
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
            for (std::int64_t dx = -1; dx <= 1; ++dx) {
                auto it = cells.find(key(cx + dx, cy + dy));
                if (it == cells.end()) continue;
                for (std::uint32_t j : it->second) {
                    if (within(points[i], points[j], eps2)) out.push_back(j);
                }
            }
        }
    }
};

struct UnionFind {
    std::vector<std::uint32_t> parent;

    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }

    std::uint32_t find(std::uint32_t a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }

    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[b] = a;
    }
};

}  // namespace

void DbscanParams::validate() const {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        std::ostringstream msg;
        msg << "dbscan eps must be positive and finite, got " << eps;
        throw ConfigError(msg.str());
    }
    if (min_pts < 1) {
        std::ostringstream msg;
        msg << "dbscan min_pts must be at least 1, got " << min_pts;
        throw ConfigError(msg.str());
    }
}

ClusterLabeling dbscan(std::span<const Point2> points, const DbscanParams& params) {
    params.validate();
    const std::size_t n = points.size();
    ClusterLabeling result;
    result.labels.assign(n, kUnlabeled);
    result.core.assign(n, 0);
    if (n == 0) return result;

    const double eps2 = params.eps * params.eps;
    CellGrid grid{params.eps, {}};
    grid.build(points);

    auto& labels = result.labels;
    std::int32_t next_cluster = 0;
    std::vector<std::uint32_t> neighbors;
    std::vector<std::uint32_t> sub;
    std::vector<std::uint32_t> seeds;

    for (std::uint32_t i : processing_order(points)) {
        if (labels[i] != kUnlabeled) continue;
        grid.query(points, i, eps2, neighbors);
        if (neighbors.size() < static_cast<std::size_t>(params.min_pts)) {
            labels[i] = kNoise;
            continue;
        }
        result.core[i] = 1;
        const std::int32_t cid = next_cluster++;
        labels[i] = cid;
        seeds.assign(neighbors.begin(), neighbors.end());
        for (std::size_t k = 0; k < seeds.size(); ++k) {
            const std::uint32_t q = seeds[k];
            if (labels[q] == kNoise) labels[q] = cid;  // border point, claimed once
            if (labels[q] != kUnlabeled) continue;
            labels[q] = cid;
            grid.query(points, q, eps2, sub);
            if (sub.size() >= static_cast<std::size_t>(params.min_pts)) {
                result.core[q] = 1;
                seeds.insert(seeds.end(), sub.begin(), sub.end());
            }
        }
    }
    result.cluster_count = next_cluster;
    return result;
}

ClusterLabeling brute_force_dbscan(std::span<const Point2> points, const DbscanParams& params) {
    params.validate();
    const std::size_t n = points.size();
    if (n > 2000) {
        std::ostringstream msg;
        msg << "brute-force reference is capped at 2000 points, got " << n;
        throw DataError(msg.str());
    }
    ClusterLabeling result;
    result.labels.assign(n, kNoise);
    result.core.assign(n, 0);
    if (n == 0) return result;

    const double eps2 = params.eps * params.eps;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t count = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (within(points[i], points[j], eps2)) ++count;
        }
        result.core[i] = count >= static_cast<std::size_t>(params.min_pts) ? 1 : 0;
    }

    UnionFind uf(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!result.core[i]) continue;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (result.core[j] && within(points[i], points[j], eps2)) {
                uf.unite(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
            }
        }
    }

    // Components take ids in the order their first core point appears in the
    // processing order; that is exactly the order sequential expansion would
    // create them.
    const auto order = processing_order(points);
    std::vector<std::uint32_t> pos(n);
    for (std::uint32_t p = 0; p < order.size(); ++p) pos[order[p]] = p;

    std::unordered_map<std::uint32_t, std::int32_t> root_cluster;
    std::int32_t next_cluster = 0;
    for (std::uint32_t p = 0; p < order.size(); ++p) {
        const std::uint32_t i = order[p];
        if (!result.core[i]) continue;
        const std::uint32_t root = uf.find(i);
        auto [it, inserted] = root_cluster.try_emplace(root, next_cluster);
        if (inserted) ++next_cluster;
        result.labels[i] = it->second;
    }

    // A border point joins the lowest cluster id among cores within reach —
    // the first expanding cluster would have claimed it.
    for (std::size_t i = 0; i < n; ++i) {
        if (result.core[i]) continue;
        std::int32_t best = kNoise;
        for (std::size_t j = 0; j < n; ++j) {
            if (!result.core[j] || !within(points[i], points[j], eps2)) continue;
            const std::int32_t cid = result.labels[j];
            if (best == kNoise || cid < best) best = cid;
        }
        result.labels[i] = best;
    }
    result.cluster_count = next_cluster;
    return result;
}

std::vector<ClusterBox> cluster_boxes(std::span<const Point2> points,
                                      const ClusterLabeling& labeling,
                                      std::int32_t min_cluster_size) {
    std::vector<ClusterBox> acc(static_cast<std::size_t>(labeling.cluster_count));
    std::vector<bool> seen(acc.size(), false);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::int32_t cid = labeling.labels[i];
        if (cid < 0) continue;
        const auto x = static_cast<std::int32_t>(std::lround(points[i].x));
        const auto y = static_cast<std::int32_t>(std::lround(points[i].y));
        ClusterBox& cb = acc[static_cast<std::size_t>(cid)];
        if (!seen[static_cast<std::size_t>(cid)]) {
            seen[static_cast<std::size_t>(cid)] = true;
            cb.cluster_id = cid;
            cb.box = {x, y, x, y};
        } else {
            cb.box.x_min = std::min(cb.box.x_min, x);
            cb.box.y_min = std::min(cb.box.y_min, y);
            cb.box.x_max = std::max(cb.box.x_max, x);
            cb.box.y_max = std::max(cb.box.y_max, y);
        }
        ++cb.size;
    }
    std::vector<ClusterBox> out;
    for (std::size_t c = 0; c < acc.size(); ++c) {
        if (seen[c] && acc[c].size >= min_cluster_size) out.push_back(acc[c]);
    }
    std::sort(out.begin(), out.end(), [](const ClusterBox& a, const ClusterBox& b) {
        if (a.box.x_min != b.box.x_min) return a.box.x_min < b.box.x_min;
        if (a.box.y_min != b.box.y_min) return a.box.y_min < b.box.y_min;
        if (a.box.x_max != b.box.x_max) return a.box.x_max < b.box.x_max;
        if (a.box.y_max != b.box.y_max) return a.box.y_max < b.box.y_max;
        return a.cluster_id < b.cluster_id;
    });
    return out;
}

std::vector<BoundingBox> boxes_from_labeling(std::span<const Point2> points,
                                             const ClusterLabeling& labeling,
                                             std::int32_t min_cluster_size) {
    std::vector<BoundingBox> out;
    for (const ClusterBox& cb : cluster_boxes(points, labeling, min_cluster_size)) {
        out.push_back(cb.box);
    }
    return out;
}

}  // namespace evspike
