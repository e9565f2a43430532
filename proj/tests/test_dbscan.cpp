#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "doctest.h"
#include "evspike/dbscan.hpp"
#include "evspike/errors.hpp"

using namespace evspike;

namespace {

bool same_labeling(const ClusterLabeling& a, const ClusterLabeling& b) {
    return a.labels == b.labels && a.core == b.core && a.cluster_count == b.cluster_count;
}

std::vector<Point2> random_points(std::mt19937_64& rng, int n, double lo, double hi,
                                  bool clustered) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<Point2> pts;
    if (clustered) {
        std::normal_distribution<double> jitter(0.0, 2.0);
        const int centers = 1 + static_cast<int>(rng() % 4);
        std::vector<Point2> c;
        for (int i = 0; i < centers; ++i) c.push_back({u(rng), u(rng)});
        for (int i = 0; i < n; ++i) {
            const Point2& base = c[rng() % c.size()];
            pts.push_back({base.x + jitter(rng), base.y + jitter(rng)});
        }
    } else {
        for (int i = 0; i < n; ++i) pts.push_back({u(rng), u(rng)});
    }
    return pts;
}

}  // namespace

TEST_CASE("a four-point line with one far outlier forms a single cluster") {
    // eps 1, min_pts 3 (self included): the middle two points are core, the
    // line ends are border, the outlier is noise. Hand-derived.
    const std::vector<Point2> pts{{0, 0}, {1, 0}, {2, 0}, {3, 0}, {10, 10}};
    const DbscanParams params{1.0, 3};
    const ClusterLabeling got = dbscan(pts, params);
    CHECK(got.labels == std::vector<std::int32_t>{0, 0, 0, 0, kNoise});
    CHECK(got.core == std::vector<char>{0, 1, 1, 0, 0});
    CHECK(got.cluster_count == 1);
    CHECK(same_labeling(got, brute_force_dbscan(pts, params)));
}

TEST_CASE("a border point between two clusters takes the lower cluster id") {
    // Hand-derived with eps 1, min_pts 4: cores at (3,2) and (5,2); the point
    // (4,2) is border to both and must keep the id of cluster 0, which is
    // assigned first in lexicographic processing order.
    const std::vector<Point2> pts{
        {2, 2}, {3, 1}, {3, 2}, {4, 2}, {5, 1}, {5, 2}, {6, 2},
    };
    const DbscanParams params{1.0, 4};
    const ClusterLabeling got = dbscan(pts, params);
    CHECK(got.labels == std::vector<std::int32_t>{0, 0, 0, 0, 1, 1, 1});
    CHECK(got.core == std::vector<char>{0, 0, 1, 0, 0, 1, 0});
    CHECK(got.cluster_count == 2);
    CHECK(same_labeling(got, brute_force_dbscan(pts, params)));

    // The same point set in reversed input order keeps every point's label:
    // ids are assigned by coordinate order, not input order.
    std::vector<Point2> reversed(pts.rbegin(), pts.rend());
    const ClusterLabeling rev = dbscan(reversed, params);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(rev.labels[pts.size() - 1 - i] == got.labels[i]);
        CHECK(rev.core[pts.size() - 1 - i] == got.core[i]);
    }
}

TEST_CASE("exact duplicates each count toward the core threshold") {
    const std::vector<Point2> pts{{1, 1}, {1, 1}, {1, 1}};
    const ClusterLabeling got = dbscan(pts, DbscanParams{0.5, 3});
    CHECK(got.labels == std::vector<std::int32_t>{0, 0, 0});
    CHECK(got.core == std::vector<char>{1, 1, 1});
    CHECK(got.cluster_count == 1);
}

TEST_CASE("the neighborhood radius is inclusive") {
    const std::vector<Point2> pts{{0, 0}, {3, 4}};  // distance exactly 5
    const ClusterLabeling in = dbscan(pts, DbscanParams{5.0, 2});
    CHECK(in.labels == std::vector<std::int32_t>{0, 0});
    CHECK(in.cluster_count == 1);
    const ClusterLabeling out = dbscan(pts, DbscanParams{4.999, 2});
    CHECK(out.labels == std::vector<std::int32_t>{kNoise, kNoise});
    CHECK(out.cluster_count == 0);
}

TEST_CASE("min_pts of one makes every point a singleton core") {
    // Ids follow coordinate order, so the later input point gets id 0.
    const std::vector<Point2> pts{{9, 9}, {1, 1}};
    const ClusterLabeling got = dbscan(pts, DbscanParams{0.5, 1});
    CHECK(got.labels == std::vector<std::int32_t>{1, 0});
    CHECK(got.core == std::vector<char>{1, 1});
    CHECK(got.cluster_count == 2);
}

TEST_CASE("empty input yields an empty labeling") {
    const ClusterLabeling got = dbscan(std::vector<Point2>{}, DbscanParams{1.0, 3});
    CHECK(got.labels.empty());
    CHECK(got.core.empty());
    CHECK(got.cluster_count == 0);
}

TEST_CASE("grid-hash clustering matches brute force on random instances") {
    std::mt19937_64 rng(555);
    for (int iter = 0; iter < 60; ++iter) {
        const int n = static_cast<int>(rng() % 301);
        const bool clustered = (iter % 2) == 0;
        // Negative coordinates and integer-valued points land on cell
        // boundaries of the spatial hash; both must be handled.
        std::vector<Point2> pts = random_points(rng, n, -40.0, 40.0, clustered);
        if (iter % 3 == 0) {
            for (Point2& p : pts) {
                p.x = std::floor(p.x);
                p.y = std::floor(p.y);
            }
        }
        DbscanParams params;
        params.eps = 0.5 + static_cast<double>(rng() % 80) / 10.0;
        params.min_pts = 1 + static_cast<std::int32_t>(rng() % 12);
        CAPTURE(iter);
        REQUIRE(same_labeling(dbscan(pts, params), brute_force_dbscan(pts, params)));
    }
}

TEST_CASE("cluster ids are a pure function of the point set") {
    std::mt19937_64 rng(321);
    std::vector<Point2> pts = random_points(rng, 150, 0.0, 30.0, true);
    const DbscanParams params{2.0, 4};
    const ClusterLabeling base = dbscan(pts, params);

    std::vector<std::size_t> perm(pts.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Point2> shuffled(pts.size());
    for (std::size_t i = 0; i < perm.size(); ++i) shuffled[i] = pts[perm[i]];
    const ClusterLabeling moved = dbscan(shuffled, params);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        CHECK(moved.labels[i] == base.labels[perm[i]]);
        CHECK(moved.core[i] == base.core[perm[i]]);
    }
    CHECK(moved.cluster_count == base.cluster_count);
}

TEST_CASE("cluster boxes are tight, sorted, and filtered by size") {
    const std::vector<Point2> pts{
        // cluster around (10,1)-(11,2): 4 points
        {10, 1}, {10, 2}, {11, 1}, {11, 2},
        // cluster around (1,1): 3 points
        {1, 1}, {1, 2}, {2, 1},
        // noise
        {20, 20},
    };
    const DbscanParams params{2.0, 3};
    const ClusterLabeling labeling = dbscan(pts, params);
    CHECK(labeling.cluster_count == 2);

    const auto boxes = cluster_boxes(pts, labeling, 3);
    REQUIRE(boxes.size() == 2);
    // Sorted by x_min: the (1,1) cluster first despite its later id order.
    CHECK(boxes[0].box == BoundingBox{1, 1, 2, 2});
    CHECK(boxes[0].size == 3);
    CHECK(boxes[1].box == BoundingBox{10, 1, 11, 2});
    CHECK(boxes[1].size == 4);

    // Raising the size floor drops the smaller cluster.
    const auto big_only = cluster_boxes(pts, labeling, 4);
    REQUIRE(big_only.size() == 1);
    CHECK(big_only[0].box == BoundingBox{10, 1, 11, 2});

    const auto plain = boxes_from_labeling(pts, labeling, 3);
    REQUIRE(plain.size() == 2);
    CHECK(plain[0] == boxes[0].box);
    CHECK(plain[1] == boxes[1].box);
}

TEST_CASE("cluster boxes round fractional coordinates to the nearest pixel") {
    const std::vector<Point2> pts{{1.4, 1.6}, {1.5, 1.4}, {2.6, 1.5}};
    const ClusterLabeling labeling = dbscan(pts, DbscanParams{2.0, 2});
    const auto boxes = cluster_boxes(pts, labeling, 1);
    REQUIRE(boxes.size() == 1);
    CHECK(boxes[0].box == BoundingBox{1, 1, 3, 2});  // lround semantics
}

TEST_CASE("the reference implementation is capped at 2000 points") {
    const std::vector<Point2> too_many(2001, Point2{0.0, 0.0});
    CHECK_THROWS_AS(brute_force_dbscan(too_many, DbscanParams{1.0, 3}), DataError);
    const std::vector<Point2> at_cap(2000, Point2{0.0, 0.0});
    CHECK_NOTHROW(brute_force_dbscan(at_cap, DbscanParams{1.0, 3}));
}

TEST_CASE("parameter validation rejects non-positive settings") {
    CHECK_THROWS_AS((DbscanParams{0.0, 3}.validate()), ConfigError);
    CHECK_THROWS_AS((DbscanParams{-1.0, 3}.validate()), ConfigError);
    CHECK_THROWS_AS((DbscanParams{1.0, 0}.validate()), ConfigError);
    CHECK_NOTHROW((DbscanParams{1.0, 1}.validate()));
}
