#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "reference_dbscan.hpp"
#include "stormsim/clustering.hpp"

using namespace stormsim;

TEST_CASE("normalized distance") {
    const auto p = default_params();
    CHECK(distance({32, -41.0}, {32, -41.0}, p) == 0.0);

    // |dTA| = 1, |dRSSI| = 11.6 with the default scales gives
    // sqrt(1^2 + 2.9^2) = sqrt(9.41).
    const double d = distance({32, -41.0}, {31, -52.6}, p);
    CHECK(d == doctest::Approx(std::sqrt(9.41)).epsilon(1e-12));

    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> ta(0, 60);
    std::uniform_real_distribution<double> rssi(-120.0, -20.0);
    for (int i = 0; i < 1000; ++i) {
        const Fingerprint a{ta(rng), rssi(rng)};
        const Fingerprint b{ta(rng), rssi(rng)};
        CHECK(distance(a, b, p) == distance(b, a, p));
    }
}

TEST_CASE("dense blob plus scattered noise") {
    const auto p = default_params();
    std::vector<Fingerprint> points(10, Fingerprint{32, -41.0});
    points.push_back({32, -60.0});  // 4.75 normalized units away
    points.push_back({40, -41.0});  // 8 units
    points.push_back({45, -80.0});

    const auto result = dbscan(points, p, 50);
    REQUIRE(result.clusters.size() == 1);
    CHECK(result.clusters[0].size == 10);
    CHECK(result.clusters[0].density_pk == doctest::Approx(0.2));
    CHECK(result.clusters[0].centroid.mu_ta == doctest::Approx(32.0));
    CHECK(result.clusters[0].centroid.mu_rssi == doctest::Approx(-41.0));
    CHECK(result.noise_count() == 3);
}

TEST_CASE("below MinPts no cluster forms") {
    const auto p = default_params();
    const std::vector<Fingerprint> points{{32, -41.0}, {32, -41.0}};
    const auto result = dbscan(points, p, 50);
    CHECK(result.clusters.empty());
    CHECK(result.noise_count() == 2);
}

TEST_CASE("input validation") {
    const auto p = default_params();
    CHECK_THROWS_WITH_AS(dbscan({}, p, 50), doctest::Contains("at least one point"), Error);
    const std::vector<Fingerprint> points(10, Fingerprint{32, -41.0});
    CHECK_THROWS_AS(dbscan(points, p, 5), Error);  // capacity below fill
}

TEST_CASE("labels match the brute-force reference") {
    const auto p = default_params();
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const auto points = reference::random_instance(rng, 50);
        const auto got = dbscan(points, p, 50);
        const auto want = reference::cluster_labels(points, p);
        CHECK(reference::canonical(got.labels) == reference::canonical(want));
    }
}

TEST_CASE("partition is permutation invariant") {
    const auto p = default_params();
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const auto points = reference::random_instance(rng, 40);
        const auto base = dbscan(points, p, 50);

        std::vector<int> perm(points.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<Fingerprint> shuffled(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) shuffled[i] = points[perm[i]];

        const auto permuted = dbscan(shuffled, p, 50);
        // Map the permuted labels back onto original indices and compare the
        // partitions (cluster ids may renumber).
        std::vector<int> mapped(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) mapped[perm[i]] = permuted.labels[i];
        CHECK(reference::canonical(mapped) == reference::canonical(base.labels));
    }
}

TEST_CASE("duplicating a core point never shrinks a cluster") {
    const auto p = default_params();
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        auto points = reference::random_instance(rng, 30);
        const auto base = dbscan(points, p, 64);
        // Find a clustered point to duplicate; skip all-noise instances.
        int core_idx = -1;
        for (std::size_t i = 0; i < points.size(); ++i)
            if (base.labels[i] != kNoiseLabel) core_idx = static_cast<int>(i);
        if (core_idx < 0) continue;

        std::vector<int> before;
        for (const auto& c : base.clusters) before.push_back(c.size);

        points.push_back(points[core_idx]);
        const auto grown = dbscan(points, p, 64);
        REQUIRE(grown.clusters.size() >= base.clusters.size());
        std::vector<int> after;
        for (const auto& c : grown.clusters) after.push_back(c.size);
        std::sort(before.begin(), before.end(), std::greater<>());
        std::sort(after.begin(), after.end(), std::greater<>());
        for (std::size_t k = 0; k < before.size(); ++k) CHECK(after[k] >= before[k]);
    }
}

TEST_CASE("every clustered point is a core or density-reachable from one") {
    const auto p = default_params();
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto points = reference::random_instance(rng, 40);
        const auto result = dbscan(points, p, 50);
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (result.labels[i] == kNoiseLabel) continue;
            // Neighbor count including the point itself.
            int neighbors = 0;
            int core_neighbor_same_cluster = 0;
            for (std::size_t j = 0; j < points.size(); ++j) {
                if (distance(points[i], points[j], p) > kClusterEps) continue;
                ++neighbors;
                if (j == i) continue;
                int jn = 0;
                for (std::size_t k = 0; k < points.size(); ++k)
                    if (distance(points[j], points[k], p) <= kClusterEps) ++jn;
                if (jn >= p.min_pts && result.labels[j] == result.labels[i])
                    ++core_neighbor_same_cluster;
            }
            const bool is_core = neighbors >= p.min_pts;
            CHECK((is_core || core_neighbor_same_cluster > 0));
        }
    }
}

TEST_CASE("densities sum to at most one at full capacity") {
    const auto p = default_params();
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const auto points = reference::random_instance(rng, 50);
        const auto result = dbscan(points, p, 50);
        double sum = 0.0;
        for (const auto& c : result.clusters) sum += c.density_pk;
        CHECK(sum <= 1.0 + 1e-12);
    }
}
