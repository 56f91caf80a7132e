#include <doctest.h>

#include <random>

#include "stormsim/detector.hpp"

using namespace stormsim;

namespace {

WindowKpm make_kpm(std::int64_t n3, std::int64_t n4, std::int64_t n5,
                   Fingerprint fp = {32, -41.0}, std::uint64_t window_id = 0) {
    WindowKpm kpm;
    kpm.window_id = window_id;
    kpm.window_start = SimTime{static_cast<std::int64_t>(window_id) * 100};
    kpm.n3 = n3;
    kpm.n4 = n4;
    kpm.n5 = n5;
    for (std::int64_t i = 0; i < n3; ++i)
        kpm.fingerprints.push_back({kpm.window_start + i, fp, static_cast<std::uint64_t>(i + 1)});
    return kpm;
}

}  // namespace

TEST_CASE("storm window with a dominating cluster") {
    const auto params = default_params();
    FingerprintHistory history(params.history_size_m);
    const auto verdict = ingest_window(make_kpm(40, 40, 2), history, params);
    CHECK(verdict.kind == LoadKind::attack_detected);
    CHECK(verdict.r1 == doctest::Approx(0.05));
    CHECK(verdict.r2 == doctest::Approx(0.05));
    REQUIRE(verdict.malicious_centroids.size() == 1);
    CHECK(verdict.malicious_centroids[0].mu_ta == doctest::Approx(32.0));
    CHECK(verdict.malicious_centroids[0].mu_rssi == doctest::Approx(-41.0));
    CHECK(history.size() == 40);
}

TEST_CASE("high completion ratios read as high load") {
    const auto params = default_params();
    FingerprintHistory history(params.history_size_m);
    const auto verdict = ingest_window(make_kpm(10, 10, 9), history, params);
    CHECK(verdict.kind == LoadKind::high_load);
    CHECK(verdict.r1 == doctest::Approx(0.9));
}

TEST_CASE("below the MSG3 threshold everything is normal load") {
    const auto params = default_params();
    FingerprintHistory history(params.history_size_m);
    CHECK(ingest_window(make_kpm(1, 1, 1), history, params).kind == LoadKind::normal_load);
}

TEST_CASE("empty window uses the zero rule") {
    const auto params = default_params();
    FingerprintHistory history(params.history_size_m);
    const auto verdict = ingest_window(make_kpm(0, 0, 0), history, params);
    CHECK(verdict.kind == LoadKind::normal_load);
    CHECK(verdict.r1 == 1.0);
    CHECK(verdict.r2 == 1.0);
}

TEST_CASE("mixed ratio case stays high load") {
    const auto params = default_params();
    {
        FingerprintHistory history(params.history_size_m);
        const auto verdict = ingest_window(make_kpm(20, 5, 4), history, params);
        CHECK(verdict.r1 == doctest::Approx(0.2));
        CHECK(verdict.r2 == doctest::Approx(0.8));
        CHECK(verdict.kind == LoadKind::high_load);
    }
    {
        // Both ratios low: the attack branch runs (and downgrades when the
        // history is not yet dominated by one cluster).
        FingerprintHistory history(params.history_size_m);
        const auto verdict = ingest_window(make_kpm(20, 20, 4), history, params);
        CHECK(verdict.r1 == doctest::Approx(0.2));
        CHECK(verdict.r2 == doctest::Approx(0.2));
        CHECK(verdict.kind == LoadKind::high_load);
        CHECK(verdict.note == VerdictNote::no_dense_cluster);
    }
    {
        // Same counts with a pre-filled history: density crosses T3 and the
        // branch yields a detection.
        FingerprintHistory history(params.history_size_m);
        for (int i = 0; i < 30; ++i) history.push(SimTime{0}, {32, -41.0});
        const auto verdict = ingest_window(make_kpm(20, 20, 4), history, params);
        CHECK(verdict.kind == LoadKind::attack_detected);
    }
    {
        FingerprintHistory history(params.history_size_m);
        const auto verdict = ingest_window(make_kpm(20, 20, 20), history, params);
        CHECK(verdict.kind == LoadKind::high_load);
    }
}

TEST_CASE("kpm validation") {
    const auto params = default_params();
    FingerprintHistory history(params.history_size_m);
    auto bad = make_kpm(5, 5, 0);
    bad.n4 = -1;
    CHECK_THROWS_AS(ingest_window(bad, history, params), Error);

    auto mismatch = make_kpm(5, 5, 0);
    mismatch.fingerprints.pop_back();
    CHECK_THROWS_AS(ingest_window(mismatch, history, params), Error);

    FingerprintHistory wrong_capacity(10);
    CHECK_THROWS_AS(ingest_window(make_kpm(1, 1, 1), wrong_capacity, params), Error);
}

TEST_CASE("history is FIFO with capacity M and survives normal windows") {
    const auto params = default_params();
    FingerprintHistory history(3);
    history.push(SimTime{0}, {1, -50.0});
    history.push(SimTime{1}, {2, -50.0});
    history.push(SimTime{2}, {3, -50.0});
    history.push(SimTime{3}, {4, -50.0});
    const auto points = history.points();
    REQUIRE(points.size() == 3);
    CHECK(points[0].ta == 2);
    CHECK(points[2].ta == 4);

    FingerprintHistory h2(params.history_size_m);
    ingest_window(make_kpm(2, 2, 2), h2, params);  // normal load
    CHECK(h2.size() == 2);
    ingest_window(make_kpm(3, 3, 3), h2, params);  // still below T1
    CHECK(h2.size() == 5);
}

TEST_CASE("verdicts are deterministic for a replayed window stream") {
    const auto params = default_params();
    auto run_stream = [&] {
        FingerprintHistory history(params.history_size_m);
        std::vector<LoadKind> kinds;
        for (int w = 0; w < 12; ++w) {
            const auto kpm = make_kpm(4 + w % 3, 4 + w % 3, (w % 2) * 4, {32, -41.0 + 0.1 * w},
                                      static_cast<std::uint64_t>(w));
            kinds.push_back(ingest_window(kpm, history, params).kind);
        }
        return kinds;
    };
    CHECK(run_stream() == run_stream());
}

TEST_CASE("raising n5 never turns high load back into an attack") {
    const auto params = default_params();
    for (std::int64_t n3 : {5, 10, 20, 40}) {
        bool seen_high = false;
        for (std::int64_t n5 = 0; n5 <= n3; ++n5) {
            FingerprintHistory history(params.history_size_m);
            for (int i = 0; i < 45; ++i) history.push(SimTime{0}, {32, -41.0});
            const auto verdict = ingest_window(make_kpm(n3, n3, n5), history, params);
            CHECK(verdict.kind != LoadKind::normal_load);
            if (seen_high) CHECK(verdict.kind == LoadKind::high_load);
            if (verdict.kind == LoadKind::high_load) seen_high = true;
        }
        CHECK(seen_high);
    }
}

TEST_CASE("returned centroids equal the cluster means over the history") {
    const auto params = default_params();
    FingerprintHistory history(params.history_size_m);
    // Two alternating TA values inside one box: the cluster mean is fractional.
    WindowKpm kpm = make_kpm(0, 30, 0);
    kpm.n3 = 30;
    for (int i = 0; i < 30; ++i)
        kpm.fingerprints.push_back(
            {SimTime{i}, {i % 2 == 0 ? 32 : 31, -41.0}, static_cast<std::uint64_t>(i)});
    const auto verdict = ingest_window(kpm, history, params);
    REQUIRE(verdict.kind == LoadKind::attack_detected);
    REQUIRE(verdict.malicious_centroids.size() == 1);
    CHECK(verdict.malicious_centroids[0].mu_ta == doctest::Approx(31.5));
    CHECK(verdict.malicious_centroids[0].mu_rssi == doctest::Approx(-41.0));
}

TEST_CASE("dynamic T3 flags two equal clusters that the fixed default misses") {
    auto params = default_params();
    WindowKpm kpm;
    kpm.n3 = 40;
    kpm.n4 = 40;
    kpm.n5 = 0;
    for (int i = 0; i < 20; ++i) kpm.fingerprints.push_back({SimTime{i}, {32, -41.0}, 0});
    for (int i = 0; i < 20; ++i) kpm.fingerprints.push_back({SimTime{i}, {30, -60.0}, 0});

    {
        FingerprintHistory history(params.history_size_m);
        const auto verdict = ingest_window(kpm, history, params);
        CHECK(verdict.kind == LoadKind::high_load);  // 0.4 < 0.5
        CHECK(verdict.note == VerdictNote::no_dense_cluster);
    }
    {
        params.t3_mode = T3Mode::dynamic;
        FingerprintHistory history(params.history_size_m);
        const auto verdict = ingest_window(kpm, history, params);
        REQUIRE(verdict.kind == LoadKind::attack_detected);  // 0.4 > 1/3
        CHECK(verdict.malicious_centroids.size() == 2);
    }
}
