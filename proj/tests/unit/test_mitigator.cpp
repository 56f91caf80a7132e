#include <doctest.h>

#include <random>

#include "stormsim/mitigator.hpp"

using namespace stormsim;

TEST_CASE("first absorption inserts a fresh entry") {
    const auto params = default_params();
    BlockList bl;
    const Centroid mu{32.0, -41.0};
    const auto events = absorb_fingerprints(bl, std::vector{mu}, SimTime{100}, params);
    REQUIRE(bl.size() == 1);
    CHECK(bl.entries()[0].match_count == 1);
    CHECK(bl.entries()[0].tau_ms == params.tau0_ms);
    CHECK(bl.entries()[0].t_last == SimTime{100});
    REQUIRE(events.size() == 1);
    CHECK(events[0].kind == BlockEventKind::created);
}

TEST_CASE("every k-th match grows the timeout by delta") {
    const auto params = default_params();  // k = 5, delta = 500
    BlockList bl;
    const Centroid mu{32.0, -41.0};
    for (int i = 0; i < 5; ++i)
        absorb_fingerprints(bl, std::vector{mu}, SimTime{100 * (i + 1)}, params);
    REQUIRE(bl.size() == 1);
    CHECK(bl.entries()[0].match_count == 5);
    CHECK(bl.entries()[0].tau_ms == params.tau0_ms + params.delta_ms);
}

TEST_CASE("timeout saturates at tau_max") {
    const auto params = default_params();
    BlockList bl;
    const Centroid mu{32.0, -41.0};
    // 200 refreshes would give 500 + 40 * 500 = 20500 without the cap.
    for (int i = 0; i < 200; ++i)
        absorb_fingerprints(bl, std::vector{mu}, SimTime{10 * i}, params);
    CHECK(bl.entries()[0].match_count == 200);
    CHECK(bl.entries()[0].tau_ms == params.tau_max_ms);
}

TEST_CASE("expiry boundary is inclusive") {
    const auto params = default_params();
    auto fresh = [&] {
        BlockList bl;
        absorb_fingerprints(bl, std::vector{Centroid{32.0, -41.0}}, SimTime{1000}, params);
        return bl;  // tau = 500, t_last = 1000
    };
    {
        auto bl = fresh();
        const auto events = expire(bl, SimTime{1500});
        CHECK(bl.empty());
        REQUIRE(events.size() == 1);
        CHECK(events[0].kind == BlockEventKind::expired);
    }
    {
        auto bl = fresh();
        expire(bl, SimTime{1499});
        CHECK(bl.size() == 1);
    }
}

TEST_CASE("screening applies the match box") {
    const auto params = default_params();
    BlockList bl;
    absorb_fingerprints(bl, std::vector{Centroid{32.0, -41.0}}, SimTime{0}, params);

    auto r1 = screen_attempt(bl, {32, -43.0}, SimTime{10}, params);
    CHECK(r1.reject);

    auto r2 = screen_attempt(bl, {31, -52.6}, SimTime{10}, params);
    CHECK_FALSE(r2.reject);  // RSSI gap 11.6 dB exceeds the box

    BlockList empty;
    CHECK_FALSE(screen_attempt(empty, {32, -41.0}, SimTime{10}, params).reject);
}

TEST_CASE("screening expires stale entries first") {
    const auto params = default_params();
    BlockList bl;
    absorb_fingerprints(bl, std::vector{Centroid{32.0, -41.0}}, SimTime{0}, params);
    const auto result = screen_attempt(bl, {32, -41.0}, SimTime{500}, params);
    CHECK_FALSE(result.reject);  // aged out exactly at tau0
    CHECK(bl.empty());
    REQUIRE(result.events.size() == 1);
    CHECK(result.events[0].kind == BlockEventKind::expired);
}

TEST_CASE("nearby centroids merge instead of duplicating") {
    const auto params = default_params();
    BlockList bl;
    absorb_fingerprints(bl, std::vector{Centroid{32.0, -41.0}}, SimTime{0}, params);
    absorb_fingerprints(bl, std::vector{Centroid{32.5, -42.0}}, SimTime{50}, params);
    REQUIRE(bl.size() == 1);
    CHECK(bl.entries()[0].match_count == 2);
    CHECK(bl.entries()[0].centroid.mu_ta == 32.0);  // the older centroid wins
    CHECK(bl.entries()[0].t_last == SimTime{50});
}

TEST_CASE("an entry refreshed faster than tau0 never expires") {
    const auto params = default_params();
    BlockList bl;
    SimTime now{0};
    absorb_fingerprints(bl, std::vector{Centroid{32.0, -41.0}}, now, params);
    for (int i = 0; i < 20; ++i) {
        now = now + 400;  // < tau0 = 500
        absorb_fingerprints(bl, std::vector{Centroid{32.0, -41.0}}, now, params);
        CHECK(bl.size() == 1);
    }
}

TEST_CASE("default screening never mutates counters") {
    const auto params = default_params();
    BlockList bl;
    absorb_fingerprints(bl, std::vector{Centroid{32.0, -41.0}}, SimTime{0}, params);
    for (int i = 0; i < 10; ++i) {
        const auto result = screen_attempt(bl, {32, -41.0}, SimTime{10 + i}, params);
        CHECK(result.reject);
    }
    CHECK(bl.entries()[0].match_count == 1);
    CHECK(bl.entries()[0].t_last == SimTime{0});
}

TEST_CASE("attempt-mode screening reinforces on match") {
    auto params = default_params();
    params.reinforce_on = ReinforceOn::attempt;
    BlockList bl;
    absorb_fingerprints(bl, std::vector{Centroid{32.0, -41.0}}, SimTime{0}, params);
    for (int i = 1; i <= 4; ++i) {
        const auto result = screen_attempt(bl, {32, -41.0}, SimTime{10 * i}, params);
        CHECK(result.reject);
    }
    CHECK(bl.entries()[0].match_count == 5);
    CHECK(bl.entries()[0].t_last == SimTime{40});
    CHECK(bl.entries()[0].tau_ms == params.tau0_ms + params.delta_ms);
}

TEST_CASE("first inserted entry wins when several match") {
    const auto params = default_params();
    BlockList bl;
    absorb_fingerprints(bl, std::vector{Centroid{32.0, -41.0}}, SimTime{0}, params);
    // Outside the first entry's box (TA gap 2), so a second entry appears.
    absorb_fingerprints(bl, std::vector{Centroid{34.0, -41.0}}, SimTime{0}, params);
    REQUIRE(bl.size() == 2);
    // (33, -41) is inside both boxes.
    const auto result = screen_attempt(bl, {33, -41.0}, SimTime{10}, params);
    REQUIRE(result.reject);
    CHECK(result.matched->centroid.mu_ta == 32.0);
}

TEST_CASE("tau stays within its bounds under random operation sequences") {
    const auto params = default_params();
    std::mt19937_64 rng(321);
    std::uniform_int_distribution<int> op(0, 2);
    std::uniform_real_distribution<double> ta(28.0, 36.0);
    std::uniform_real_distribution<double> rssi(-60.0, -35.0);

    BlockList bl;
    SimTime now{0};
    for (int step = 0; step < 2000; ++step) {
        now = now + 37;
        switch (op(rng)) {
            case 0:
                absorb_fingerprints(bl, std::vector{Centroid{ta(rng), rssi(rng)}}, now, params);
                break;
            case 1:
                screen_attempt(bl, {static_cast<int>(ta(rng)), rssi(rng)}, now, params);
                break;
            case 2:
                expire(bl, now);
                break;
        }
        for (const auto& e : bl.entries()) {
            CHECK(e.tau_ms >= params.tau0_ms);
            CHECK(e.tau_ms <= params.tau_max_ms);
            CHECK(e.match_count >= 1);
            CHECK(e.t_last <= now);
        }
    }
}
