#include <doctest.h>

#include <cmath>
#include <random>

#include "stormsim/radio.hpp"

using namespace stormsim;

namespace {

UeProfile static_ue(Vec2 pos, double offset = 0.0) {
    UeProfile ue;
    ue.id = "ue";
    ue.track = {{SimTime{0}, pos}};
    ue.tx_power_offset_db = offset;
    return ue;
}

}  // namespace

TEST_CASE("noise-free sampling is deterministic") {
    RadioModel radio;
    radio.rssi_noise_sigma_db = 0.0;
    const auto ue = static_ue({10.0, 0.0});
    std::mt19937_64 rng(1);
    const auto a = sample_fingerprint(radio, ue, {}, SimTime{5}, rng);
    const auto b = sample_fingerprint(radio, ue, {}, SimTime{5}, rng);
    CHECK(a == b);
}

TEST_CASE("placement helper reproduces a target mean fingerprint") {
    RadioModel radio;
    const auto placed = place_for_fingerprint(radio, 31, -52.6);
    auto ue = static_ue(placed.pos, placed.tx_power_offset_db);

    std::mt19937_64 rng(7);
    double sum_ta = 0, sum_rssi = 0, sum_rssi2 = 0;
    const int n = 1000;
    for (int i = 0; i < n; ++i) {
        const auto fp = sample_fingerprint(radio, ue, {}, SimTime{0}, rng);
        sum_ta += fp.ta;
        sum_rssi += fp.rssi;
        sum_rssi2 += fp.rssi * fp.rssi;
    }
    const double mean_ta = sum_ta / n;
    const double mean_rssi = sum_rssi / n;
    CHECK(std::abs(mean_ta - 31.0) <= 0.5);
    CHECK(std::abs(mean_rssi - (-52.6)) <= 1.0);

    // Sample sigma must sit inside the chi-squared band for sigma = 1.5 and
    // n = 1000 (99.9% interval is roughly [1.39, 1.61]).
    const double var = sum_rssi2 / n - mean_rssi * mean_rssi;
    const double sigma = std::sqrt(var);
    CHECK(sigma >= 1.2);
    CHECK(sigma <= 1.8);
}

TEST_CASE("degenerate geometry clamps instead of exploding") {
    RadioModel radio;
    const auto ue = static_ue({0.0, 0.0});  // right on top of the gNB
    std::mt19937_64 rng(3);
    bool clamped = false;
    const auto fp = sample_fingerprint(radio, ue, {}, SimTime{0}, rng, &clamped);
    CHECK(clamped);
    CHECK(std::isfinite(fp.rssi));
    CHECK(fp.ta >= 0);
}

TEST_CASE("rssi is clamped into the plausibility window") {
    RadioModel radio;
    radio.rssi_noise_sigma_db = 0.0;
    const auto ue = static_ue({0.05, 0.0}, 80.0);  // absurd power, clamped distance
    std::mt19937_64 rng(3);
    const auto fp = sample_fingerprint(radio, ue, {}, SimTime{0}, rng);
    CHECK(fp.rssi <= kRssiMaxDbm);
}

TEST_CASE("waypoint interpolation") {
    UeProfile ue;
    ue.id = "m";
    ue.track = {{SimTime{0}, {0.0, 0.0}}, {SimTime{1000}, {10.0, 0.0}}};
    CHECK(ue.position_at(SimTime{-5}).x == 0.0);
    CHECK(ue.position_at(SimTime{500}).x == doctest::Approx(5.0));
    CHECK(ue.position_at(SimTime{1000}).x == 10.0);
    CHECK(ue.position_at(SimTime{5000}).x == 10.0);
}

TEST_CASE("profile validation") {
    UeProfile ue;
    ue.id = "bad";
    CHECK_THROWS_AS(validate(ue), Error);  // no waypoints

    ue.track = {{SimTime{10}, {0, 0}}, {SimTime{10}, {1, 0}}};
    CHECK_THROWS_AS(validate(ue), Error);  // non-increasing waypoint times

    ue.track = {{SimTime{0}, {0, 0}}};
    ue.behavior = UeBehavior::malicious;
    CHECK_THROWS_AS(validate(ue), Error);  // missing rate

    ue.msg3_rate_hz = 45.7;
    ue.attack_duration_ms = 1000;
    CHECK_NOTHROW(validate(ue));
}

TEST_CASE("ta quantization follows distance") {
    RadioModel radio;
    radio.rssi_noise_sigma_db = 0.0;
    std::mt19937_64 rng(5);
    const auto near = sample_fingerprint(radio, static_ue({13.95, 0.0}), {}, SimTime{0}, rng);
    const auto far = sample_fingerprint(radio, static_ue({14.4, 0.0}), {}, SimTime{0}, rng);
    CHECK(near.ta == 31);
    CHECK(far.ta == 32);
    CHECK(far.rssi < near.rssi);
}
