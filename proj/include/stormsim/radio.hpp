#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "stormsim/core.hpp"

namespace stormsim {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Vec2&) const = default;
};

double distance_m(Vec2 a, Vec2 b);

struct Waypoint {
    SimTime t;
    Vec2 pos;
};

enum class UeBehavior { benign, malicious };
enum class ArrivalProcess { deterministic, poisson };

struct UeProfile {
    std::string id;
    UeBehavior behavior = UeBehavior::benign;
    std::vector<Waypoint> track;  // length 1 == static
    double tx_power_offset_db = 0.0;
    /// Per-UE RSSI noise override; unset means the radio-model default.
    std::optional<double> rssi_sigma_override_db;

    // malicious only
    double msg3_rate_hz = 0.0;
    SimTime attack_start{0};
    std::int64_t attack_duration_ms = 0;
    ArrivalProcess arrival = ArrivalProcess::deterministic;

    // benign only
    std::vector<SimTime> attach_times;
    std::int64_t msg5_delay_min_ms = 5;
    std::int64_t msg5_delay_max_ms = 20;

    /// Position at `t`: linear interpolation between waypoints, clamped to the
    /// track ends.
    Vec2 position_at(SimTime t) const;
};

void validate(const UeProfile& ue);

/// Log-distance pathloss with Gaussian RSSI noise, plus distance-quantized
/// timing advance. Calibrated so that lab-scale placements land in a narrow
/// TA band where TA alone cannot separate devices.
struct RadioModel {
    double pathloss_exponent = 2.0;
    double ref_rssi_dbm_at_1m = -29.5;
    double rssi_noise_sigma_db = 1.5;
    double ta_meters_per_sample = 0.45;
};

void validate(const RadioModel& model);

/// Distances below this are clamped (with a counter, not a throw) before the
/// pathloss evaluation to keep log10 finite.
inline constexpr double kMinDistanceM = 0.1;

/// Samples one (TA, RSSI) fingerprint for `ue` as observed by a gNB at
/// `gnb_pos`: ta = round(d / ta_meters_per_sample), rssi = ref - 10*n*log10(d)
/// + tx offset + N(0, sigma). Returns the clamp flag so callers can surface a
/// degenerate-geometry warning.
Fingerprint sample_fingerprint(const RadioModel& model, const UeProfile& ue, Vec2 gnb_pos,
                               SimTime now, std::mt19937_64& rng, bool* clamped = nullptr);

struct Placement {
    Vec2 pos;
    double tx_power_offset_db = 0.0;
};

/// Solves a placement (distance along the +x axis from `gnb_pos`, plus a tx
/// power offset) whose noise-free fingerprint is exactly
/// (target_ta, target_rssi). Used to anchor scenario positions to measured
/// fingerprint tables.
Placement place_for_fingerprint(const RadioModel& model, int target_ta, double target_rssi,
                                Vec2 gnb_pos = {});

}  // namespace stormsim
