#include "stormsim/radio.hpp"

#include <algorithm>
#include <cmath>

namespace stormsim {

double distance_m(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

Vec2 UeProfile::position_at(SimTime t) const {
    if (track.empty()) return {};
    if (t <= track.front().t) return track.front().pos;
    if (t >= track.back().t) return track.back().pos;
    for (std::size_t i = 1; i < track.size(); ++i) {
        if (t <= track[i].t) {
            const auto& a = track[i - 1];
            const auto& b = track[i];
            const double span = static_cast<double>(b.t - a.t);
            const double w = span == 0.0 ? 1.0 : static_cast<double>(t - a.t) / span;
            return {a.pos.x + w * (b.pos.x - a.pos.x), a.pos.y + w * (b.pos.y - a.pos.y)};
        }
    }
    return track.back().pos;
}

void validate(const UeProfile& ue) {
    if (ue.id.empty()) fail(Errc::config_error, "ue id must be non-empty");
    if (ue.track.empty()) fail(Errc::config_error, "ue " + ue.id + " needs at least one waypoint");
    for (std::size_t i = 1; i < ue.track.size(); ++i) {
        if (ue.track[i].t <= ue.track[i - 1].t)
            fail(Errc::config_error, "ue " + ue.id + " waypoint times must be strictly increasing");
    }
    if (ue.behavior == UeBehavior::malicious) {
        if (!(ue.msg3_rate_hz > 0.0))
            fail(Errc::config_error, "malicious ue " + ue.id + " needs msg3_rate_hz > 0");
        if (ue.attack_duration_ms <= 0)
            fail(Errc::config_error, "malicious ue " + ue.id + " needs attack_duration_ms > 0");
    } else {
        if (ue.msg5_delay_min_ms < 0 || ue.msg5_delay_max_ms < ue.msg5_delay_min_ms)
            fail(Errc::config_error, "ue " + ue.id + " has an invalid msg5 delay range");
    }
    if (ue.rssi_sigma_override_db && *ue.rssi_sigma_override_db < 0.0)
        fail(Errc::config_error, "ue " + ue.id + " rssi sigma override must be >= 0");
}

void validate(const RadioModel& model) {
    if (!(model.pathloss_exponent > 0.0))
        fail(Errc::config_error, "pathloss_exponent must be > 0");
    if (model.rssi_noise_sigma_db < 0.0) fail(Errc::config_error, "rssi sigma must be >= 0");
    if (!(model.ta_meters_per_sample > 0.0))
        fail(Errc::config_error, "ta_meters_per_sample must be > 0");
}

Fingerprint sample_fingerprint(const RadioModel& model, const UeProfile& ue, Vec2 gnb_pos,
                               SimTime now, std::mt19937_64& rng, bool* clamped) {
    double d = distance_m(ue.position_at(now), gnb_pos);
    if (clamped) *clamped = d < kMinDistanceM;
    d = std::max(d, kMinDistanceM);

    Fingerprint fp;
    fp.ta = static_cast<int>(std::llround(d / model.ta_meters_per_sample));
    const double sigma = ue.rssi_sigma_override_db.value_or(model.rssi_noise_sigma_db);
    double rssi = model.ref_rssi_dbm_at_1m - 10.0 * model.pathloss_exponent * std::log10(d) +
                  ue.tx_power_offset_db;
    if (sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, sigma);
        rssi += noise(rng);
    }
    fp.rssi = std::clamp(rssi, kRssiMinDbm, kRssiMaxDbm);
    return fp;
}

Placement place_for_fingerprint(const RadioModel& model, int target_ta, double target_rssi,
                                Vec2 gnb_pos) {
    // Center of the TA quantization bin, so the rounded TA is stable.
    const double d = target_ta * model.ta_meters_per_sample;
    const double base = model.ref_rssi_dbm_at_1m - 10.0 * model.pathloss_exponent * std::log10(d);
    return Placement{{gnb_pos.x + d, gnb_pos.y}, target_rssi - base};
}

}  // namespace stormsim
