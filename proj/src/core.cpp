#include "stormsim/core.hpp"

#include <algorithm>
#include <cmath>

namespace stormsim {

const char* to_string(Errc c) {
    switch (c) {
        case Errc::invalid_params: return "invalid_params";
        case Errc::invalid_kpm: return "invalid_kpm";
        case Errc::empty_input: return "empty_input";
        case Errc::config_error: return "config_error";
        case Errc::unknown_attempt: return "unknown_attempt";
        case Errc::degenerate_geometry: return "degenerate_geometry";
        case Errc::frame_too_large: return "frame_too_large";
        case Errc::malformed_body: return "malformed_body";
        case Errc::unknown_type: return "unknown_type";
        case Errc::unknown_version: return "unknown_version";
        case Errc::unknown_cell: return "unknown_cell";
        case Errc::duplicate_subscription: return "duplicate_subscription";
        case Errc::incomplete_trace: return "incomplete_trace";
        case Errc::io_error: return "io_error";
    }
    return "unknown_error";
}

const char* to_string(LoadKind k) {
    switch (k) {
        case LoadKind::normal_load: return "normal";
        case LoadKind::high_load: return "high_load";
        case LoadKind::attack_detected: return "attack";
    }
    return "unknown";
}

void validate(const Fingerprint& fp) {
    if (fp.ta < 0) fail(Errc::invalid_params, "fingerprint ta must be >= 0");
    if (!std::isfinite(fp.rssi) || fp.rssi < kRssiMinDbm || fp.rssi > kRssiMaxDbm)
        fail(Errc::invalid_params, "fingerprint rssi outside plausible dBm range");
}

AlgorithmParams default_params() { return AlgorithmParams{}; }

void validate(const AlgorithmParams& p) {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) fail(Errc::invalid_params, std::string(name) + " must be > 0");
    };
    positive(p.eps_rssi, "eps_rssi");
    positive(p.eps_ta, "eps_ta");
    positive(static_cast<double>(p.t1), "t1");
    positive(static_cast<double>(p.window_ms), "window_ms");
    positive(static_cast<double>(p.history_size_m), "history_size_m");
    positive(static_cast<double>(p.tau0_ms), "tau0_ms");
    positive(static_cast<double>(p.tau_max_ms), "tau_max_ms");
    positive(static_cast<double>(p.delta_ms), "delta_ms");
    positive(static_cast<double>(p.k_reinforce), "k_reinforce");
    if (p.min_pts < 2) fail(Errc::invalid_params, "min_pts must be >= 2");
    if (!(p.t2 > 0.0 && p.t2 <= 1.0)) fail(Errc::invalid_params, "t2 must be in (0,1]");
    if (!(p.t3 > 0.0 && p.t3 <= 1.0)) fail(Errc::invalid_params, "t3 must be in (0,1]");
    if (p.tau0_ms > p.tau_max_ms) fail(Errc::invalid_params, "tau0_ms must be <= tau_max_ms");
}

double t3_threshold(const AlgorithmParams& p, int n_clusters) {
    if (p.t3_mode == T3Mode::fixed) return p.t3;
    return std::max(0.3, 1.0 / (1.0 + std::max(0, n_clusters)));
}

}  // namespace stormsim
