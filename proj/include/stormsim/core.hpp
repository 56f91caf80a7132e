#pragma once

#include <cstdint>
#include <vector>

#include "stormsim/errors.hpp"
#include "stormsim/sim_time.hpp"

namespace stormsim {

/// One (TA, RSSI) observation attributed to a single MSG3. TA is kept in raw
/// 3GPP samples (integer); RSSI in dBm.
struct Fingerprint {
    int ta = 0;
    double rssi = 0.0;

    bool operator==(const Fingerprint&) const = default;
};

/// RSSI plausibility window enforced when validating decoded fingerprints.
inline constexpr double kRssiMinDbm = -140.0;
inline constexpr double kRssiMaxDbm = 0.0;

void validate(const Fingerprint& fp);

/// Arithmetic mean of a cluster of fingerprints. TA turns fractional here
/// (means of integer samples).
struct Centroid {
    double mu_ta = 0.0;
    double mu_rssi = 0.0;

    bool operator==(const Centroid&) const = default;
};

/// One fingerprint row carried inside a window KPM report.
struct KpmFingerprint {
    SimTime t;
    Fingerprint fp;
    std::uint64_t attempt_id = 0;

    bool operator==(const KpmFingerprint&) const = default;
};

/// Per-window telemetry crossing the gNB -> detector boundary. One
/// fingerprint per MSG3 observed in the window; counts for messages of one
/// procedure may straddle windows, so no cross-count relation is enforced
/// beyond non-negativity.
struct WindowKpm {
    std::uint64_t window_id = 0;
    SimTime window_start;
    std::int64_t n3 = 0;
    std::int64_t n4 = 0;
    std::int64_t n5 = 0;
    std::vector<KpmFingerprint> fingerprints;

    bool operator==(const WindowKpm&) const = default;
};

enum class LoadKind { normal_load, high_load, attack_detected };

const char* to_string(LoadKind k);

enum class VerdictNote {
    none,
    /// The ratio branch fired but no cluster cleared the density threshold;
    /// the verdict was downgraded to high load.
    no_dense_cluster,
};

struct DetectionVerdict {
    LoadKind kind = LoadKind::normal_load;
    std::vector<Centroid> malicious_centroids;  // non-empty iff attack_detected
    double r1 = 0.0;
    double r2 = 0.0;
    VerdictNote note = VerdictNote::none;
};

enum class T3Mode { fixed, dynamic };

/// Where block-entry reinforcement happens: on every fingerprint set received
/// from the detector, or on every matched connection attempt.
enum class ReinforceOn { detector, attempt };

struct AlgorithmParams {
    double eps_rssi = 4.0;  // dB; match-box half width and metric scale
    double eps_ta = 1.0;    // TA samples
    int min_pts = 3;
    int t1 = 3;        // MSG3 count threshold
    double t2 = 0.25;  // completion-ratio floor
    double t3 = 0.5;   // cluster density threshold (fixed mode)
    T3Mode t3_mode = T3Mode::fixed;
    std::int64_t window_ms = 100;
    int history_size_m = 50;
    std::int64_t tau0_ms = 500;
    std::int64_t tau_max_ms = 10'000;
    std::int64_t delta_ms = 500;
    int k_reinforce = 5;
    ReinforceOn reinforce_on = ReinforceOn::detector;
};

AlgorithmParams default_params();

/// Throws Errc::invalid_params naming the offending field.
void validate(const AlgorithmParams& p);

/// Density threshold in effect for a pass that produced `n_clusters` clusters.
double t3_threshold(const AlgorithmParams& p, int n_clusters);

}  // namespace stormsim
