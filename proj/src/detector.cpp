#include "stormsim/detector.hpp"

namespace stormsim {

FingerprintHistory::FingerprintHistory(int capacity) : capacity_(capacity) {
    if (capacity < 1) fail(Errc::invalid_params, "history capacity must be >= 1");
}

void FingerprintHistory::push(SimTime t, const Fingerprint& fp) {
    if (static_cast<int>(buffer_.size()) == capacity_) buffer_.pop_front();
    buffer_.emplace_back(t, fp);
}

std::vector<Fingerprint> FingerprintHistory::points() const {
    std::vector<Fingerprint> out;
    out.reserve(buffer_.size());
    for (const auto& [t, fp] : buffer_) out.push_back(fp);
    return out;
}

namespace {

void check_kpm(const WindowKpm& kpm) {
    if (kpm.n3 < 0 || kpm.n4 < 0 || kpm.n5 < 0)
        fail(Errc::invalid_kpm, "negative message count");
    if (static_cast<std::int64_t>(kpm.fingerprints.size()) != kpm.n3)
        fail(Errc::invalid_kpm, "fingerprint count must equal n3");
}

}  // namespace

DetectionVerdict ingest_window(const WindowKpm& kpm, FingerprintHistory& history,
                               const AlgorithmParams& params) {
    check_kpm(kpm);
    if (history.capacity() != params.history_size_m)
        fail(Errc::invalid_params, "history capacity does not match params.history_size_m");

    // Fingerprints enter the history regardless of the verdict; the onset of
    // an attack spans windows.
    for (const auto& row : kpm.fingerprints) history.push(row.t, row.fp);

    DetectionVerdict verdict;
    verdict.r1 = kpm.n3 == 0 ? 1.0 : static_cast<double>(kpm.n5) / static_cast<double>(kpm.n3);
    verdict.r2 = kpm.n4 == 0 ? 1.0 : static_cast<double>(kpm.n5) / static_cast<double>(kpm.n4);

    if (kpm.n3 <= params.t1) {
        verdict.kind = LoadKind::normal_load;
        return verdict;
    }
    if (!(verdict.r1 < params.t2 && verdict.r2 < params.t2)) {
        // Both ratios must be low to suspect an attack; the mixed case is
        // treated as high load.
        verdict.kind = LoadKind::high_load;
        return verdict;
    }

    const auto points = history.points();
    const auto clusters = dbscan(points, params, history.capacity());
    const double threshold = t3_threshold(params, static_cast<int>(clusters.clusters.size()));
    for (const auto& cluster : clusters.clusters) {
        if (cluster.density_pk > threshold) verdict.malicious_centroids.push_back(cluster.centroid);
    }
    if (verdict.malicious_centroids.empty()) {
        // The counts look like a storm but no single fingerprint dominates the
        // history, so there is nothing for the mitigator to block.
        verdict.kind = LoadKind::high_load;
        verdict.note = VerdictNote::no_dense_cluster;
    } else {
        verdict.kind = LoadKind::attack_detected;
    }
    return verdict;
}

}  // namespace stormsim
