#pragma once

#include <span>
#include <vector>

#include "stormsim/core.hpp"

namespace stormsim {

inline constexpr int kNoiseLabel = -1;

/// Neighborhood radius under the per-axis normalized metric. With the axes
/// scaled by (eps_ta, eps_rssi) this makes the DBSCAN neighborhood coincide
/// in scale with the mitigation match box.
inline constexpr double kClusterEps = 1.0;

struct Cluster {
    std::vector<int> indices;  // into the input span, ascending
    int size = 0;
    Centroid centroid;
    double density_pk = 0.0;  // size / history capacity
};

struct ClusterResult {
    std::vector<int> labels;        // per input point: cluster index or kNoiseLabel
    std::vector<Cluster> clusters;  // ordered by first core point in input order

    int noise_count() const;
};

/// Per-axis normalized Euclidean distance between two fingerprints:
/// sqrt(((a.ta-b.ta)/eps_ta)^2 + ((a.rssi-b.rssi)/eps_rssi)^2).
double distance(const Fingerprint& a, const Fingerprint& b, const AlgorithmParams& params);

/// DBSCAN over a fingerprint snapshot. Points are neighbors when their
/// normalized distance is <= kClusterEps; a core point has at least
/// params.min_pts points (itself included) in its neighborhood. Border points
/// reachable from several clusters go to the cluster whose seed core appears
/// first in input order, which keeps labels deterministic. Cluster densities
/// are computed against `history_capacity`, not the current fill.
ClusterResult dbscan(std::span<const Fingerprint> points, const AlgorithmParams& params,
                     int history_capacity);

}  // namespace stormsim
