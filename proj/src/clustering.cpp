#include "stormsim/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace stormsim {

int ClusterResult::noise_count() const {
    return static_cast<int>(std::count(labels.begin(), labels.end(), kNoiseLabel));
}

double distance(const Fingerprint& a, const Fingerprint& b, const AlgorithmParams& params) {
    const double dta = (a.ta - b.ta) / params.eps_ta;
    const double drssi = (a.rssi - b.rssi) / params.eps_rssi;
    return std::sqrt(dta * dta + drssi * drssi);
}

ClusterResult dbscan(std::span<const Fingerprint> points, const AlgorithmParams& params,
                     int history_capacity) {
    const int n = static_cast<int>(points.size());
    if (n == 0) fail(Errc::empty_input, "dbscan needs at least one point");
    if (history_capacity < n)
        fail(Errc::invalid_params, "history_capacity must be >= number of points");

    // O(n^2) neighbor lists; the history is small (M ~ 50) and re-clustered
    // once per window.
    std::vector<std::vector<int>> neighbors(n);
    for (int i = 0; i < n; ++i) {
        neighbors[i].push_back(i);
        for (int j = i + 1; j < n; ++j) {
            if (distance(points[i], points[j], params) <= kClusterEps) {
                neighbors[i].push_back(j);
                neighbors[j].push_back(i);
            }
        }
    }
    auto is_core = [&](int i) { return static_cast<int>(neighbors[i].size()) >= params.min_pts; };

    ClusterResult result;
    result.labels.assign(n, kNoiseLabel);
    std::vector<char> visited(n, 0);

    for (int seed = 0; seed < n; ++seed) {
        if (visited[seed] || !is_core(seed)) continue;
        const int cluster_id = static_cast<int>(result.clusters.size());
        // Expand the cluster fully before moving to the next seed; border
        // points are claimed by the first expanding cluster that reaches them.
        std::deque<int> frontier{seed};
        visited[seed] = 1;
        result.labels[seed] = cluster_id;
        while (!frontier.empty()) {
            const int p = frontier.front();
            frontier.pop_front();
            if (!is_core(p)) continue;  // border point: absorbed, not expanded
            for (int q : neighbors[p]) {
                if (result.labels[q] == kNoiseLabel) result.labels[q] = cluster_id;
                if (!visited[q]) {
                    visited[q] = 1;
                    frontier.push_back(q);
                }
            }
        }
        result.clusters.push_back({});
    }

    for (int i = 0; i < n; ++i) {
        if (result.labels[i] == kNoiseLabel) continue;
        result.clusters[result.labels[i]].indices.push_back(i);
    }
    for (auto& cluster : result.clusters) {
        cluster.size = static_cast<int>(cluster.indices.size());
        double sum_ta = 0.0, sum_rssi = 0.0;
        for (int i : cluster.indices) {
            sum_ta += points[i].ta;
            sum_rssi += points[i].rssi;
        }
        cluster.centroid = Centroid{sum_ta / cluster.size, sum_rssi / cluster.size};
        cluster.density_pk = static_cast<double>(cluster.size) / history_capacity;
    }
    return result;
}

}  // namespace stormsim
