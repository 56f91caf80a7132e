#pragma once

// Brute-force neighbor-graph clustering reference, used only by tests as an
// independent oracle for the production implementation. It never touches the
// queue-based code path: cores come from exhaustive neighbor counting,
// core-core connectivity from union-find, and border points go to the
// adjacent component whose first core appears earliest in input order (the
// documented tie-break).

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "stormsim/clustering.hpp"

namespace reference {

struct Partition {
    std::vector<std::vector<int>> clusters;  // sorted index sets
    std::vector<int> noise;
};

inline Partition canonical(const std::vector<int>& labels) {
    std::map<int, std::vector<int>> by_label;
    Partition p;
    for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
        if (labels[i] == stormsim::kNoiseLabel) p.noise.push_back(i);
        else by_label[labels[i]].push_back(i);
    }
    for (auto& [label, indices] : by_label) p.clusters.push_back(indices);
    // Order clusters by smallest member so numbering differences vanish.
    std::sort(p.clusters.begin(), p.clusters.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return p;
}

inline bool operator==(const Partition& a, const Partition& b) {
    return a.clusters == b.clusters && a.noise == b.noise;
}

inline std::vector<int> cluster_labels(const std::vector<stormsim::Fingerprint>& points,
                                       const stormsim::AlgorithmParams& params) {
    const int n = static_cast<int>(points.size());
    std::vector<std::vector<int>> neighbors(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (stormsim::distance(points[i], points[j], params) <= stormsim::kClusterEps)
                neighbors[i].push_back(j);  // includes i itself

    std::vector<bool> core(n, false);
    for (int i = 0; i < n; ++i) core[i] = static_cast<int>(neighbors[i].size()) >= params.min_pts;

    // Union-find over core-core edges.
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (int i = 0; i < n; ++i) {
        if (!core[i]) continue;
        for (int j : neighbors[i])
            if (core[j]) parent[find(i)] = find(j);
    }

    // Components numbered by the input order of their first core point.
    std::map<int, int> component_id;
    std::vector<int> labels(n, stormsim::kNoiseLabel);
    for (int i = 0; i < n; ++i) {
        if (!core[i]) continue;
        const int root = find(i);
        if (!component_id.contains(root))
            component_id[root] = static_cast<int>(component_id.size());
        labels[i] = component_id[root];
    }

    // Border points: adjacent to >= 1 core, assigned to the adjacent
    // component with the smallest id (= earliest-seeded cluster).
    for (int i = 0; i < n; ++i) {
        if (core[i]) continue;
        int best = stormsim::kNoiseLabel;
        for (int j : neighbors[i]) {
            if (j == i || !core[j]) continue;
            const int id = component_id[find(j)];
            if (best == stormsim::kNoiseLabel || id < best) best = id;
        }
        labels[i] = best;
    }
    return labels;
}

/// Random mixture instances: a few blobs plus scattered noise.
inline std::vector<stormsim::Fingerprint> random_instance(std::mt19937_64& rng, int max_points) {
    std::uniform_int_distribution<int> n_blobs(1, 4);
    std::uniform_int_distribution<int> ta_center(28, 36);
    std::uniform_real_distribution<double> rssi_center(-60.0, -35.0);
    std::uniform_real_distribution<double> spread(0.3, 6.0);
    std::uniform_int_distribution<int> n_points(1, max_points);

    const int total = n_points(rng);
    const int blobs = n_blobs(rng);
    struct Blob {
        int ta;
        double rssi;
        double sigma;
    };
    std::vector<Blob> centers;
    for (int b = 0; b < blobs; ++b)
        centers.push_back({ta_center(rng), rssi_center(rng), spread(rng)});

    std::vector<stormsim::Fingerprint> points;
    std::uniform_int_distribution<int> pick(0, blobs);  // == blobs means noise
    std::uniform_int_distribution<int> dta(-1, 1);
    for (int i = 0; i < total; ++i) {
        const int which = pick(rng);
        if (which == blobs) {
            std::uniform_int_distribution<int> ta(25, 45);
            std::uniform_real_distribution<double> rssi(-90.0, -20.0);
            points.push_back({ta(rng), rssi(rng)});
        } else {
            const auto& blob = centers[which];
            std::normal_distribution<double> jitter(0.0, blob.sigma);
            points.push_back({std::max(0, blob.ta + dta(rng)), blob.rssi + jitter(rng)});
        }
    }
    return points;
}

}  // namespace reference
