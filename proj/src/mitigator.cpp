#include "stormsim/mitigator.hpp"

#include <algorithm>
#include <cmath>

namespace stormsim {

bool matches(const Centroid& mu, const Fingerprint& f, const AlgorithmParams& params) {
    return std::abs(f.ta - mu.mu_ta) <= params.eps_ta &&
           std::abs(f.rssi - mu.mu_rssi) <= params.eps_rssi;
}

bool matches(const Centroid& mu, const Centroid& other, const AlgorithmParams& params) {
    return std::abs(other.mu_ta - mu.mu_ta) <= params.eps_ta &&
           std::abs(other.mu_rssi - mu.mu_rssi) <= params.eps_rssi;
}

namespace {

void reinforce(BlockEntry& entry, SimTime now, const AlgorithmParams& params) {
    entry.match_count += 1;
    entry.t_last = now;
    if (entry.match_count % params.k_reinforce == 0)
        entry.tau_ms = std::min(entry.tau_ms + params.delta_ms, params.tau_max_ms);
}

}  // namespace

std::vector<BlockEvent> absorb_fingerprints(BlockList& bl, std::span<const Centroid> f_set,
                                            SimTime now, const AlgorithmParams& params) {
    std::vector<BlockEvent> events;
    for (const Centroid& mu : f_set) {
        auto it = std::find_if(bl.entries_.begin(), bl.entries_.end(),
                               [&](const BlockEntry& e) { return matches(e.centroid, mu, params); });
        if (it != bl.entries_.end()) {
            // Jittering centroids reinforce the existing entry; the older
            // centroid is kept.
            reinforce(*it, now, params);
            events.push_back({BlockEventKind::reinforced, *it});
        } else {
            BlockEntry entry{mu, 1, params.tau0_ms, now};
            bl.entries_.push_back(entry);
            events.push_back({BlockEventKind::created, entry});
        }
    }
    return events;
}

std::vector<BlockEvent> expire(BlockList& bl, SimTime now) {
    std::vector<BlockEvent> events;
    std::erase_if(bl.entries_, [&](const BlockEntry& e) {
        if (now - e.t_last >= e.tau_ms) {
            events.push_back({BlockEventKind::expired, e});
            return true;
        }
        return false;
    });
    return events;
}

ScreenResult screen_attempt(BlockList& bl, const Fingerprint& f, SimTime now,
                            const AlgorithmParams& params) {
    ScreenResult result;
    result.events = expire(bl, now);
    auto it = std::find_if(bl.entries_.begin(), bl.entries_.end(),
                           [&](const BlockEntry& e) { return matches(e.centroid, f, params); });
    if (it == bl.entries_.end()) return result;

    if (params.reinforce_on == ReinforceOn::attempt) {
        reinforce(*it, now, params);
        result.events.push_back({BlockEventKind::reinforced, *it});
    }
    result.reject = true;
    result.matched = *it;
    return result;
}

}  // namespace stormsim
