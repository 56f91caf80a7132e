#pragma once

#include <optional>
#include <span>
#include <vector>

#include "stormsim/core.hpp"

namespace stormsim {

/// One blocked fingerprint: the centroid received from the detector, a match
/// counter, the aging timeout and the time of the most recent match.
struct BlockEntry {
    Centroid centroid;
    int match_count = 1;      // c
    std::int64_t tau_ms = 0;  // stays within [tau0_ms, tau_max_ms]
    SimTime t_last;
};

enum class BlockEventKind { created, reinforced, expired };

/// Block-list state change, reported so callers can trace aging trajectories.
struct BlockEvent {
    BlockEventKind kind;
    BlockEntry entry;  // state after the event
};

struct ScreenResult;

/// Insertion-ordered block list. Matching precedence is first-inserted-wins;
/// centroids that land inside the match box of an existing entry are merged
/// into it instead of inserted.
class BlockList {
public:
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t size() const noexcept { return entries_.size(); }
    const std::vector<BlockEntry>& entries() const noexcept { return entries_; }

private:
    std::vector<BlockEntry> entries_;

    friend std::vector<BlockEvent> absorb_fingerprints(BlockList&, std::span<const Centroid>,
                                                       SimTime, const AlgorithmParams&);
    friend std::vector<BlockEvent> expire(BlockList&, SimTime);
    friend ScreenResult screen_attempt(BlockList&, const Fingerprint&, SimTime,
                                       const AlgorithmParams&);
};

/// Whether fingerprint f falls inside the match box of centroid mu:
/// |TA - mu_TA| <= eps_ta and |RSSI - mu_RSSI| <= eps_rssi.
bool matches(const Centroid& mu, const Fingerprint& f, const AlgorithmParams& params);
bool matches(const Centroid& mu, const Centroid& other, const AlgorithmParams& params);

/// Folds a malicious fingerprint set from the detector into the block list.
/// Matching entries are reinforced (c += 1, t_last = now, and every
/// k_reinforce-th match grows tau by delta_ms up to tau_max_ms); new
/// centroids are inserted with (c=1, tau=tau0_ms).
std::vector<BlockEvent> absorb_fingerprints(BlockList& bl, std::span<const Centroid> f_set,
                                            SimTime now, const AlgorithmParams& params);

/// Removes exactly the entries with now - t_last >= tau (inclusive boundary).
std::vector<BlockEvent> expire(BlockList& bl, SimTime now);

struct ScreenResult {
    bool reject = false;
    std::optional<BlockEntry> matched;  // entry that matched, post-update
    std::vector<BlockEvent> events;     // expiries, plus attempt-mode reinforcement
};

/// Decides accept/reject for one connection attempt. Expiry is applied first;
/// the first matching entry in insertion order wins. With
/// params.reinforce_on == attempt, a match also reinforces the entry;
/// otherwise screening never mutates counters.
ScreenResult screen_attempt(BlockList& bl, const Fingerprint& f, SimTime now,
                            const AlgorithmParams& params);

}  // namespace stormsim
