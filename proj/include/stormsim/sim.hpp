#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stormsim/detector.hpp"
#include "stormsim/mitigator.hpp"
#include "stormsim/scenario.hpp"

namespace stormsim {

enum class RrcState { awaiting_msg5, complete, timed_out, rejected };

/// gNB-side per-UE control-plane slot, drawn from the bounded pool.
struct RrcContext {
    std::uint64_t attempt_id = 0;
    std::uint16_t rnti = 0;
    Fingerprint fingerprint;
    RrcState state = RrcState::awaiting_msg5;
    SimTime created_at;
};

/// Bounded RRC context pool. Completed contexts keep their slot (the UE is
/// connected); timed-out and rejected contexts return theirs.
class GnbModel {
public:
    GnbModel(Vec2 position, int max_ue, std::int64_t context_hold_ms);

    Vec2 position() const noexcept { return position_; }
    int max_ue() const noexcept { return max_ue_; }
    std::int64_t context_hold_ms() const noexcept { return context_hold_ms_; }

    bool full() const noexcept { return static_cast<int>(active_.size()) >= max_ue_; }
    int occupancy() const noexcept { return static_cast<int>(active_.size()); }

    const RrcContext* find(std::uint64_t attempt_id) const;

    /// Allocates a context; the caller must have checked full().
    const RrcContext& allocate(std::uint64_t attempt_id, const Fingerprint& fp, SimTime now);
    /// MSG5 arrived: the context transitions to complete and keeps its slot.
    void complete(std::uint64_t attempt_id);
    /// Supervision timer fired while still awaiting MSG5: slot returned.
    /// Returns false if the attempt no longer holds a live awaiting context.
    bool timeout(std::uint64_t attempt_id);

private:
    friend void enforce_rejection(GnbModel& gnb, std::uint64_t attempt_id);

    Vec2 position_;
    int max_ue_;
    std::int64_t context_hold_ms_;
    std::map<std::uint64_t, RrcContext> active_;
    std::uint16_t next_rnti_ = 0x100;
};

/// Applies a blocklist rejection: the context transitions to rejected and its
/// slot returns to the pool immediately. Throws Errc::unknown_attempt when
/// the attempt has no live awaiting context.
void enforce_rejection(GnbModel& gnb, std::uint64_t attempt_id);

enum class EventKind {
    msg1,
    msg2,
    msg3,
    ctx_alloc,
    alloc_failed,
    msg4,
    msg5,
    ctx_timeout,
    rejected,
    t300_expired,
    window,
    verdict,
    control,
    block_new,
    block_reinforce,
    block_expired,
};

const char* to_string(EventKind k);

/// One trace record. Which fields are meaningful depends on the kind; the
/// JSON writer only emits the relevant ones.
struct Event {
    SimTime t;
    EventKind kind{};
    std::uint64_t attempt = 0;
    std::string ue;
    bool has_fp = false;
    Fingerprint fp;
    std::uint64_t window_id = 0;
    std::int64_t n3 = 0, n4 = 0, n5 = 0;
    LoadKind verdict_kind{};
    double r1 = 0.0, r2 = 0.0;
    VerdictNote note{};
    std::vector<Centroid> centroids;
    int c = 0;
    std::int64_t tau_ms = 0;
    double mu_ta = 0.0, mu_rssi = 0.0;
    std::size_t blocklist_size = 0;
};

struct WindowRecord {
    std::uint64_t window_id = 0;
    SimTime start;
    std::int64_t n3 = 0, n4 = 0, n5 = 0;
    bool have_verdict = false;
    LoadKind verdict{};
    double r1 = 0.0, r2 = 0.0;
    int n_centroids = 0;
};

struct TraceMeta {
    std::string scenario_name;
    std::uint32_t cell_id = 1;
    std::uint64_t seed = 0;
    std::int64_t duration_ms = 0;
    std::int64_t window_ms = 0;
    int max_ue = 0;
    bool mitigation_enabled = false;
    std::int64_t loop_delay_ms = 0;
    bool attack_present = false;
    std::int64_t attack_start_ms = 0;
    std::vector<std::string> malicious_ues;
};

struct EventTrace {
    TraceMeta meta;
    std::vector<Event> events;
    std::vector<WindowRecord> windows;
    std::vector<BlockEntry> final_blocklist;
    /// Distances clamped to the minimum geometry during fingerprint sampling.
    std::int64_t degenerate_geometry_count = 0;

    std::optional<SimTime> first_time(EventKind kind) const;
    std::int64_t count(EventKind kind) const;
};

/// What a closed-loop controller answered for one emitted window. The verdict
/// is present when the detector runs in-process; a remote loop only returns
/// the centroids carried by the control message.
struct LoopResponse {
    std::optional<DetectionVerdict> verdict;
    std::vector<Centroid> centroids;
};

class ClosedLoop {
public:
    virtual ~ClosedLoop() = default;
    virtual LoopResponse on_window(const WindowKpm& kpm) = 0;
    /// Called after a control application, with the resulting blocklist size.
    virtual void on_control_applied(std::uint64_t /*window_id*/, std::size_t /*blocklist_size*/) {}
    virtual void on_end() {}
};

/// Detector wired directly into the simulation loop.
class InProcessLoop : public ClosedLoop {
public:
    explicit InProcessLoop(const AlgorithmParams& params) : detector_(params) {}
    LoopResponse on_window(const WindowKpm& kpm) override;

private:
    Detector detector_;
};

/// Deterministic discrete-event simulator of the MSG1..MSG5 procedure with
/// the context pool, the radio model and (optionally) the mitigation loop.
class Simulator {
public:
    explicit Simulator(ScenarioConfig config);

    /// Replaces the default in-process loop (only meaningful while mitigation
    /// is enabled). The pointer must outlive run().
    void set_loop(ClosedLoop* loop);

    /// Called before each event dispatch with the upcoming sim time; used for
    /// wall-clock pacing in live mode.
    void set_pacer(std::function<void(SimTime)> pacer);

    /// Cooperative stop: when the flag turns true the run drains immediately
    /// and returns the partial trace (live mode uses this for SIGINT).
    void set_cancel_flag(const std::atomic<bool>* cancel);

    const ScenarioConfig& config() const noexcept { return config_; }

    EventTrace run();

private:
    struct Impl;
    ScenarioConfig config_;
    ClosedLoop* loop_ = nullptr;
    std::unique_ptr<InProcessLoop> own_loop_;
    std::function<void(SimTime)> pacer_;
    const std::atomic<bool>* cancel_ = nullptr;
};

/// Runs a scenario with the in-process loop (when mitigation is enabled) and
/// returns the full event trace.
EventTrace run_scenario(const ScenarioConfig& config);

}  // namespace stormsim
