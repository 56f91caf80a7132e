#include "stormsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace stormsim {

GnbModel::GnbModel(Vec2 position, int max_ue, std::int64_t context_hold_ms)
    : position_(position), max_ue_(max_ue), context_hold_ms_(context_hold_ms) {}

const RrcContext* GnbModel::find(std::uint64_t attempt_id) const {
    auto it = active_.find(attempt_id);
    return it == active_.end() ? nullptr : &it->second;
}

const RrcContext& GnbModel::allocate(std::uint64_t attempt_id, const Fingerprint& fp,
                                     SimTime now) {
    if (full()) fail(Errc::config_error, "allocate called on a full pool");
    // RNTIs are fresh per attempt and unique among live contexts.
    while (true) {
        const std::uint16_t candidate = next_rnti_++;
        if (candidate == 0) continue;
        bool live = false;
        for (const auto& [id, ctx] : active_)
            if (ctx.rnti == candidate) live = true;
        if (!live) {
            auto [it, ok] = active_.emplace(
                attempt_id, RrcContext{attempt_id, candidate, fp, RrcState::awaiting_msg5, now});
            return it->second;
        }
    }
}

void GnbModel::complete(std::uint64_t attempt_id) {
    auto it = active_.find(attempt_id);
    if (it == active_.end() || it->second.state != RrcState::awaiting_msg5) return;
    it->second.state = RrcState::complete;
}

bool GnbModel::timeout(std::uint64_t attempt_id) {
    auto it = active_.find(attempt_id);
    if (it == active_.end() || it->second.state != RrcState::awaiting_msg5) return false;
    active_.erase(it);
    return true;
}

void enforce_rejection(GnbModel& gnb, std::uint64_t attempt_id) {
    auto it = gnb.active_.find(attempt_id);
    if (it == gnb.active_.end() || it->second.state != RrcState::awaiting_msg5)
        fail(Errc::unknown_attempt, "no live context for attempt " + std::to_string(attempt_id));
    gnb.active_.erase(it);
}

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::msg1: return "msg1";
        case EventKind::msg2: return "msg2";
        case EventKind::msg3: return "msg3";
        case EventKind::ctx_alloc: return "ctx_alloc";
        case EventKind::alloc_failed: return "alloc_failed";
        case EventKind::msg4: return "msg4";
        case EventKind::msg5: return "msg5";
        case EventKind::ctx_timeout: return "ctx_timeout";
        case EventKind::rejected: return "rejected";
        case EventKind::t300_expired: return "t300_expired";
        case EventKind::window: return "window";
        case EventKind::verdict: return "verdict";
        case EventKind::control: return "control";
        case EventKind::block_new: return "block_new";
        case EventKind::block_reinforce: return "block_reinforce";
        case EventKind::block_expired: return "block_expired";
    }
    return "unknown";
}

std::optional<SimTime> EventTrace::first_time(EventKind kind) const {
    for (const auto& e : events)
        if (e.kind == kind) return e.t;
    return std::nullopt;
}

std::int64_t EventTrace::count(EventKind kind) const {
    return std::count_if(events.begin(), events.end(),
                         [&](const Event& e) { return e.kind == kind; });
}

LoopResponse InProcessLoop::on_window(const WindowKpm& kpm) {
    auto verdict = detector_.ingest(kpm);
    auto centroids = verdict.malicious_centroids;
    return {std::move(verdict), std::move(centroids)};
}

namespace {

// Dispatch ordering at equal timestamps: window emission first, then control
// application, then supervision timers, then protocol messages.
enum Klass : int { klass_window = 0, klass_control = 1, klass_timer = 2, klass_msg = 3 };

enum class SchedKind {
    window_boundary,
    control_apply,
    ctx_timeout,
    t300,
    msg1,
    msg2,
    msg3,
    msg4,
    msg5,
};

struct SchedEntry {
    SimTime t;
    int klass = klass_msg;
    std::uint64_t seq = 0;  // stable tie-break
    SchedKind kind{};
    std::uint64_t attempt = 0;
    int ue_idx = -1;
    std::vector<Centroid> centroids;
};

struct SchedLater {
    bool operator()(const SchedEntry& a, const SchedEntry& b) const {
        if (a.t != b.t) return b.t < a.t;
        if (a.klass != b.klass) return b.klass < a.klass;
        return b.seq < a.seq;
    }
};

SchedEntry make_entry(SimTime t, int klass, SchedKind kind, std::uint64_t attempt = 0,
                      int ue_idx = -1) {
    SchedEntry entry;
    entry.t = t;
    entry.klass = klass;
    entry.kind = kind;
    entry.attempt = attempt;
    entry.ue_idx = ue_idx;
    return entry;
}

struct AttemptState {
    int ue_idx = -1;
    bool msg4_received = false;
};

}  // namespace

struct Simulator::Impl {
    Simulator& owner;
    const ScenarioConfig& config;
    GnbModel gnb;
    std::mt19937_64 rng;
    std::optional<BlockList> blocklist;
    EventTrace trace;

    std::priority_queue<SchedEntry, std::vector<SchedEntry>, SchedLater> queue;
    std::uint64_t next_seq = 0;
    std::uint64_t next_attempt = 1;
    std::map<std::uint64_t, AttemptState> attempts;

    // Current-window accumulators.
    std::uint64_t window_id = 0;
    SimTime window_start{0};
    std::int64_t n3 = 0, n4 = 0, n5 = 0;
    std::vector<KpmFingerprint> fingerprints;

    explicit Impl(Simulator& sim)
        : owner(sim),
          config(sim.config_),
          gnb(sim.config_.gnb.position, sim.config_.gnb.max_ue, sim.config_.gnb.context_hold_ms),
          rng(sim.config_.seed) {
        if (config.mitigation.enabled) blocklist.emplace();
    }

    void push(SchedEntry entry) {
        entry.seq = next_seq++;
        queue.push(std::move(entry));
    }

    void log(Event e) { trace.events.push_back(std::move(e)); }

    Event base_event(SimTime t, EventKind kind, std::uint64_t attempt) {
        Event e;
        e.t = t;
        e.kind = kind;
        e.attempt = attempt;
        if (attempt != 0) {
            auto it = attempts.find(attempt);
            if (it != attempts.end()) e.ue = config.ues[it->second.ue_idx].id;
        }
        return e;
    }

    void log_block_events(SimTime t, const std::vector<BlockEvent>& events) {
        for (const auto& be : events) {
            Event e;
            e.t = t;
            switch (be.kind) {
                case BlockEventKind::created: e.kind = EventKind::block_new; break;
                case BlockEventKind::reinforced: e.kind = EventKind::block_reinforce; break;
                case BlockEventKind::expired: e.kind = EventKind::block_expired; break;
            }
            e.mu_ta = be.entry.centroid.mu_ta;
            e.mu_rssi = be.entry.centroid.mu_rssi;
            e.c = be.entry.match_count;
            e.tau_ms = be.entry.tau_ms;
            log(std::move(e));
        }
    }

    void schedule_arrivals() {
        for (int ue_idx = 0; ue_idx < static_cast<int>(config.ues.size()); ++ue_idx) {
            const auto& ue = config.ues[ue_idx];
            if (ue.behavior == UeBehavior::malicious) {
                const SimTime end = ue.attack_start + ue.attack_duration_ms;
                if (ue.arrival == ArrivalProcess::deterministic) {
                    for (std::uint64_t k = 0;; ++k) {
                        const auto offset =
                            static_cast<std::int64_t>(std::llround(k * 1000.0 / ue.msg3_rate_hz));
                        const SimTime t = ue.attack_start + offset;
                        if (t >= end || t.ms >= config.duration_ms) break;
                        push(make_entry(t, klass_msg, SchedKind::msg1, 0, ue_idx));
                    }
                } else {
                    std::exponential_distribution<double> gap(ue.msg3_rate_hz / 1000.0);
                    double t = static_cast<double>(ue.attack_start.ms);
                    while (true) {
                        t += gap(rng);
                        const auto ti = static_cast<std::int64_t>(std::llround(t));
                        if (ti >= end.ms || ti >= config.duration_ms) break;
                        push(make_entry(SimTime{ti}, klass_msg, SchedKind::msg1, 0, ue_idx));
                    }
                }
            } else {
                for (const auto& t : ue.attach_times) {
                    if (t.ms >= config.duration_ms) continue;
                    push(make_entry(t, klass_msg, SchedKind::msg1, 0, ue_idx));
                }
            }
        }
        for (SimTime t{config.params.window_ms}; t.ms <= config.duration_ms;
             t = t + config.params.window_ms) {
            push(make_entry(t, klass_window, SchedKind::window_boundary));
        }
    }

    void on_msg1(const SchedEntry& entry) {
        const std::uint64_t attempt = next_attempt++;
        attempts[attempt] = {entry.ue_idx, false};
        log(base_event(entry.t, EventKind::msg1, attempt));
        if (config.ues[entry.ue_idx].behavior == UeBehavior::benign)
            push(make_entry(entry.t + config.t300_ms, klass_timer, SchedKind::t300, attempt));
        push(make_entry(entry.t + 2, klass_msg, SchedKind::msg2, attempt));
    }

    void on_msg2(const SchedEntry& entry) {
        log(base_event(entry.t, EventKind::msg2, entry.attempt));
        push(make_entry(entry.t + 2, klass_msg, SchedKind::msg3, entry.attempt));
    }

    void on_msg3(const SchedEntry& entry) {
        const auto& state = attempts.at(entry.attempt);
        const auto& ue = config.ues[state.ue_idx];
        bool clamped = false;
        const Fingerprint fp =
            sample_fingerprint(config.radio, ue, gnb.position(), entry.t, rng, &clamped);
        if (clamped) ++trace.degenerate_geometry_count;

        // Every decoded MSG3 is observed by the KPM counters, whatever the
        // admission outcome.
        ++n3;
        fingerprints.push_back({entry.t, fp, entry.attempt});
        auto msg3 = base_event(entry.t, EventKind::msg3, entry.attempt);
        msg3.has_fp = true;
        msg3.fp = fp;
        log(std::move(msg3));

        if (gnb.full()) {
            log(base_event(entry.t, EventKind::alloc_failed, entry.attempt));
            return;
        }
        gnb.allocate(entry.attempt, fp, entry.t);
        log(base_event(entry.t, EventKind::ctx_alloc, entry.attempt));
        push(make_entry(entry.t + gnb.context_hold_ms(), klass_timer, SchedKind::ctx_timeout,
                         entry.attempt));

        if (blocklist) {
            auto result = screen_attempt(*blocklist, fp, entry.t, config.params);
            log_block_events(entry.t, result.events);
            if (result.reject) {
                enforce_rejection(gnb, entry.attempt);
                // The reject goes out in the MSG4 slot, so it counts as a
                // setup response for the window ratios.
                ++n4;
                auto e = base_event(entry.t, EventKind::rejected, entry.attempt);
                e.mu_ta = result.matched->centroid.mu_ta;
                e.mu_rssi = result.matched->centroid.mu_rssi;
                log(std::move(e));
                return;
            }
        }
        push(make_entry(entry.t + 2, klass_msg, SchedKind::msg4, entry.attempt));
    }

    void on_msg4(const SchedEntry& entry) {
        ++n4;
        auto& state = attempts.at(entry.attempt);
        state.msg4_received = true;
        log(base_event(entry.t, EventKind::msg4, entry.attempt));
        const auto& ue = config.ues[state.ue_idx];
        if (ue.behavior == UeBehavior::benign) {
            std::uniform_int_distribution<std::int64_t> delay(ue.msg5_delay_min_ms,
                                                              ue.msg5_delay_max_ms);
            push(make_entry(entry.t + delay(rng), klass_msg, SchedKind::msg5, entry.attempt));
        }
        // A malicious UE abandons here; its context stays pinned until the
        // supervision timer fires.
    }

    void on_msg5(const SchedEntry& entry) {
        ++n5;
        log(base_event(entry.t, EventKind::msg5, entry.attempt));
        gnb.complete(entry.attempt);
    }

    void on_ctx_timeout(const SchedEntry& entry) {
        if (gnb.timeout(entry.attempt))
            log(base_event(entry.t, EventKind::ctx_timeout, entry.attempt));
    }

    void on_t300(const SchedEntry& entry) {
        const auto& state = attempts.at(entry.attempt);
        if (!state.msg4_received)
            log(base_event(entry.t, EventKind::t300_expired, entry.attempt));
    }

    void on_window(const SchedEntry& entry) {
        WindowKpm kpm;
        kpm.window_id = window_id;
        kpm.window_start = window_start;
        kpm.n3 = n3;
        kpm.n4 = n4;
        kpm.n5 = n5;
        kpm.fingerprints = std::move(fingerprints);
        fingerprints = {};
        n3 = n4 = n5 = 0;
        window_start = entry.t;
        ++window_id;

        Event we;
        we.t = entry.t;
        we.kind = EventKind::window;
        we.window_id = kpm.window_id;
        we.n3 = kpm.n3;
        we.n4 = kpm.n4;
        we.n5 = kpm.n5;
        log(std::move(we));

        WindowRecord record;
        record.window_id = kpm.window_id;
        record.start = kpm.window_start;
        record.n3 = kpm.n3;
        record.n4 = kpm.n4;
        record.n5 = kpm.n5;

        if (blocklist) {
            // Housekeeping sweep so expiries appear in the trace even when no
            // attempt triggers screening.
            log_block_events(entry.t, expire(*blocklist, entry.t));
        }

        if (owner.loop_) {
            auto response = owner.loop_->on_window(kpm);
            if (response.verdict) {
                record.have_verdict = true;
                record.verdict = response.verdict->kind;
                record.r1 = response.verdict->r1;
                record.r2 = response.verdict->r2;
                record.n_centroids = static_cast<int>(response.verdict->malicious_centroids.size());
                Event ve;
                ve.t = entry.t;
                ve.kind = EventKind::verdict;
                ve.window_id = kpm.window_id;
                ve.verdict_kind = response.verdict->kind;
                ve.r1 = response.verdict->r1;
                ve.r2 = response.verdict->r2;
                ve.note = response.verdict->note;
                ve.centroids = response.verdict->malicious_centroids;
                log(std::move(ve));
            }
            if (!response.centroids.empty()) {
                SchedEntry apply = make_entry(entry.t + config.mitigation.loop_delay_ms,
                                               klass_control, SchedKind::control_apply);
                apply.centroids = std::move(response.centroids);
                apply.attempt = kpm.window_id;  // correlates the ack
                push(std::move(apply));
            } else {
                owner.loop_->on_control_applied(kpm.window_id, blocklist ? blocklist->size() : 0);
            }
        }
        trace.windows.push_back(record);
    }

    void on_control_apply(const SchedEntry& entry) {
        if (!blocklist) return;
        log_block_events(entry.t, absorb_fingerprints(*blocklist, entry.centroids, entry.t,
                                                      config.params));
        Event e;
        e.t = entry.t;
        e.kind = EventKind::control;
        e.window_id = entry.attempt;
        e.centroids = entry.centroids;
        e.blocklist_size = blocklist->size();
        log(std::move(e));
        if (owner.loop_) owner.loop_->on_control_applied(entry.attempt, blocklist->size());
    }

    EventTrace run() {
        trace.meta.scenario_name = config.name;
        trace.meta.cell_id = config.cell_id;
        trace.meta.seed = config.seed;
        trace.meta.duration_ms = config.duration_ms;
        trace.meta.window_ms = config.params.window_ms;
        trace.meta.max_ue = config.gnb.max_ue;
        trace.meta.mitigation_enabled = config.mitigation.enabled;
        trace.meta.loop_delay_ms = config.mitigation.loop_delay_ms;
        trace.meta.attack_present = config.attack_present();
        if (trace.meta.attack_present) trace.meta.attack_start_ms = config.attack_start().ms;
        for (const auto& ue : config.ues)
            if (ue.behavior == UeBehavior::malicious) trace.meta.malicious_ues.push_back(ue.id);

        schedule_arrivals();

        while (!queue.empty()) {
            if (owner.cancel_ && owner.cancel_->load(std::memory_order_relaxed)) break;
            const SchedEntry entry = queue.top();
            queue.pop();
            if (entry.t.ms > config.duration_ms) break;
            // The scenario ends at duration_ms: only the window boundary at
            // the very end still fires.
            if (entry.t.ms == config.duration_ms && entry.kind != SchedKind::window_boundary)
                continue;
            if (owner.pacer_) owner.pacer_(entry.t);
            switch (entry.kind) {
                case SchedKind::window_boundary: on_window(entry); break;
                case SchedKind::control_apply: on_control_apply(entry); break;
                case SchedKind::ctx_timeout: on_ctx_timeout(entry); break;
                case SchedKind::t300: on_t300(entry); break;
                case SchedKind::msg1: on_msg1(entry); break;
                case SchedKind::msg2: on_msg2(entry); break;
                case SchedKind::msg3: on_msg3(entry); break;
                case SchedKind::msg4: on_msg4(entry); break;
                case SchedKind::msg5: on_msg5(entry); break;
            }
        }
        if (blocklist) trace.final_blocklist = blocklist->entries();
        if (owner.loop_) owner.loop_->on_end();
        return std::move(trace);
    }
};

Simulator::Simulator(ScenarioConfig config) : config_(std::move(config)) {
    validate(config_);
    if (config_.mitigation.enabled) {
        own_loop_ = std::make_unique<InProcessLoop>(config_.params);
        loop_ = own_loop_.get();
    }
}

void Simulator::set_loop(ClosedLoop* loop) {
    own_loop_.reset();
    loop_ = loop;
}

void Simulator::set_pacer(std::function<void(SimTime)> pacer) { pacer_ = std::move(pacer); }

void Simulator::set_cancel_flag(const std::atomic<bool>* cancel) { cancel_ = cancel; }

EventTrace Simulator::run() {
    Impl impl(*this);
    return impl.run();
}

EventTrace run_scenario(const ScenarioConfig& config) { return Simulator(config).run(); }

}  // namespace stormsim
