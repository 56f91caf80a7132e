#include "stormsim/trace_io.hpp"

#include <fstream>
#include <sstream>

#include "stormsim/json_io.hpp"

namespace stormsim {

namespace {

json centroids_to_json(const std::vector<Centroid>& centroids) {
    json arr = json::array();
    for (const auto& c : centroids) arr.push_back({c.mu_ta, c.mu_rssi});
    return arr;
}

std::vector<Centroid> centroids_from_json(const json& arr) {
    std::vector<Centroid> out;
    for (const auto& row : arr) out.push_back({row.at(0).get<double>(), row.at(1).get<double>()});
    return out;
}

json meta_to_json(const EventTrace& trace) {
    const auto& m = trace.meta;
    json j{{"ev", "meta"},
           {"scenario", m.scenario_name},
           {"cell_id", m.cell_id},
           {"seed", m.seed},
           {"duration_ms", m.duration_ms},
           {"window_ms", m.window_ms},
           {"max_ue", m.max_ue},
           {"mitigation", m.mitigation_enabled},
           {"loop_delay_ms", m.loop_delay_ms},
           {"attack_present", m.attack_present},
           {"attack_start_ms", m.attack_start_ms},
           {"malicious_ues", m.malicious_ues},
           {"degenerate_geometry_count", trace.degenerate_geometry_count},
           {"final_blocklist", trace.final_blocklist}};
    return j;
}

json event_to_json(const Event& e) {
    json j{{"t", e.t.ms}, {"ev", to_string(e.kind)}};
    switch (e.kind) {
        case EventKind::msg1:
        case EventKind::msg2:
        case EventKind::msg4:
        case EventKind::msg5:
        case EventKind::ctx_alloc:
        case EventKind::alloc_failed:
        case EventKind::ctx_timeout:
        case EventKind::t300_expired:
            j["attempt"] = e.attempt;
            j["ue"] = e.ue;
            break;
        case EventKind::msg3:
            j["attempt"] = e.attempt;
            j["ue"] = e.ue;
            j["ta"] = e.fp.ta;
            j["rssi"] = e.fp.rssi;
            break;
        case EventKind::rejected:
            j["attempt"] = e.attempt;
            j["ue"] = e.ue;
            j["mu_ta"] = e.mu_ta;
            j["mu_rssi"] = e.mu_rssi;
            break;
        case EventKind::window:
            j["window_id"] = e.window_id;
            j["n3"] = e.n3;
            j["n4"] = e.n4;
            j["n5"] = e.n5;
            break;
        case EventKind::verdict:
            j["window_id"] = e.window_id;
            j["kind"] = to_string(e.verdict_kind);
            j["r1"] = e.r1;
            j["r2"] = e.r2;
            j["centroids"] = centroids_to_json(e.centroids);
            if (e.note == VerdictNote::no_dense_cluster) j["note"] = "no_dense_cluster";
            break;
        case EventKind::control:
            j["window_id"] = e.window_id;
            j["centroids"] = centroids_to_json(e.centroids);
            j["blocklist_size"] = e.blocklist_size;
            break;
        case EventKind::block_new:
        case EventKind::block_reinforce:
        case EventKind::block_expired:
            j["mu_ta"] = e.mu_ta;
            j["mu_rssi"] = e.mu_rssi;
            j["c"] = e.c;
            j["tau_ms"] = e.tau_ms;
            break;
    }
    return j;
}

EventKind kind_from_string(const std::string& s) {
    for (int k = 0; k <= static_cast<int>(EventKind::block_expired); ++k) {
        const auto kind = static_cast<EventKind>(k);
        if (s == to_string(kind)) return kind;
    }
    fail(Errc::incomplete_trace, "unknown event kind " + s);
}

LoadKind load_kind_from_string(const std::string& s) {
    if (s == "normal") return LoadKind::normal_load;
    if (s == "high_load") return LoadKind::high_load;
    if (s == "attack") return LoadKind::attack_detected;
    fail(Errc::incomplete_trace, "unknown verdict kind " + s);
}

Event event_from_json(const json& j) {
    Event e;
    e.t.ms = j.at("t").get<std::int64_t>();
    e.kind = kind_from_string(j.at("ev").get<std::string>());
    if (j.contains("attempt")) j.at("attempt").get_to(e.attempt);
    if (j.contains("ue")) j.at("ue").get_to(e.ue);
    if (j.contains("ta")) {
        e.has_fp = true;
        j.at("ta").get_to(e.fp.ta);
        j.at("rssi").get_to(e.fp.rssi);
    }
    if (j.contains("window_id")) j.at("window_id").get_to(e.window_id);
    if (j.contains("n3")) j.at("n3").get_to(e.n3);
    if (j.contains("n4")) j.at("n4").get_to(e.n4);
    if (j.contains("n5")) j.at("n5").get_to(e.n5);
    if (e.kind == EventKind::verdict) {
        e.verdict_kind = load_kind_from_string(j.at("kind").get<std::string>());
        j.at("r1").get_to(e.r1);
        j.at("r2").get_to(e.r2);
        e.centroids = centroids_from_json(j.at("centroids"));
        if (j.contains("note")) e.note = VerdictNote::no_dense_cluster;
    }
    if (e.kind == EventKind::control) {
        e.centroids = centroids_from_json(j.at("centroids"));
        j.at("blocklist_size").get_to(e.blocklist_size);
    }
    if (j.contains("mu_ta")) j.at("mu_ta").get_to(e.mu_ta);
    if (j.contains("mu_rssi")) j.at("mu_rssi").get_to(e.mu_rssi);
    if (j.contains("c")) j.at("c").get_to(e.c);
    if (j.contains("tau_ms")) j.at("tau_ms").get_to(e.tau_ms);
    return e;
}

}  // namespace

std::string event_json(const Event& e) { return event_to_json(e).dump(); }

Event make_verdict_event(SimTime t, std::uint64_t window_id, const DetectionVerdict& verdict) {
    Event e;
    e.t = t;
    e.kind = EventKind::verdict;
    e.window_id = window_id;
    e.verdict_kind = verdict.kind;
    e.r1 = verdict.r1;
    e.r2 = verdict.r2;
    e.note = verdict.note;
    e.centroids = verdict.malicious_centroids;
    return e;
}

void write_trace_jsonl(const EventTrace& trace, std::ostream& out) {
    out << meta_to_json(trace).dump() << "\n";
    for (const auto& e : trace.events) out << event_to_json(e).dump() << "\n";
}

void write_trace_jsonl(const EventTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(Errc::io_error, "cannot write " + path);
    write_trace_jsonl(trace, out);
}

EventTrace read_trace_jsonl(std::istream& in) {
    EventTrace trace;
    std::string line;
    bool have_meta = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            fail(Errc::incomplete_trace, std::string("bad trace line: ") + e.what());
        }
        if (j.at("ev") == "meta") {
            auto& m = trace.meta;
            j.at("scenario").get_to(m.scenario_name);
            j.at("cell_id").get_to(m.cell_id);
            j.at("seed").get_to(m.seed);
            j.at("duration_ms").get_to(m.duration_ms);
            j.at("window_ms").get_to(m.window_ms);
            j.at("max_ue").get_to(m.max_ue);
            j.at("mitigation").get_to(m.mitigation_enabled);
            j.at("loop_delay_ms").get_to(m.loop_delay_ms);
            j.at("attack_present").get_to(m.attack_present);
            j.at("attack_start_ms").get_to(m.attack_start_ms);
            j.at("malicious_ues").get_to(m.malicious_ues);
            j.at("degenerate_geometry_count").get_to(trace.degenerate_geometry_count);
            trace.final_blocklist = j.at("final_blocklist").get<std::vector<BlockEntry>>();
            have_meta = true;
            continue;
        }
        const Event e = event_from_json(j);
        trace.events.push_back(e);
        if (e.kind == EventKind::window) {
            WindowRecord record;
            record.window_id = e.window_id;
            record.start = SimTime{e.t.ms - trace.meta.window_ms};
            record.n3 = e.n3;
            record.n4 = e.n4;
            record.n5 = e.n5;
            trace.windows.push_back(record);
        }
        if (e.kind == EventKind::verdict && !trace.windows.empty()) {
            auto& record = trace.windows.back();
            record.have_verdict = true;
            record.verdict = e.verdict_kind;
            record.r1 = e.r1;
            record.r2 = e.r2;
            record.n_centroids = static_cast<int>(e.centroids.size());
        }
    }
    if (!have_meta) fail(Errc::incomplete_trace, "trace has no meta line");
    return trace;
}

EventTrace read_trace_jsonl_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::io_error, "cannot open " + path);
    return read_trace_jsonl(in);
}

void write_windows_csv(const EventTrace& trace, std::ostream& out) {
    out << "window_id,start_ms,n3,n4,n5,r1,r2,verdict,n_centroids\n";
    for (const auto& w : trace.windows) {
        out << w.window_id << "," << w.start.ms << "," << w.n3 << "," << w.n4 << "," << w.n5
            << ",";
        if (w.have_verdict) {
            out << w.r1 << "," << w.r2 << "," << to_string(w.verdict) << "," << w.n_centroids;
        } else {
            out << ",,,";
        }
        out << "\n";
    }
}

void write_windows_csv(const EventTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(Errc::io_error, "cannot write " + path);
    write_windows_csv(trace, out);
}

}  // namespace stormsim
