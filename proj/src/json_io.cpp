#include "stormsim/json_io.hpp"

namespace stormsim {

void to_json(json& j, const Fingerprint& fp) { j = json{{"ta", fp.ta}, {"rssi", fp.rssi}}; }

void from_json(const json& j, Fingerprint& fp) {
    j.at("ta").get_to(fp.ta);
    j.at("rssi").get_to(fp.rssi);
}

void to_json(json& j, const Centroid& c) { j = json{{"mu_ta", c.mu_ta}, {"mu_rssi", c.mu_rssi}}; }

void from_json(const json& j, Centroid& c) {
    j.at("mu_ta").get_to(c.mu_ta);
    j.at("mu_rssi").get_to(c.mu_rssi);
}

void to_json(json& j, const KpmFingerprint& row) {
    j = json{{"t_ms", row.t.ms}, {"ta", row.fp.ta}, {"rssi", row.fp.rssi},
             {"attempt_id", row.attempt_id}};
}

void from_json(const json& j, KpmFingerprint& row) {
    row.t.ms = j.at("t_ms").get<std::int64_t>();
    j.at("ta").get_to(row.fp.ta);
    j.at("rssi").get_to(row.fp.rssi);
    j.at("attempt_id").get_to(row.attempt_id);
}

void to_json(json& j, const WindowKpm& kpm) {
    j = json{{"window_id", kpm.window_id}, {"window_start_ms", kpm.window_start.ms},
             {"n3", kpm.n3},               {"n4", kpm.n4},
             {"n5", kpm.n5},               {"fingerprints", kpm.fingerprints}};
}

void from_json(const json& j, WindowKpm& kpm) {
    j.at("window_id").get_to(kpm.window_id);
    kpm.window_start.ms = j.at("window_start_ms").get<std::int64_t>();
    j.at("n3").get_to(kpm.n3);
    j.at("n4").get_to(kpm.n4);
    j.at("n5").get_to(kpm.n5);
    j.at("fingerprints").get_to(kpm.fingerprints);
}

void to_json(json& j, const BlockEntry& e) {
    j = json{{"mu_ta", e.centroid.mu_ta},
             {"mu_rssi", e.centroid.mu_rssi},
             {"c", e.match_count},
             {"tau_ms", e.tau_ms},
             {"t_last_ms", e.t_last.ms}};
}

void from_json(const json& j, BlockEntry& e) {
    j.at("mu_ta").get_to(e.centroid.mu_ta);
    j.at("mu_rssi").get_to(e.centroid.mu_rssi);
    j.at("c").get_to(e.match_count);
    j.at("tau_ms").get_to(e.tau_ms);
    e.t_last.ms = j.at("t_last_ms").get<std::int64_t>();
}

void to_json(json& j, const AlgorithmParams& p) {
    j = json{{"eps_rssi", p.eps_rssi},
             {"eps_ta", p.eps_ta},
             {"min_pts", p.min_pts},
             {"t1", p.t1},
             {"t2", p.t2},
             {"t3", p.t3},
             {"t3_mode", p.t3_mode == T3Mode::dynamic ? "dynamic" : "fixed"},
             {"window_ms", p.window_ms},
             {"history_size_m", p.history_size_m},
             {"tau0_ms", p.tau0_ms},
             {"tau_max_ms", p.tau_max_ms},
             {"delta_ms", p.delta_ms},
             {"k_reinforce", p.k_reinforce},
             {"reinforce_on", p.reinforce_on == ReinforceOn::attempt ? "attempt" : "detector"}};
}

void from_json(const json& j, AlgorithmParams& p) {
    p = AlgorithmParams{};
    if (j.contains("eps_rssi")) j.at("eps_rssi").get_to(p.eps_rssi);
    if (j.contains("eps_ta")) j.at("eps_ta").get_to(p.eps_ta);
    if (j.contains("min_pts")) j.at("min_pts").get_to(p.min_pts);
    if (j.contains("t1")) j.at("t1").get_to(p.t1);
    if (j.contains("t2")) j.at("t2").get_to(p.t2);
    if (j.contains("t3")) j.at("t3").get_to(p.t3);
    if (j.contains("t3_mode")) {
        const auto mode = j.at("t3_mode").get<std::string>();
        if (mode == "dynamic") p.t3_mode = T3Mode::dynamic;
        else if (mode == "fixed") p.t3_mode = T3Mode::fixed;
        else fail(Errc::config_error, "t3_mode must be 'fixed' or 'dynamic'");
    }
    if (j.contains("window_ms")) j.at("window_ms").get_to(p.window_ms);
    if (j.contains("history_size_m")) j.at("history_size_m").get_to(p.history_size_m);
    if (j.contains("tau0_ms")) j.at("tau0_ms").get_to(p.tau0_ms);
    if (j.contains("tau_max_ms")) j.at("tau_max_ms").get_to(p.tau_max_ms);
    if (j.contains("delta_ms")) j.at("delta_ms").get_to(p.delta_ms);
    if (j.contains("k_reinforce")) j.at("k_reinforce").get_to(p.k_reinforce);
    if (j.contains("reinforce_on")) {
        const auto mode = j.at("reinforce_on").get<std::string>();
        if (mode == "attempt") p.reinforce_on = ReinforceOn::attempt;
        else if (mode == "detector") p.reinforce_on = ReinforceOn::detector;
        else fail(Errc::config_error, "reinforce_on must be 'detector' or 'attempt'");
    }
}

}  // namespace stormsim
