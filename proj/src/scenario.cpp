#include "stormsim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "stormsim/json_io.hpp"

namespace stormsim {

bool ScenarioConfig::attack_present() const {
    for (const auto& ue : ues)
        if (ue.behavior == UeBehavior::malicious) return true;
    return false;
}

SimTime ScenarioConfig::attack_start() const {
    SimTime earliest{std::numeric_limits<std::int64_t>::max()};
    for (const auto& ue : ues)
        if (ue.behavior == UeBehavior::malicious && ue.attack_start < earliest)
            earliest = ue.attack_start;
    return earliest;
}

void validate(const ScenarioConfig& config) {
    if (config.duration_ms <= 0) fail(Errc::config_error, "duration_ms must be > 0");
    if (config.t300_ms <= 0) fail(Errc::config_error, "t300_ms must be > 0");
    if (config.gnb.max_ue < 1) fail(Errc::config_error, "gnb.max_ue must be >= 1");
    if (config.gnb.context_hold_ms <= 0) fail(Errc::config_error, "gnb.context_hold_ms must be > 0");
    if (config.mitigation.loop_delay_ms < 0)
        fail(Errc::config_error, "mitigation.loop_delay_ms must be >= 0");
    validate(config.radio);
    try {
        validate(config.params);
    } catch (const Error& e) {
        fail(Errc::config_error, std::string("params: ") + e.what());
    }
    if (config.ues.empty()) fail(Errc::config_error, "at least one ue is required");
    for (const auto& ue : config.ues) validate(ue);
    for (std::size_t i = 0; i < config.ues.size(); ++i)
        for (std::size_t j = i + 1; j < config.ues.size(); ++j)
            if (config.ues[i].id == config.ues[j].id)
                fail(Errc::config_error, "duplicate ue id " + config.ues[i].id);
}

namespace {

json ue_to_json(const UeProfile& ue) {
    json j;
    j["id"] = ue.id;
    j["behavior"] = ue.behavior == UeBehavior::malicious ? "malicious" : "benign";
    if (ue.track.size() == 1) {
        j["position"] = {ue.track[0].pos.x, ue.track[0].pos.y};
    } else {
        json track = json::array();
        for (const auto& wp : ue.track) track.push_back({wp.t.ms, wp.pos.x, wp.pos.y});
        j["track"] = track;
    }
    j["tx_power_offset_db"] = ue.tx_power_offset_db;
    if (ue.rssi_sigma_override_db) j["rssi_sigma_db"] = *ue.rssi_sigma_override_db;
    if (ue.behavior == UeBehavior::malicious) {
        j["msg3_rate_hz"] = ue.msg3_rate_hz;
        j["attack_start_ms"] = ue.attack_start.ms;
        j["attack_duration_ms"] = ue.attack_duration_ms;
        j["arrival"] = ue.arrival == ArrivalProcess::poisson ? "poisson" : "deterministic";
    } else {
        json times = json::array();
        for (const auto& t : ue.attach_times) times.push_back(t.ms);
        j["attach_times_ms"] = times;
        j["msg5_delay_ms"] = {ue.msg5_delay_min_ms, ue.msg5_delay_max_ms};
    }
    return j;
}

UeProfile ue_from_json(const json& j, const RadioModel& radio, Vec2 gnb_pos) {
    UeProfile ue;
    ue.id = j.at("id").get<std::string>();
    const auto behavior = j.at("behavior").get<std::string>();
    if (behavior == "malicious") ue.behavior = UeBehavior::malicious;
    else if (behavior == "benign") ue.behavior = UeBehavior::benign;
    else fail(Errc::config_error, "ue " + ue.id + ": behavior must be 'benign' or 'malicious'");

    const int placements = j.contains("position") + j.contains("track") +
                           j.contains("fingerprint_target");
    if (placements != 1)
        fail(Errc::config_error,
             "ue " + ue.id + ": exactly one of position, track, fingerprint_target required");
    if (j.contains("position")) {
        const auto& p = j.at("position");
        ue.track = {{SimTime{0}, {p.at(0).get<double>(), p.at(1).get<double>()}}};
    } else if (j.contains("track")) {
        for (const auto& row : j.at("track"))
            ue.track.push_back({SimTime{row.at(0).get<std::int64_t>()},
                                {row.at(1).get<double>(), row.at(2).get<double>()}});
    } else {
        // Placement solved from a target mean fingerprint; the tx power
        // offset is implied and may not also be given explicitly.
        if (j.contains("tx_power_offset_db"))
            fail(Errc::config_error,
                 "ue " + ue.id + ": fingerprint_target and tx_power_offset_db are exclusive");
        const auto& t = j.at("fingerprint_target");
        const auto placed =
            place_for_fingerprint(radio, t.at(0).get<int>(), t.at(1).get<double>(), gnb_pos);
        ue.track = {{SimTime{0}, placed.pos}};
        ue.tx_power_offset_db = placed.tx_power_offset_db;
    }
    if (j.contains("tx_power_offset_db")) j.at("tx_power_offset_db").get_to(ue.tx_power_offset_db);
    if (j.contains("rssi_sigma_db")) ue.rssi_sigma_override_db = j.at("rssi_sigma_db").get<double>();

    if (ue.behavior == UeBehavior::malicious) {
        j.at("msg3_rate_hz").get_to(ue.msg3_rate_hz);
        if (j.contains("attack_start_ms")) ue.attack_start.ms = j.at("attack_start_ms").get<std::int64_t>();
        j.at("attack_duration_ms").get_to(ue.attack_duration_ms);
        if (j.contains("arrival")) {
            const auto arrival = j.at("arrival").get<std::string>();
            if (arrival == "poisson") ue.arrival = ArrivalProcess::poisson;
            else if (arrival == "deterministic") ue.arrival = ArrivalProcess::deterministic;
            else fail(Errc::config_error, "ue " + ue.id + ": unknown arrival process " + arrival);
        }
    } else {
        if (j.contains("attach_times_ms"))
            for (const auto& t : j.at("attach_times_ms"))
                ue.attach_times.push_back(SimTime{t.get<std::int64_t>()});
        if (j.contains("msg5_delay_ms")) {
            const auto& d = j.at("msg5_delay_ms");
            ue.msg5_delay_min_ms = d.at(0).get<std::int64_t>();
            ue.msg5_delay_max_ms = d.at(1).get<std::int64_t>();
        }
    }
    return ue;
}

}  // namespace

std::string to_json_string(const ScenarioConfig& config) {
    json j;
    j["name"] = config.name;
    j["cell_id"] = config.cell_id;
    j["seed"] = config.seed;
    j["duration_ms"] = config.duration_ms;
    j["t300_ms"] = config.t300_ms;
    j["gnb"] = {{"position", {config.gnb.position.x, config.gnb.position.y}},
                {"max_ue", config.gnb.max_ue},
                {"context_hold_ms", config.gnb.context_hold_ms}};
    j["radio"] = {{"pathloss_exponent", config.radio.pathloss_exponent},
                  {"ref_rssi_dbm_at_1m", config.radio.ref_rssi_dbm_at_1m},
                  {"rssi_noise_sigma_db", config.radio.rssi_noise_sigma_db},
                  {"ta_meters_per_sample", config.radio.ta_meters_per_sample}};
    j["params"] = config.params;
    j["mitigation"] = {{"enabled", config.mitigation.enabled},
                       {"loop_delay_ms", config.mitigation.loop_delay_ms}};
    json ues = json::array();
    for (const auto& ue : config.ues) ues.push_back(ue_to_json(ue));
    j["ues"] = ues;
    return j.dump(2) + "\n";
}

ScenarioConfig scenario_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(Errc::config_error, std::string("scenario is not valid JSON: ") + e.what());
    }
    ScenarioConfig config;
    try {
        if (j.contains("name")) j.at("name").get_to(config.name);
        if (j.contains("cell_id")) j.at("cell_id").get_to(config.cell_id);
        if (j.contains("seed")) j.at("seed").get_to(config.seed);
        j.at("duration_ms").get_to(config.duration_ms);
        if (j.contains("t300_ms")) j.at("t300_ms").get_to(config.t300_ms);
        if (j.contains("gnb")) {
            const auto& g = j.at("gnb");
            if (g.contains("position")) {
                config.gnb.position.x = g.at("position").at(0).get<double>();
                config.gnb.position.y = g.at("position").at(1).get<double>();
            }
            if (g.contains("max_ue")) g.at("max_ue").get_to(config.gnb.max_ue);
            if (g.contains("context_hold_ms")) g.at("context_hold_ms").get_to(config.gnb.context_hold_ms);
        }
        if (j.contains("radio")) {
            const auto& r = j.at("radio");
            if (r.contains("pathloss_exponent")) r.at("pathloss_exponent").get_to(config.radio.pathloss_exponent);
            if (r.contains("ref_rssi_dbm_at_1m")) r.at("ref_rssi_dbm_at_1m").get_to(config.radio.ref_rssi_dbm_at_1m);
            if (r.contains("rssi_noise_sigma_db")) r.at("rssi_noise_sigma_db").get_to(config.radio.rssi_noise_sigma_db);
            if (r.contains("ta_meters_per_sample")) r.at("ta_meters_per_sample").get_to(config.radio.ta_meters_per_sample);
        }
        if (j.contains("params")) config.params = j.at("params").get<AlgorithmParams>();
        if (j.contains("mitigation")) {
            const auto& m = j.at("mitigation");
            if (m.contains("enabled")) m.at("enabled").get_to(config.mitigation.enabled);
            if (m.contains("loop_delay_ms")) m.at("loop_delay_ms").get_to(config.mitigation.loop_delay_ms);
        }
        for (const auto& row : j.at("ues"))
            config.ues.push_back(ue_from_json(row, config.radio, config.gnb.position));
    } catch (const json::exception& e) {
        fail(Errc::config_error, std::string("scenario field error: ") + e.what());
    }
    validate(config);
    return config;
}

ScenarioConfig load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::config_error, "cannot open scenario file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return scenario_from_json(buf.str());
}

namespace {

// Measured mean fingerprints for the fixed placements used by the presets:
// one SDR-based attacker position and eight victim positions, with the
// per-position short-term RSSI deviation.
struct Anchor {
    const char* label;
    int ta;
    double rssi;
    double sigma;
};

constexpr Anchor kAnchors[] = {
    {"P0", 32, -41.0, 0.0}, {"P1", 31, -49.7, 3.2}, {"P2", 31, -56.4, 4.4},
    {"P3", 31, -52.6, 1.2}, {"P4", 31, -53.6, 1.8}, {"P5", 31, -54.8, 1.0},
    {"P6", 31, -46.7, 3.7}, {"P7", 31, -55.0, 0.0}, {"P8", 31, -47.5, 1.3},
};

const Anchor& anchor(const std::string& label) {
    for (const auto& a : kAnchors)
        if (label == a.label) return a;
    fail(Errc::config_error, "unknown fingerprint anchor " + label);
}

UeProfile anchored_ue(const ScenarioConfig& config, const std::string& id, UeBehavior behavior,
                      const std::string& anchor_label) {
    const auto& a = anchor(anchor_label);
    const auto placed = place_for_fingerprint(config.radio, a.ta, a.rssi, config.gnb.position);
    UeProfile ue;
    ue.id = id;
    ue.behavior = behavior;
    ue.track = {{SimTime{0}, placed.pos}};
    ue.tx_power_offset_db = placed.tx_power_offset_db;
    return ue;
}

UeProfile make_mue(const ScenarioConfig& config, const std::string& id, double rate_hz,
                   std::int64_t attack_duration_ms, const std::string& anchor_label = "P0") {
    auto ue = anchored_ue(config, id, UeBehavior::malicious, anchor_label);
    ue.msg3_rate_hz = rate_hz;
    ue.attack_start = SimTime{0};
    ue.attack_duration_ms = attack_duration_ms;
    return ue;
}

UeProfile make_vue(const ScenarioConfig& config, const std::string& id,
                   const std::string& anchor_label, std::vector<std::int64_t> attach_ms) {
    auto ue = anchored_ue(config, id, UeBehavior::benign, anchor_label);
    for (auto t : attach_ms) ue.attach_times.push_back(SimTime{t});
    return ue;
}

// Second attacker placement for the multi-attacker scenarios: a different TA
// bin and a stronger-than-victim RSSI.
UeProfile make_second_mue(ScenarioConfig& config, std::int64_t attack_duration_ms) {
    const auto placed = place_for_fingerprint(config.radio, 30, -46.0, config.gnb.position);
    UeProfile ue;
    ue.id = "mue1";
    ue.behavior = UeBehavior::malicious;
    ue.track = {{SimTime{0}, placed.pos}};
    ue.tx_power_offset_db = placed.tx_power_offset_db;
    ue.msg3_rate_hz = 45.7;
    ue.attack_duration_ms = attack_duration_ms;
    return ue;
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"attack-1mue", "attack-lab", "attack-2mue", "mobile-mue", "mobile-vue",
            "benign-only", "benign-burst", "fig7", "fig9"};
}

ScenarioConfig preset(const std::string& name) {
    ScenarioConfig config;
    config.name = name;

    if (name == "attack-1mue") {
        // Fast single-attacker scenario: the first detection window already
        // carries a history-dominating cluster, so the loop reacts within
        // one window plus the control delay.
        config.duration_ms = 2000;
        config.gnb.max_ue = 48;
        config.ues.push_back(make_mue(config, "mue0", 300.0, 2000));
        config.ues.push_back(make_vue(config, "vue0", "P3", {450, 900}));
    } else if (name == "attack-lab") {
        // Lab-rate single attacker; detection needs several windows to fill
        // the history, the pool is sized so mitigation still wins.
        config.duration_ms = 3000;
        config.gnb.max_ue = 48;
        config.ues.push_back(make_mue(config, "mue0", 45.7, 3000));
        config.ues.push_back(make_vue(config, "vue0", "P3", {700, 1200}));
    } else if (name == "attack-2mue") {
        config.duration_ms = 3000;
        config.gnb.max_ue = 48;
        config.params.t3_mode = T3Mode::dynamic;
        config.ues.push_back(make_mue(config, "mue0", 45.7, 3000));
        config.ues.push_back(make_second_mue(config, 3000));
        config.ues.push_back(make_vue(config, "vue0", "P3", {700, 1200}));
    } else if (name == "mobile-mue") {
        config.duration_ms = 13000;
        config.gnb.max_ue = 64;
        auto mue = make_mue(config, "mue0", 45.7, 13000);
        const Vec2 start = mue.track[0].pos;
        mue.track = {{SimTime{0}, start}, {SimTime{12000}, {start.x + 5.0, start.y}}};
        config.ues.push_back(mue);
        config.ues.push_back(make_vue(config, "vue0", "P3", {6000}));
    } else if (name == "mobile-vue") {
        config.duration_ms = 3000;
        config.gnb.max_ue = 48;
        config.params.t3_mode = T3Mode::dynamic;
        config.ues.push_back(make_mue(config, "mue0", 45.7, 3000));
        config.ues.push_back(make_second_mue(config, 3000));
        config.ues.push_back(make_vue(config, "vue0", "P1", {1500}));
    } else if (name == "benign-only") {
        config.duration_ms = 3000;
        config.ues.push_back(make_vue(config, "vue0", "P2", {200, 1600}));
        config.ues.push_back(make_vue(config, "vue1", "P4", {500}));
        config.ues.push_back(make_vue(config, "vue2", "P6", {900, 2300}));
    } else if (name == "benign-burst") {
        // A crowd attaching together: ten co-located UEs, three rapid
        // attempts each inside the first detection window, all completing.
        config.duration_ms = 1000;
        for (int i = 0; i < 10; ++i) {
            const double rssi = -53.6 + 0.22 * (i - 4.5);
            const auto placed = place_for_fingerprint(config.radio, 31, rssi, config.gnb.position);
            UeProfile ue;
            ue.id = "burst" + std::to_string(i);
            ue.behavior = UeBehavior::benign;
            ue.track = {{SimTime{0}, placed.pos}};
            ue.tx_power_offset_db = placed.tx_power_offset_db;
            for (int a = 0; a < 3; ++a) ue.attach_times.push_back(SimTime{5 + 2 * i + 28 * a});
            config.ues.push_back(ue);
        }
    } else if (name == "fig7") {
        // Depletion baseline: mitigation off, one attacker, default pool.
        config.duration_ms = 3000;
        config.gnb.max_ue = 16;
        config.mitigation.enabled = false;
        config.ues.push_back(make_mue(config, "mue0", 45.7, 3000));
    } else if (name == "fig9") {
        // Long attack for aging-curve extraction.
        config.duration_ms = 41000;
        config.gnb.max_ue = 64;
        config.ues.push_back(make_mue(config, "mue0", 45.7, 30000));
    } else {
        fail(Errc::config_error, "unknown preset " + name);
    }
    validate(config);
    return config;
}

}  // namespace stormsim
