#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "stormsim/e2lite_net.hpp"
#include "stormsim/harness.hpp"
#include "stormsim/trace_io.hpp"

namespace fs = std::filesystem;
using namespace stormsim;

namespace {

std::atomic<bool> g_interrupted{false};

void on_sigint(int) { g_interrupted.store(true); }

ScenarioConfig resolve_scenario(const std::string& config_path, const std::string& preset_name,
                                std::optional<std::uint64_t> seed) {
    ScenarioConfig config;
    if (!config_path.empty()) config = load_scenario_file(config_path);
    else config = preset(preset_name);
    if (seed) config.seed = *seed;
    return config;
}

json outcome_json(const EventTrace& trace) {
    const auto outcome = classify_run(trace);
    json j;
    j["scenario"] = trace.meta.scenario_name;
    j["seed"] = trace.meta.seed;
    j["classification"] = to_string(outcome.cls);
    j["attack_present"] = outcome.attack_present;
    if (outcome.detection_time_ms) j["detection_time_ms"] = *outcome.detection_time_ms;
    if (outcome.mitigation_time_ms) j["mitigation_time_ms"] = *outcome.mitigation_time_ms;
    if (outcome.depletion_time_ms) j["depletion_time_ms"] = *outcome.depletion_time_ms;
    j["victim_blocked"] = outcome.victim_blocked;
    if (outcome.victim_first_attempt_success)
        j["victim_first_attempt_success"] = *outcome.victim_first_attempt_success;

    json counts;
    for (int k = 0; k <= static_cast<int>(EventKind::block_expired); ++k) {
        const auto kind = static_cast<EventKind>(k);
        const auto n = trace.count(kind);
        if (n > 0) counts[to_string(kind)] = n;
    }
    j["event_counts"] = counts;
    j["windows"] = trace.windows.size();
    j["final_blocklist"] = trace.final_blocklist;
    j["degenerate_geometry_count"] = trace.degenerate_geometry_count;
    return j;
}

void write_run_outputs(const EventTrace& trace, const ScenarioConfig& config,
                       const fs::path& out_dir) {
    fs::create_directories(out_dir);
    write_trace_jsonl(trace, (out_dir / "trace.jsonl").string());
    write_windows_csv(trace, (out_dir / "windows.csv").string());
    {
        std::ofstream out(out_dir / "outcome.json");
        out << outcome_json(trace).dump(2) << "\n";
    }
    {
        std::ofstream out(out_dir / "scenario.json");
        out << to_json_string(config);
    }
}

std::string one_line_summary(const EventTrace& trace) {
    const auto outcome = classify_run(trace);
    std::string line = trace.meta.scenario_name + " seed=" + std::to_string(trace.meta.seed) +
                       " -> " + to_string(outcome.cls);
    if (outcome.detection_time_ms)
        line += " detection=" + std::to_string(*outcome.detection_time_ms) + "ms";
    if (outcome.mitigation_time_ms)
        line += " mitigation=" + std::to_string(*outcome.mitigation_time_ms) + "ms";
    if (outcome.depletion_time_ms)
        line += " depletion=" + std::to_string(*outcome.depletion_time_ms) + "ms";
    line += " blocklist=" + std::to_string(trace.final_blocklist.size());
    return line;
}

int cmd_run(const std::string& config_path, const std::string& preset_name,
            std::optional<std::uint64_t> seed, const std::string& out_dir, bool as_json) {
    auto config = resolve_scenario(config_path, preset_name, seed);
    auto sim = Simulator(config);
    sim.set_cancel_flag(&g_interrupted);
    const auto trace = sim.run();
    write_run_outputs(trace, config, out_dir);
    if (as_json) std::cout << outcome_json(trace).dump() << "\n";
    else std::cout << one_line_summary(trace) << "\n";
    return 0;
}

int cmd_sweep(const std::string& preset_name, std::uint64_t seed, const std::string& out_dir,
              bool as_json) {
    fs::create_directories(out_dir);
    bool pass = true;
    json summary;
    summary["preset"] = preset_name;

    if (preset_name == "fig7") {
        const auto r = run_fig7(seed);
        write_csv(r, (fs::path(out_dir) / "fig7.csv").string());
        pass = r.pass;
        summary["slope_ms_per_ue"] = r.slope_ms_per_ue;
        summary["intercept_ms"] = r.intercept_ms;
        summary["r_squared"] = r.r_squared;
    } else if (preset_name == "fig9") {
        const auto r = run_fig9(seed);
        write_csv(r, (fs::path(out_dir) / "fig9.csv").string());
        pass = r.pass;
        for (const auto& t : r.trajectories) {
            json row{{"delta_ms", t.delta_ms},
                     {"tau_final_ms", t.tau_final_ms},
                     {"saturated", t.saturated}};
            if (t.removal_t_ms) row["removal_t_ms"] = *t.removal_t_ms;
            summary["trajectories"].push_back(row);
        }
    } else if (preset_name == "table4") {
        const auto r = run_table4(seed);
        write_csv(r, (fs::path(out_dir) / "table4.csv").string());
        for (const auto& row : r.rows) {
            summary["rows"].push_back({{"label", row.label},
                                       {"accuracy", row.summary.accuracy},
                                       {"tp", row.summary.tp},
                                       {"fn", row.summary.fn}});
        }
    } else if (preset_name == "table5") {
        const auto r = run_table5(seed);
        write_csv(r, (fs::path(out_dir) / "table5.csv").string());
        pass = r.pass;
        summary["detail"] = r.detail;
        for (const auto& row : r.rows) {
            json jr{{"label", row.label},
                    {"tp", row.summary.tp},
                    {"fp", row.summary.fp},
                    {"tn", row.summary.tn},
                    {"fn", row.summary.fn}};
            if (row.summary.cbr) jr["cbr"] = *row.summary.cbr;
            summary["rows"].push_back(jr);
        }
    } else if (preset_name == "table6") {
        const auto r = run_table6(seed);
        write_csv(r, (fs::path(out_dir) / "table6.csv").string());
        pass = r.pass;
        for (const auto& row : r.rows)
            summary["rows"].push_back({{"position", row.label},
                                       {"mean_ta", row.mean_ta},
                                       {"std_ta", row.std_ta},
                                       {"mean_rssi", row.mean_rssi},
                                       {"std_rssi", row.std_rssi}});
    } else {
        std::cerr << "unknown sweep preset " << preset_name << "\n";
        return 2;
    }
    summary["pass"] = pass;
    if (as_json) std::cout << summary.dump() << "\n";
    else
        std::cout << "sweep " << preset_name << ": " << (pass ? "pass" : "FAIL")
                  << " (csv in " << out_dir << ")\n";
    return pass ? 0 : 1;
}

int cmd_serve_gnb(std::uint16_t port, const std::string& config_path,
                  const std::string& preset_name, std::optional<std::uint64_t> seed,
                  const std::string& out_dir, double time_scale, std::int64_t wait_sub_ms) {
    auto config = resolve_scenario(config_path, preset_name, seed);
    e2lite::Server server(port, config.cell_id, config.params.window_ms);
    std::cerr << "[gnb] listening on 127.0.0.1:" << server.port() << ", cell " << config.cell_id
              << "\n";

    if (wait_sub_ms > 0 &&
        !server.wait_for_subscription(std::chrono::milliseconds(wait_sub_ms)))
        std::cerr << "[gnb] no subscription; running open-loop\n";

    e2lite::ServerLoop loop(server);
    Simulator sim(config);
    if (config.mitigation.enabled) sim.set_loop(&loop);
    sim.set_cancel_flag(&g_interrupted);
    if (time_scale > 0.0) {
        const auto wall_start = std::chrono::steady_clock::now();
        sim.set_pacer([wall_start, time_scale](SimTime t) {
            const auto target =
                wall_start + std::chrono::milliseconds(static_cast<std::int64_t>(t.ms / time_scale));
            std::this_thread::sleep_until(target);
        });
    }
    const auto trace = sim.run();
    write_run_outputs(trace, config, out_dir);
    {
        std::ofstream out(fs::path(out_dir) / "blocklist.json");
        out << json(trace.final_blocklist).dump(2) << "\n";
    }
    std::cout << one_line_summary(trace) << "\n";
    return 0;
}

int cmd_serve_xapp(const std::string& host, std::uint16_t port, std::uint32_t cell_id,
                   const std::string& preset_name, const std::string& params_path,
                   const std::string& out_dir) {
    AlgorithmParams params = default_params();
    if (!params_path.empty()) {
        std::ifstream in(params_path);
        if (!in) fail(Errc::config_error, "cannot open params file " + params_path);
        json j = json::parse(in, nullptr, true);
        params = j.get<AlgorithmParams>();
    } else if (!preset_name.empty()) {
        params = preset(preset_name).params;
    }
    validate(params);

    e2lite::Client client;
    client.connect(host, port);
    const auto window_ms = client.subscribe(cell_id, params.window_ms);
    if (window_ms != params.window_ms) {
        std::cerr << "[xapp] server window is " << window_ms << " ms, adopting it\n";
        params.window_ms = window_ms;
    }
    Detector detector(params);
    std::cerr << "[xapp] subscribed to cell " << cell_id << "\n";
    const auto verdicts = client.run_detector_loop(cell_id, detector);

    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "verdicts.jsonl");
    for (const auto& v : verdicts)
        out << event_json(make_verdict_event(v.t, v.window_id, v.verdict)) << "\n";
    std::cout << "[xapp] " << verdicts.size() << " verdicts written\n";
    return 0;
}

int cmd_inspect(const std::string& trace_path, bool as_json) {
    const auto trace = read_trace_jsonl_file(trace_path);
    if (as_json) {
        std::cout << outcome_json(trace).dump() << "\n";
    } else {
        std::cout << one_line_summary(trace) << "\n";
        std::cout << "events: " << trace.events.size() << ", windows: " << trace.windows.size()
                  << "\n";
        for (int k = 0; k <= static_cast<int>(EventKind::block_expired); ++k) {
            const auto kind = static_cast<EventKind>(k);
            const auto n = trace.count(kind);
            if (n > 0) std::cout << "  " << to_string(kind) << ": " << n << "\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, on_sigint);
    std::signal(SIGTERM, on_sigint);

    CLI::App app{"RRC signaling-storm simulator with fingerprint-based detection and mitigation"};
    app.require_subcommand(1);

    std::string config_path, preset_name, out_dir = "out", trace_path, host = "127.0.0.1";
    std::string params_path;
    std::optional<std::uint64_t> seed;
    std::uint64_t sweep_seed = 1;
    std::uint16_t port = 0;
    std::uint32_t cell_id = 1;
    double time_scale = 1.0;
    std::int64_t wait_sub_ms = 30000;
    bool as_json = false;

    auto* run = app.add_subcommand("run", "run one scenario and write trace/outcome files");
    run->add_option("--config", config_path, "scenario JSON file");
    run->add_option("--preset", preset_name, "built-in scenario name");
    run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--output-dir,--output_dir", out_dir, "output directory");
    run->add_flag("--json", as_json, "machine-readable summary on stdout");

    auto* sweep = app.add_subcommand("sweep", "run a named experiment suite");
    sweep->add_option("--preset", preset_name, "fig7|fig9|table4|table5|table6")->required();
    sweep->add_option("--seed", sweep_seed, "base seed");
    sweep->add_option("--output-dir,--output_dir", out_dir, "output directory");
    sweep->add_flag("--json", as_json, "machine-readable summary on stdout");

    auto* gnb = app.add_subcommand("serve-gnb", "run the gNB simulator with a telemetry endpoint");
    gnb->add_option("--port", port, "TCP port (0 picks one)")->required();
    gnb->add_option("--config", config_path, "scenario JSON file");
    gnb->add_option("--preset", preset_name, "built-in scenario name");
    gnb->add_option("--seed", seed, "override the scenario seed");
    gnb->add_option("--output-dir,--output_dir", out_dir, "output directory");
    gnb->add_option("--time-scale", time_scale, "sim seconds per wall second (0 = unpaced)");
    gnb->add_option("--wait-sub-ms", wait_sub_ms, "wait for a subscription before starting");

    auto* xapp = app.add_subcommand("serve-xapp", "run the detector against a remote gNB");
    xapp->add_option("--host", host, "gNB host");
    xapp->add_option("--port", port, "gNB port")->required();
    xapp->add_option("--cell", cell_id, "cell id");
    xapp->add_option("--preset", preset_name, "take algorithm params from this scenario preset");
    xapp->add_option("--params", params_path, "algorithm params JSON file");
    xapp->add_option("--output-dir,--output_dir", out_dir, "output directory");

    auto* inspect = app.add_subcommand("inspect", "summarize a trace.jsonl");
    inspect->add_option("--trace", trace_path, "trace.jsonl path")->required();
    inspect->add_flag("--json", as_json, "machine-readable summary on stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (config_path.empty() == preset_name.empty()) {
                std::cerr << "run needs exactly one of --config or --preset\n";
                return 2;
            }
            return cmd_run(config_path, preset_name, seed, out_dir, as_json);
        }
        if (sweep->parsed()) return cmd_sweep(preset_name, sweep_seed, out_dir, as_json);
        if (gnb->parsed()) {
            if (config_path.empty() == preset_name.empty()) {
                std::cerr << "serve-gnb needs exactly one of --config or --preset\n";
                return 2;
            }
            return cmd_serve_gnb(port, config_path, preset_name, seed, out_dir, time_scale,
                                 wait_sub_ms);
        }
        if (xapp->parsed()) return cmd_serve_xapp(host, port, cell_id, preset_name, params_path,
                                                  out_dir);
        if (inspect->parsed()) return cmd_inspect(trace_path, as_json);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == Errc::config_error || e.code() == Errc::invalid_params ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
