#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stormsim/core.hpp"
#include "stormsim/radio.hpp"

namespace stormsim {

struct GnbConfig {
    Vec2 position;
    int max_ue = 16;                    // RRC context pool size
    std::int64_t context_hold_ms = 2000;  // supervision timer for incomplete procedures
};

struct MitigationConfig {
    bool enabled = true;
    std::int64_t loop_delay_ms = 10;  // indication emission -> control application
};

/// Declarative description of one experiment run: populations, placement,
/// attack rates and algorithm parameters.
struct ScenarioConfig {
    std::string name = "scenario";
    std::uint32_t cell_id = 1;
    std::uint64_t seed = 1;
    std::int64_t duration_ms = 2000;
    std::int64_t t300_ms = 1000;
    GnbConfig gnb;
    RadioModel radio;
    AlgorithmParams params;
    MitigationConfig mitigation;
    std::vector<UeProfile> ues;

    bool attack_present() const;
    /// Ground-truth attack start: earliest malicious MSG1 (config time).
    SimTime attack_start() const;
};

void validate(const ScenarioConfig& config);

std::string to_json_string(const ScenarioConfig& config);
ScenarioConfig scenario_from_json(const std::string& text);
ScenarioConfig load_scenario_file(const std::string& path);

/// Built-in scenario presets. Placements are anchored to the measured
/// fingerprint table via place_for_fingerprint.
std::vector<std::string> preset_names();
ScenarioConfig preset(const std::string& name);

}  // namespace stormsim
