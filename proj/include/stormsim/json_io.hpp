#pragma once

#include <nlohmann/json.hpp>

#include "stormsim/core.hpp"
#include "stormsim/mitigator.hpp"

// JSON bindings for the domain types shared by the wire codec, the scenario
// files and the trace writers.

namespace stormsim {

using json = nlohmann::json;

void to_json(json& j, const Fingerprint& fp);
void from_json(const json& j, Fingerprint& fp);

void to_json(json& j, const Centroid& c);
void from_json(const json& j, Centroid& c);

void to_json(json& j, const KpmFingerprint& row);
void from_json(const json& j, KpmFingerprint& row);

void to_json(json& j, const WindowKpm& kpm);
void from_json(const json& j, WindowKpm& kpm);

void to_json(json& j, const BlockEntry& e);
void from_json(const json& j, BlockEntry& e);

void to_json(json& j, const AlgorithmParams& p);
void from_json(const json& j, AlgorithmParams& p);

}  // namespace stormsim
