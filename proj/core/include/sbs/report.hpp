#pragma once

#include <string>

#include <json.hpp>

#include "sbs/cycles.hpp"

namespace sbs {

inline constexpr int kSchemaVersion = 1;

// report serialization is deterministic: stable key order, default
// shortest-round-trip number formatting (bit-exact per double)
nlohmann::ordered_json to_json(const VerificationReport& r);
nlohmann::ordered_json to_json(const ScanReport& r);
nlohmann::ordered_json to_json(const ManifoldVerification& r, const std::string& preset,
                               const Model& model);

std::string dump_report(const nlohmann::ordered_json& j);

}  // namespace sbs
