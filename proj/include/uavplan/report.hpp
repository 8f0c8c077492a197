// Structured result export: canonical config digests, solution round-trip
// serialization, per-slot CSV tables in a fixed column order, and the
// deterministic run-report body written by the CLI.

#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "uavplan/scenario.hpp"

namespace uavplan {

/// Canonical JSON form of a config (linear units, sorted keys).
nlohmann::json config_to_json(const ScenarioConfig& cfg);

/// FNV-1a 64-bit hash of the canonical config text, as 16 hex digits.
std::string scenario_digest(const ScenarioConfig& cfg);

nlohmann::json solution_to_json(const Solution& sol);
Solution solution_from_json(const nlohmann::json& j);
Solution load_solution_file(const std::string& path);

/// Per-slot table with columns
///   n, t, q_bx, q_by, H_b, q_ux, q_uy, H_u, x_1..x_L, y_1..y_K,
///   p_u, p_s1..p_sK, r_u_total, r_s_total
/// using round-trip double formatting.
std::string slot_table_csv(const ScenarioConfig& cfg, const Solution& sol);

std::string poa_trace_csv(const std::vector<TraceRow>& rows);
std::string bcd_trace_csv(const std::vector<BcdTraceRow>& rows);

/// Deterministic report body (no timestamps or wall-clock entries).  The
/// stored objective always reproduces under re-evaluation of the stored
/// solution.
nlohmann::json make_run_report(const ScenarioConfig& cfg, const Solution& sol,
                               const nlohmann::json& options,
                               std::uint64_t seed);

}  // namespace uavplan
