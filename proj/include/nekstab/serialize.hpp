#pragma once

#include "nekstab/hamiltonian.hpp"
#include "nekstab/resonance.hpp"
#include "nekstab/simulate.hpp"

#include <json.hpp>

#include <string>

namespace nekstab::io {

/// Versioned SystemSpec document (version 1). Unknown keys and unknown
/// versions are rejected.
ham::SystemSpec system_from_json(const nlohmann::json& j);
nlohmann::json system_to_json(const ham::SystemSpec& spec);
ham::SystemSpec load_system(const std::string& path);

/// Doubles are printed with %.17g, so parsing the text back is bit-exact.
std::string format_double(double x);

nlohmann::json event_to_json(const resonance::ResonanceEvent& ev);

/// CSV columns: t, I_1..I_n, theta_1..theta_n, H, drift.
std::string trajectory_csv(const sim::TrajectoryRecord& rec);
sim::TrajectoryRecord trajectory_from_csv(const std::string& text);

nlohmann::json trajectory_events_json(const sim::TrajectoryRecord& rec);
nlohmann::json trajectory_summary_json(const sim::TrajectoryRecord& rec);

/// CSV columns: epsilon, seed, T, censored, max_drift, crossings.
std::string sweep_csv(const sim::SweepResult& result);
nlohmann::json sweep_summary_json(const sim::SweepResult& result);

/// Reads a sweep CSV back and fits the exponent over its non-censored rows.
sim::FitResult fit_from_sweep_csv(const std::string& text);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

} // namespace nekstab::io
