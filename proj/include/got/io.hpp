#pragma once

// Text formats: trajectory and metric CSV, tensor and MDP-solution JSON.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "got/goal_tensor.hpp"
#include "got/mdp.hpp"
#include "got/metrics.hpp"

namespace got {

/// %.17g
std::string format_double(double v);

/// Header `t,x,x_hat,phi,sampled,delivered`; flags as 0/1.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
/// Throws ValidationError on a bad header, a malformed row or a broken trajectory invariant.
Trajectory read_trajectory_csv(std::istream& is);

/// Header `t,value`, values at 17 significant digits.
void write_metric_csv(std::ostream& os, std::span<const double> values);
void write_metric_csv(std::ostream& os, std::span<const std::uint64_t> values);

/// {"dims": [|S|, |S|, |V|], "layout": "...", "values": [...]}
nlohmann::json tensor_to_json(const GoalTensor& t);
GoalTensor tensor_from_json(const nlohmann::json& j);
void save_tensor(const std::filesystem::path& path, const GoalTensor& t);
GoalTensor load_tensor(const std::filesystem::path& path);

/// {"gain", "bias", "policy" (0 idle / 1 sample), "iterations", "final_span"}
nlohmann::json solution_to_json(const MdpSolution& s);
MdpSolution solution_from_json(const nlohmann::json& j);
void save_solution(const std::filesystem::path& path, const MdpSolution& s);
MdpSolution load_solution(const std::filesystem::path& path);

/// Parses a JSON file, reporting the path on failure.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace got
