#include "got/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "got/error.hpp"

namespace got {

namespace {

constexpr const char* kTrajectoryHeader = "t,x,x_hat,phi,sampled,delivered";
constexpr const char* kTensorLayout = "index = (phi * |S| + x_hat) * |S| + x";

std::uint64_t parse_uint(std::string_view field, std::size_t line) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || p != field.data() + field.size()) {
    throw ValidationError("trajectory csv line " + std::to_string(line) + ": bad integer '" +
                          std::string(field) + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << kTrajectoryHeader << '\n';
  for (const auto& r : traj) {
    os << r.t << ',' << r.x << ',' << r.x_hat << ',' << r.phi << ',' << (r.sampled ? 1 : 0) << ','
       << (r.delivered ? 1 : 0) << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kTrajectoryHeader) {
    throw ValidationError(std::string("trajectory csv: expected header '") + kTrajectoryHeader + "'");
  }
  Trajectory traj;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 6) {
      throw ValidationError("trajectory csv line " + std::to_string(lineno) + ": expected 6 fields");
    }
    SlotRecord r;
    r.t = parse_uint(fields[0], lineno);
    r.x = parse_uint(fields[1], lineno);
    r.x_hat = parse_uint(fields[2], lineno);
    r.phi = parse_uint(fields[3], lineno);
    const auto s = parse_uint(fields[4], lineno);
    const auto d = parse_uint(fields[5], lineno);
    if (s > 1 || d > 1) throw ValidationError("trajectory csv line " + std::to_string(lineno) + ": flags are 0/1");
    r.sampled = s == 1;
    r.delivered = d == 1;
    traj.push_back(r);
  }
  return traj;
}

void write_metric_csv(std::ostream& os, std::span<const double> values) {
  os << "t,value\n";
  for (std::size_t t = 0; t < values.size(); ++t) os << t << ',' << format_double(values[t]) << '\n';
}

void write_metric_csv(std::ostream& os, std::span<const std::uint64_t> values) {
  os << "t,value\n";
  for (std::size_t t = 0; t < values.size(); ++t) os << t << ',' << values[t] << '\n';
}

nlohmann::json tensor_to_json(const GoalTensor& t) {
  const auto d = t.dims();
  return {{"dims", {d[0], d[1], d[2]}},
          {"layout", kTensorLayout},
          {"values", std::vector<double>(t.values().begin(), t.values().end())}};
}

GoalTensor tensor_from_json(const nlohmann::json& j) {
  try {
    const auto dims = j.at("dims").get<std::vector<std::size_t>>();
    if (dims.size() != 3 || dims[0] != dims[1]) {
      throw ValidationError("tensor: dims must be [|S|, |S|, |V|]");
    }
    return {dims[0], dims[2], j.at("values").get<std::vector<double>>()};
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("tensor: ") + e.what());
  }
}

void save_tensor(const std::filesystem::path& path, const GoalTensor& t) {
  write_text_file(path, tensor_to_json(t).dump(2) + "\n");
}

GoalTensor load_tensor(const std::filesystem::path& path) { return tensor_from_json(read_json_file(path)); }

nlohmann::json solution_to_json(const MdpSolution& s) {
  std::vector<int> policy;
  policy.reserve(s.policy.size());
  for (Action a : s.policy) policy.push_back(static_cast<int>(a));
  return {{"gain", s.gain},
          {"bias", s.bias},
          {"policy", policy},
          {"iterations", s.iterations},
          {"final_span", s.final_span}};
}

MdpSolution solution_from_json(const nlohmann::json& j) {
  try {
    MdpSolution s;
    s.gain = j.at("gain").get<double>();
    s.bias = j.at("bias").get<std::vector<double>>();
    for (int a : j.at("policy").get<std::vector<int>>()) {
      if (a != 0 && a != 1) throw ValidationError("solution: policy entries must be 0 or 1");
      s.policy.push_back(static_cast<Action>(a));
    }
    s.iterations = j.at("iterations").get<std::size_t>();
    s.final_span = j.at("final_span").get<double>();
    if (s.bias.size() != s.policy.size()) throw ValidationError("solution: bias and policy sizes differ");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("solution: ") + e.what());
  }
}

void save_solution(const std::filesystem::path& path, const MdpSolution& s) {
  write_text_file(path, solution_to_json(s).dump(2) + "\n");
}

MdpSolution load_solution(const std::filesystem::path& path) { return solution_from_json(read_json_file(path)); }

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace got
