#include "csd/scenario.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace csd {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ScenarioError("scenario: " + msg); }

double require_number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) fail(std::string("missing or non-numeric key '") + key + "'");
  return j.at(key).get<double>();
}

NodeProfile parse_node(const json& j) {
  NodeProfile node;
  if (!j.contains("id") || !j.at("id").is_string()) fail("node entry missing string 'id'");
  node.node_id = j.at("id").get<std::string>();
  node.mu = require_number(j, "mu");
  std::string role = j.value("role", std::string("benign"));
  if (role == "benign") {
    node.role = NodeRole::Benign;
    if (j.contains("kappa") || j.contains("q_prime") || j.contains("q_dprime")) {
      fail("benign node '" + node.node_id + "' carries falsification fields");
    }
  } else if (role == "malicious") {
    node.role = NodeRole::Malicious;
    FalsificationStrategy s;
    s.kappa = require_number(j, "kappa");
    s.q_prime = require_number(j, "q_prime");
    s.q_dprime = require_number(j, "q_dprime");
    node.strategy = s;
  } else {
    fail("node '" + node.node_id + "' has unknown role '" + role + "'");
  }
  return node;
}

}  // namespace

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::Csd: return "csd";
    case Scheme::LrtUnfiltered: return "lrt_unfiltered";
    case Scheme::Tbs: return "tbs";
    case Scheme::Sbs: return "sbs";
  }
  return "csd";
}

std::optional<Scheme> scheme_from_string(std::string_view name) {
  if (name == "csd") return Scheme::Csd;
  if (name == "lrt_unfiltered") return Scheme::LrtUnfiltered;
  if (name == "tbs") return Scheme::Tbs;
  if (name == "sbs") return Scheme::Sbs;
  return std::nullopt;
}

void ScenarioSpec::validate() const {
  if (nodes.empty()) fail("node set is empty");
  if (trials < 1) fail("trials must be >= 1");
  if (max_periods < 1) fail("max_periods must be >= 1");
  if (!(q_a > 0.0 && q_a < 1.0)) fail("q_a must be in (0,1)");
  try {
    detection_params().validate();
    for (const auto& n : nodes) n.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if (nodes[i].node_id == nodes[j].node_id) fail("duplicate node id '" + nodes[i].node_id + "'");
    }
  }
}

DetectionParams ScenarioSpec::detection_params() const {
  return DetectionParams{q_n, compose_plr(q_n, q_a), gamma, z_thr};
}

double ScenarioSpec::benign_mu_sum() const {
  double s = 0.0;
  for (const auto& n : nodes) {
    if (n.role == NodeRole::Benign) s += n.mu;
  }
  return s;
}

double ScenarioSpec::malicious_mu_sum() const {
  double s = 0.0;
  for (const auto& n : nodes) {
    if (n.role == NodeRole::Malicious) s += n.mu;
  }
  return s;
}

ScenarioSpec parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("top level must be an object");

  ScenarioSpec spec;
  spec.name = j.value("name", std::string("scenario"));
  spec.q_n = require_number(j, "q_n");
  spec.q_a = require_number(j, "q_a");
  spec.gamma = require_number(j, "gamma");
  spec.z_thr = require_number(j, "z_thr");
  if (j.contains("trials")) spec.trials = j.at("trials").get<int>();
  if (j.contains("max_periods")) spec.max_periods = j.at("max_periods").get<int>();
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("tbs_threshold")) spec.tbs_threshold = j.at("tbs_threshold").get<int>();
  if (j.contains("scheme")) {
    const auto name = j.at("scheme").get<std::string>();
    const auto scheme = scheme_from_string(name);
    if (!scheme) fail("unknown scheme '" + name + "'");
    spec.scheme = *scheme;
  }
  if (!j.contains("nodes") || !j.at("nodes").is_array()) fail("missing 'nodes' array");
  for (const auto& node_json : j.at("nodes")) {
    spec.nodes.push_back(parse_node(node_json));
  }
  spec.validate();
  return spec;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("scenario: cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace csd
