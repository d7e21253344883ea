// ============================================================================
// scenario.hpp -- experiment descriptions and their JSON file format
// ============================================================================
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "csd/detection.hpp"
#include "csd/traffic.hpp"

namespace csd {

enum class Scheme { Csd, LrtUnfiltered, Tbs, Sbs };

std::string_view to_string(Scheme scheme);
std::optional<Scheme> scheme_from_string(std::string_view name);

/// A full Monte Carlo experiment: cluster nodes, detection parameters,
/// adversary strategy (inside the node profiles), scheme, and budget.
struct ScenarioSpec {
  std::string name;
  std::vector<NodeProfile> nodes;
  double q_n = 0.15;
  double q_a = 0.0588;
  double gamma = 1.4;
  double z_thr = 1.0;
  Scheme scheme = Scheme::Csd;
  int trials = 10000;
  int max_periods = 100;
  std::uint64_t seed = 1;
  int tbs_threshold = 100;  // decision threshold for scheme=tbs (swept for ROCs)

  void validate() const;

  /// Derived test parameters; the detecting PLR is compose_plr(q_n, q_a).
  [[nodiscard]] DetectionParams detection_params() const;

  [[nodiscard]] double benign_mu_sum() const;
  [[nodiscard]] double malicious_mu_sum() const;
};

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses a scenario from JSON text. Throws ScenarioError on malformed input
/// or invariant violations.
ScenarioSpec parse_scenario(const std::string& json_text);

ScenarioSpec load_scenario(const std::filesystem::path& path);

}  // namespace csd
