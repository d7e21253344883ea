// ============================================================================
// traffic.hpp -- per-period traffic and forwarding observations
//
// Each cluster node sends Poisson(mu_i) packets through the head per
// detection period; the head drops each packet independently with the PLR
// given by the ground truth. Nodes observe drops only among their own
// packets. All sampling is driven by streams keyed on
// (seed, hypothesis, trial, period, node).
// ============================================================================
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "csd/detection.hpp"
#include "csd/rng.hpp"

namespace csd {

enum class NodeRole { Benign, Malicious };

/// A malicious node's falsification triple: traffic inflation kappa and the
/// claimed PLRs when the head is normal (q_prime) / abnormal (q_dprime).
struct FalsificationStrategy {
  double kappa = 1.0;
  double q_prime = 0.0;
  double q_dprime = 0.0;

  void validate() const {
    if (!(kappa > 0.0)) throw std::invalid_argument("FalsificationStrategy: kappa must be positive");
    if (!(q_prime >= 0.0 && q_prime <= 1.0)) throw std::invalid_argument("FalsificationStrategy: q_prime outside [0,1]");
    if (!(q_dprime >= 0.0 && q_dprime <= 1.0)) throw std::invalid_argument("FalsificationStrategy: q_dprime outside [0,1]");
  }
};

struct NodeProfile {
  std::string node_id;
  double mu = 0.0;
  NodeRole role = NodeRole::Benign;
  std::optional<FalsificationStrategy> strategy;  // present iff Malicious

  void validate() const {
    if (node_id.empty()) throw std::invalid_argument("NodeProfile: empty node_id");
    if (!(mu > 0.0)) throw std::invalid_argument("NodeProfile: mu must be positive");
    if ((role == NodeRole::Malicious) != strategy.has_value()) {
      throw std::invalid_argument("NodeProfile: strategy must be present iff role is Malicious");
    }
    if (strategy) strategy->validate();
  }
};

/// True observation of one node in one period.
struct PeriodObservation {
  std::string node_id;
  std::int64_t sent = 0;
  std::int64_t dropped = 0;
};

/// What the head actually does: its PLR is q_n when normal and
/// compose_plr(q_n, q_a) when abnormal.
struct HeadGroundTruth {
  bool is_abnormal = false;
  double plr = 0.0;
};

/// RNG stream factory for one (trial, period) under one hypothesis domain.
struct PeriodStreams {
  std::uint64_t seed = 0;
  std::uint64_t domain = 0;  // hypothesis tag keeps H0/H1 streams disjoint
  std::uint64_t trial = 0;
  std::uint64_t period = 0;  // 1-based

  [[nodiscard]] RngStream node_stream(std::size_t node_index) const {
    return RngStream::keyed(seed, {kTrafficDomain, domain, trial, period, static_cast<std::uint64_t>(node_index)});
  }
};

/// Precomputed per-node sampler (exp(-mu) cached for the hot loop).
struct NodeSampler {
  double mu = 0.0;
  double exp_neg_mu = 0.0;

  explicit NodeSampler(double mean) : mu(mean), exp_neg_mu(std::exp(-mean)) {}
};

/// Draws one period for one node: sent ~ Poisson(mu), dropped ~ Bin(sent, plr).
inline std::pair<int, int> sample_sent_dropped(const NodeSampler& sampler, double plr, RngStream& rng) {
  const int sent = sample_poisson(sampler.mu, sampler.exp_neg_mu, rng);
  const int dropped = sample_binomial(sent, plr, rng);
  return {sent, dropped};
}

/// Samples one detection period for every profile. Deterministic in the
/// stream key; node order follows the profile order.
inline std::vector<PeriodObservation> sample_period(std::span<const NodeProfile> profiles,
                                                    const HeadGroundTruth& truth,
                                                    const PeriodStreams& streams) {
  std::vector<PeriodObservation> out;
  out.reserve(profiles.size());
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    profiles[i].validate();
    RngStream rng = streams.node_stream(i);
    const auto [sent, dropped] = sample_sent_dropped(NodeSampler(profiles[i].mu), truth.plr, rng);
    out.push_back(PeriodObservation{profiles[i].node_id, sent, dropped});
  }
  return out;
}

/// Componentwise sums of per-period observations over time.
/// Every period must carry the same node set.
inline std::map<std::string, ForwardingCounts> accumulate(const std::vector<std::vector<PeriodObservation>>& periods) {
  std::map<std::string, ForwardingCounts> totals;
  if (periods.empty()) return totals;
  for (const auto& obs : periods.front()) {
    totals.emplace(obs.node_id, ForwardingCounts{});
  }
  for (const auto& period : periods) {
    if (period.size() != totals.size()) throw std::invalid_argument("accumulate: node sets differ across periods");
    for (const auto& obs : period) {
      auto it = totals.find(obs.node_id);
      if (it == totals.end()) throw std::invalid_argument("accumulate: node sets differ across periods");
      it->second.total += static_cast<double>(obs.sent);
      it->second.dropped += static_cast<double>(obs.dropped);
    }
  }
  return totals;
}

}  // namespace csd
