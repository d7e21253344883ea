// ============================================================================
// falsification.hpp -- the adversary model
//
// Malicious cluster nodes know the head's ground truth and report inflated
// traffic with a fixed claimed drop fraction instead of their real
// observations. Cooperating nodes act like one aggregate adversary described
// by the mu-weighted group strategy; whether that aggregate defeats the
// unfiltered LRT is a closed-form predicate on the packet-mass ratio.
// ============================================================================
#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>

#include "csd/traffic.hpp"

namespace csd {

/// mu-weighted means of the malicious triples plus the benign/malicious
/// packet-mass sums.
struct GroupStrategy {
  double kappa = 0.0;
  double q_prime = 0.0;
  double q_dprime = 0.0;
  double mu1 = 0.0;  // sum of malicious mu_i
  double mu0 = 0.0;  // sum of benign mu_i
};

/// Falsified (sent, dropped) counts for one period. Real-valued: the claimed
/// drop fraction is applied exactly, without rounding.
struct FalsifiedCounts {
  double sent = 0.0;
  double dropped = 0.0;
};

inline FalsifiedCounts falsified_counts(const NodeProfile& profile, double true_sent, const HeadGroundTruth& truth) {
  if (profile.role != NodeRole::Malicious || !profile.strategy) {
    throw std::invalid_argument("falsified_counts: profile is not malicious");
  }
  if (!(true_sent >= 0.0)) throw std::invalid_argument("falsified_counts: negative sent count");
  const FalsificationStrategy& s = *profile.strategy;
  const double sent = s.kappa * true_sent;
  const double claimed = truth.is_abnormal ? s.q_dprime : s.q_prime;
  return FalsifiedCounts{sent, claimed * sent};
}

inline GroupStrategy group_strategy(std::span<const NodeProfile> profiles) {
  GroupStrategy g;
  double kappa_acc = 0.0, qp_acc = 0.0, qpp_acc = 0.0;
  for (const auto& p : profiles) {
    p.validate();
    if (p.role == NodeRole::Malicious) {
      g.mu1 += p.mu;
      kappa_acc += p.strategy->kappa * p.mu;
      qp_acc += p.strategy->q_prime * p.mu;
      qpp_acc += p.strategy->q_dprime * p.mu;
    } else {
      g.mu0 += p.mu;
    }
  }
  if (g.mu1 <= 0.0) throw std::invalid_argument("group_strategy: no malicious profiles");
  g.kappa = kappa_acc / g.mu1;
  g.q_prime = qp_acc / g.mu1;
  g.q_dprime = qpp_acc / g.mu1;
  return g;
}

/// True iff the group strategy defeats the unfiltered LRT, i.e. the benign
/// packet mass is too small:
///   mu0/mu1 <= kappa * max{(q'-beta)/(beta-q_n), (beta-q'')/(q-beta)}.
inline bool breaks_unfiltered_detection(const GroupStrategy& gs, double beta, double q_n, double q) {
  if (!(q_n < beta && beta < q)) throw std::invalid_argument("breaks_unfiltered_detection: requires q_n < beta < q");
  const double frame = (gs.q_prime - beta) / (beta - q_n);   // framing a normal head
  const double shield = (beta - gs.q_dprime) / (q - beta);   // shielding an abnormal head
  const double rhs = gs.kappa * std::max(frame, shield);
  return gs.mu0 / gs.mu1 <= rhs;
}

}  // namespace csd
