// ============================================================================
// baselines.hpp -- comparison schemes
//
// TBS: a trust counter per head, nudged by the per-period aggregate observed
// drop fraction; the head is declared abnormal when trust falls below a
// (swept) threshold.
// SBS: a generalized LRT that estimates the abnormal PLR from the pooled
// counts instead of using a preset detecting PLR.
// ============================================================================
#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>

#include "csd/detection.hpp"

namespace csd {

struct TrustState {
  int trust = 100;      // clamped to [0, 200]
  int threshold = 100;  // abnormal declared when trust < threshold
};

inline TrustState tbs_update(TrustState state, double observed_plr, double q_n, double q_d) {
  if (!(observed_plr >= 0.0 && observed_plr <= 1.0)) throw std::invalid_argument("tbs_update: observed_plr outside [0,1]");
  if (observed_plr < q_n) {
    state.trust += 1;
  } else if (observed_plr > q_d) {
    state.trust -= 10;
  } else {
    state.trust -= 1;
  }
  state.trust = std::clamp(state.trust, 0, 200);
  return state;
}

inline Verdict tbs_decision(const TrustState& state) {
  const bool abnormal = state.trust < state.threshold;
  return Verdict{abnormal ? Decision::Abnormal : Decision::Normal, static_cast<double>(state.trust)};
}

/// Generalized LRT: the abnormal PLR is the pooled empirical drop fraction,
/// clamped one-sided to [q_n, 1). At the clamp the statistic is identically
/// zero, which decides Normal for any positive gamma.
inline Verdict sbs_glrt_decision(std::span<const ForwardingCounts> counts, double q_n, double gamma) {
  double total = 0.0;
  double dropped = 0.0;
  for (const auto& c : counts) {
    c.validate();
    total += c.total;
    dropped += c.dropped;
  }
  if (!(total > 0.0)) throw std::invalid_argument("sbs_glrt_decision: zero traffic");
  const double q_hat = std::min(dropped / total, 1.0 - 1e-9);
  if (q_hat <= q_n) {
    return Verdict{0.0 >= gamma ? Decision::Abnormal : Decision::Normal, 0.0};
  }
  const LlrCoefficients coeffs = llr_coefficients(q_n, q_hat);
  double stat = 0.0;
  for (const auto& c : counts) stat += node_llr(c, coeffs);
  return Verdict{stat >= gamma ? Decision::Abnormal : Decision::Normal, stat};
}

}  // namespace csd
