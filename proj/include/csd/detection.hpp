// ============================================================================
// detection.hpp -- LRT mathematics for packet-drop anomaly detection
//
// A cluster head is tested against two point hypotheses on its packet loss
// rate: H0 (normal, q_n) vs H1 (detecting PLR, q_d). Each observer node
// contributes a log-likelihood ratio that is linear in its forwarded and
// dropped packet counts; the fused test compares the summed LLRs against a
// threshold gamma.
// ============================================================================
#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

namespace csd {

enum class Decision { Normal, Abnormal };

/// Test parameters shared by every detection scheme.
struct DetectionParams {
  double q_n = 0.0;    // PLR of a normal head, in (0,1)
  double q_d = 0.0;    // detecting PLR of an abnormal head, q_n < q_d < 1
  double gamma = 0.0;  // decision threshold on the fused LLR
  double z_thr = 1.0;  // outlier removal threshold, > 0

  void validate() const {
    if (!(q_n > 0.0 && q_n < 1.0)) throw std::invalid_argument("DetectionParams: q_n must be in (0,1)");
    if (!(q_d > 0.0 && q_d < 1.0)) throw std::invalid_argument("DetectionParams: q_d must be in (0,1)");
    if (!(q_n < q_d)) throw std::invalid_argument("DetectionParams: requires q_n < q_d");
    if (!std::isfinite(gamma)) throw std::invalid_argument("DetectionParams: gamma must be finite");
    if (!(z_thr > 0.0)) throw std::invalid_argument("DetectionParams: z_thr must be positive");
  }
};

/// Composes the independent environmental and deliberate loss probabilities
/// into the total PLR of an abnormal head.
inline double compose_plr(double q_n, double q_a) {
  if (!(q_n >= 0.0 && q_n <= 1.0)) throw std::invalid_argument("compose_plr: q_n outside [0,1]");
  if (!(q_a >= 0.0 && q_a <= 1.0)) throw std::invalid_argument("compose_plr: q_a outside [0,1]");
  return 1.0 - (1.0 - q_n) * (1.0 - q_a);
}

/// Per-count LLR coefficients and the critical detection point beta.
///
/// coeff_total < 0 multiplies the total forwarded count, coeff_dropped > 0
/// the dropped count; beta = -coeff_total / coeff_dropped is the drop rate
/// at which the LLR changes sign, with q_n < beta < q_d.
struct LlrCoefficients {
  double coeff_total = 0.0;
  double coeff_dropped = 0.0;
  double beta = 0.0;
};

inline LlrCoefficients llr_coefficients(double q_n, double q_d) {
  DetectionParams{q_n, q_d, 0.0, 1.0}.validate();
  LlrCoefficients c;
  c.coeff_total = std::log((1.0 - q_d) / (1.0 - q_n));
  c.coeff_dropped = std::log(q_d * (1.0 - q_n) / (q_n * (1.0 - q_d)));
  c.beta = -c.coeff_total / c.coeff_dropped;
  return c;
}

inline LlrCoefficients llr_coefficients(const DetectionParams& params) {
  params.validate();
  return llr_coefficients(params.q_n, params.q_d);
}

/// Cumulative forwarding observations for one node. Counts are reals:
/// falsified reports scale true counts by non-integral factors.
struct ForwardingCounts {
  double total = 0.0;
  double dropped = 0.0;

  void validate() const {
    if (!(total >= 0.0) || !(dropped >= 0.0)) throw std::invalid_argument("ForwardingCounts: counts must be nonnegative");
    if (dropped > total) throw std::invalid_argument("ForwardingCounts: dropped exceeds total");
  }
};

/// LLR accumulated from forwarded/dropped counts; linear in both.
inline double node_llr(const ForwardingCounts& counts, const LlrCoefficients& coeffs) {
  counts.validate();
  return coeffs.coeff_total * counts.total + coeffs.coeff_dropped * counts.dropped;
}

/// One node's report as received by the trusted node.
struct LlrReport {
  std::string node_id;
  double lambda = 0.0;  // cumulative LLR
  double mu = 0.0;      // traffic mean, known to the trusted node
};

struct Verdict {
  Decision decision = Decision::Normal;
  double statistic = 0.0;
};

/// Fused LRT over all reports: Abnormal iff the summed LLR reaches gamma
/// (the boundary rejects H0).
inline Verdict fused_decision(std::span<const LlrReport> reports, double gamma) {
  if (reports.empty()) throw std::invalid_argument("fused_decision: no reports");
  double sum = 0.0;
  for (const auto& r : reports) sum += r.lambda;
  return Verdict{sum >= gamma ? Decision::Abnormal : Decision::Normal, sum};
}

/// Empirical route to the critical detection point: the drop fraction k0/ell
/// at which the LLR of ell packets crosses zero, found by bisection through
/// node_llr. Converges to beta; used as an independent cross-check.
inline double critical_point_empirical(const LlrCoefficients& coeffs, std::uint64_t ell) {
  if (ell < 1) throw std::invalid_argument("critical_point_empirical: ell must be >= 1");
  const double total = static_cast<double>(ell);
  double lo = 0.0;
  double hi = total;
  for (int iter = 0; iter < 200 && (hi - lo) > 1e-12 * total; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (node_llr(ForwardingCounts{total, mid}, coeffs) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi) / total;
}

}  // namespace csd
