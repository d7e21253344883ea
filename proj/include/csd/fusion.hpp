// ============================================================================
// fusion.hpp -- trusted-node logic of the CSD scheme
//
// Reports are normalized to per-packet LLRs, scored with a traffic-weighted
// Z-score, and outliers beyond z_thr are removed before the fused LRT runs
// on the survivors. Also provides the asymptotic removal-regime classifier
// and the supremum packet ratio that make z_thr = 1 the optimal threshold.
// ============================================================================
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "csd/detection.hpp"

namespace csd {

/// A report's LLR per expected packet: x_i = lambda_i / (mu_i * t).
struct NormalizedLlr {
  std::string node_id;
  double x = 0.0;
  double mu = 0.0;
};

inline std::vector<NormalizedLlr> normalize(std::span<const LlrReport> reports, int t) {
  if (t < 1) throw std::invalid_argument("normalize: t must be >= 1");
  std::vector<NormalizedLlr> out;
  out.reserve(reports.size());
  for (const auto& r : reports) {
    if (!(r.mu > 0.0)) throw std::invalid_argument("normalize: mu must be positive");
    out.push_back(NormalizedLlr{r.node_id, r.lambda / (r.mu * static_cast<double>(t)), r.mu});
  }
  return out;
}

/// Weighted mean / standard deviation of a batch of normalized LLRs.
struct WeightedMoments {
  double mean = 0.0;
  double std_dev = 0.0;
};

/// Core of the filter, shared by the public API and the simulation hot path.
/// Computes mu-weighted moments and z-scores, and marks the survivors
/// (|z| <= z_thr; the boundary is kept). If the std is zero -- a single
/// report or bit-identical x values -- all z are defined as 0 and everything
/// is kept: unanimity carries no outlier evidence.
inline WeightedMoments weighted_zscore_filter(std::span<const double> xs, std::span<const double> mus,
                                              double z_thr, std::span<double> z_out,
                                              std::span<std::uint8_t> keep_out) {
  const std::size_t n = xs.size();
  if (n == 0) throw std::invalid_argument("weighted_zscore_filter: empty input");
  if (mus.size() != n || z_out.size() != n || keep_out.size() != n) {
    throw std::invalid_argument("weighted_zscore_filter: size mismatch");
  }
  if (!(z_thr > 0.0)) throw std::invalid_argument("weighted_zscore_filter: z_thr must be positive");

  double mu_sum = 0.0;
  double wx = 0.0;
  double x_scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(mus[i] > 0.0)) throw std::invalid_argument("weighted_zscore_filter: mu must be positive");
    mu_sum += mus[i];
    wx += mus[i] * xs[i];
    x_scale = std::max(x_scale, std::abs(xs[i]));
  }
  const double mean = wx / mu_sum;

  double wvar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = xs[i] - mean;
    wvar += mus[i] * d * d;
  }
  // A spread at rounding-noise level is unanimity, not outlier evidence:
  // scores would be quotients of ulps.
  double std_dev = std::sqrt(wvar / mu_sum);
  if (std_dev <= 1e-12 * x_scale) std_dev = 0.0;

  if (std_dev > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      z_out[i] = (xs[i] - mean) / std_dev;
      keep_out[i] = std::abs(z_out[i]) <= z_thr ? 1 : 0;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      z_out[i] = 0.0;
      keep_out[i] = 1;
    }
  }
  return WeightedMoments{mean, std_dev};
}

/// Z-score table for one detection period.
struct ZscoreTable {
  double mean = 0.0;
  double std_dev = 0.0;
  std::map<std::string, double> scores;
  std::set<std::string> removed;
};

inline ZscoreTable weighted_zscores(std::span<const NormalizedLlr> xs, double z_thr) {
  if (xs.empty()) throw std::invalid_argument("weighted_zscores: empty input");
  std::vector<double> x(xs.size()), mu(xs.size()), z(xs.size());
  std::vector<std::uint8_t> keep(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    x[i] = xs[i].x;
    mu[i] = xs[i].mu;
  }
  const WeightedMoments m = weighted_zscore_filter(x, mu, z_thr, z, keep);
  ZscoreTable table;
  table.mean = m.mean;
  table.std_dev = m.std_dev;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    table.scores.emplace(xs[i].node_id, z[i]);
    if (!keep[i]) table.removed.insert(xs[i].node_id);
  }
  return table;
}

/// Outcome of the filtered fused test. When the filter removes every report
/// there is no trusted evidence left and the verdict is not meaningful;
/// callers must treat that as a detection failure.
struct CsdDecision {
  Verdict verdict;
  ZscoreTable zscores;
  bool no_trusted_evidence = false;
};

inline CsdDecision csd_decision(std::span<const LlrReport> reports, int t, const DetectionParams& params) {
  if (reports.empty()) throw std::invalid_argument("csd_decision: no reports");
  params.validate();
  const auto xs = normalize(reports, t);
  CsdDecision result;
  result.zscores = weighted_zscores(xs, params.z_thr);

  double sum = 0.0;
  std::size_t kept = 0;
  for (const auto& r : reports) {
    if (!result.zscores.removed.contains(r.node_id)) {
      sum += r.lambda;
      ++kept;
    }
  }
  if (kept == 0) {
    result.no_trusted_evidence = true;
    result.verdict = Verdict{Decision::Normal, 0.0};
    return result;
  }
  result.verdict = Verdict{sum >= params.gamma ? Decision::Abnormal : Decision::Normal, sum};
  return result;
}

/// Asymptotic outcome of the filter for benign/malicious packet masses
/// mu0/mu1 as t grows: the groups' |z| limits are sqrt(mu1/mu0) and
/// sqrt(mu0/mu1), so survival depends only on mu0/mu1 vs z_thr^{+-2}.
enum class RemovalRegime { KeepBoth, KeepBenignOnly, KeepMaliciousOnly, RemoveAll };

inline RemovalRegime asymptotic_regime(double mu0, double mu1, double z_thr) {
  if (!(mu0 >= 0.0 && mu1 >= 0.0 && mu0 + mu1 > 0.0)) {
    throw std::invalid_argument("asymptotic_regime: need mu0, mu1 >= 0 with mu0 + mu1 > 0");
  }
  if (!(z_thr > 0.0)) throw std::invalid_argument("asymptotic_regime: z_thr must be positive");
  if (mu1 == 0.0) return RemovalRegime::KeepBenignOnly;  // no adversary present
  const double ratio = mu0 / mu1;
  const double hi = z_thr * z_thr;
  const double lo = 1.0 / hi;
  if (lo <= ratio && ratio <= hi) return RemovalRegime::KeepBoth;
  if (ratio >= lo && ratio > hi) return RemovalRegime::KeepBenignOnly;
  if (ratio < lo && ratio <= hi) return RemovalRegime::KeepMaliciousOnly;
  return RemovalRegime::RemoveAll;  // lo > ratio > hi, only reachable for z_thr < 1
}

/// Supremum benign/malicious packet ratio still defeatable by some group
/// strategy: xi*(z_thr) = min{z_thr^-2, z_thr^2}. Uniquely maximized at
/// z_thr = 1 with value 1.
inline double supremum_packet_ratio(double z_thr) {
  if (!(z_thr > 0.0)) throw std::invalid_argument("supremum_packet_ratio: z_thr must be positive");
  const double sq = z_thr * z_thr;
  return std::min(1.0 / sq, sq);
}

}  // namespace csd
