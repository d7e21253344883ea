// ============================================================================
// harness.hpp -- scenario-driven Monte Carlo engine
//
// A trial simulates one head under one hypothesis for max_periods detection
// periods, feeding cumulative reports to the selected scheme after each
// period. estimate_rates runs paired H0/H1 trials on disjoint derived
// streams and averages the per-period error indicators into FAP/MDP curves.
// Trials are independent work units; results are exact integer counts, so
// output is byte-identical for any worker count.
// ============================================================================
#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csd/baselines.hpp"
#include "csd/detection.hpp"
#include "csd/falsification.hpp"
#include "csd/fusion.hpp"
#include "csd/scenario.hpp"
#include "csd/traffic.hpp"

namespace csd {

struct PeriodOutcome {
  Decision decision = Decision::Normal;
  bool no_trusted_evidence = false;  // the filter removed every report
};

/// Scenario precompiled for the per-trial hot loop.
class SimContext {
 public:
  explicit SimContext(const ScenarioSpec& spec) : spec_(spec), params_(spec.detection_params()) {
    spec_.validate();
    coeffs_ = llr_coefficients(params_);
    for (const auto& n : spec_.nodes) {
      samplers_.push_back(NodeSampler(n.mu));
      mus_.push_back(n.mu);
      malicious_.push_back(n.role == NodeRole::Malicious ? 1 : 0);
    }
  }

  [[nodiscard]] const ScenarioSpec& spec() const { return spec_; }
  [[nodiscard]] const DetectionParams& params() const { return params_; }
  [[nodiscard]] const LlrCoefficients& coeffs() const { return coeffs_; }
  [[nodiscard]] std::span<const double> mus() const { return mus_; }
  [[nodiscard]] std::size_t node_count() const { return mus_.size(); }

  [[nodiscard]] HeadGroundTruth ground_truth(bool abnormal) const {
    return HeadGroundTruth{abnormal, abnormal ? params_.q_d : params_.q_n};
  }

  /// One simulated trial under the given ground truth. After each period,
  /// `per_period` receives the cumulative reports (benign nodes report
  /// truthfully, malicious ones per their falsification triple) plus this
  /// period's reported aggregates. The stream domain follows
  /// truth.is_abnormal, so H0 and H1 branches draw from disjoint streams.
  template <typename F>
  void simulate_trial(const HeadGroundTruth& truth, std::uint64_t trial, F&& per_period) const {
    const std::size_t n = node_count();
    std::vector<ForwardingCounts> cumulative(n);
    std::vector<LlrReport> reports(n);
    for (std::size_t i = 0; i < n; ++i) {
      reports[i].node_id = spec_.nodes[i].node_id;
      reports[i].mu = mus_[i];
    }
    for (int period = 1; period <= spec_.max_periods; ++period) {
      PeriodStreams streams{spec_.seed, truth.is_abnormal ? 1ull : 0ull, trial,
                            static_cast<std::uint64_t>(period)};
      double period_sent = 0.0;
      double period_dropped = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        RngStream rng = streams.node_stream(i);
        const auto [sent, dropped] = sample_sent_dropped(samplers_[i], truth.plr, rng);
        double rep_sent = static_cast<double>(sent);
        double rep_dropped = static_cast<double>(dropped);
        if (malicious_[i]) {
          const FalsifiedCounts fc = falsified_counts(spec_.nodes[i], rep_sent, truth);
          rep_sent = fc.sent;
          rep_dropped = fc.dropped;
        }
        cumulative[i].total += rep_sent;
        cumulative[i].dropped += rep_dropped;
        reports[i].lambda = node_llr(cumulative[i], coeffs_);
        period_sent += rep_sent;
        period_dropped += rep_dropped;
      }
      per_period(PeriodView{period, reports, cumulative, period_sent, period_dropped});
    }
  }

  struct PeriodView {
    int period;  // 1-based
    std::span<const LlrReport> reports;
    std::span<const ForwardingCounts> cumulative;
    double period_sent;
    double period_dropped;
  };

 private:
  ScenarioSpec spec_;
  DetectionParams params_;
  LlrCoefficients coeffs_;
  std::vector<NodeSampler> samplers_;
  std::vector<double> mus_;
  std::vector<std::uint8_t> malicious_;
};

/// Applies one scheme period by period. TBS keeps its trust state across
/// periods; the other schemes are stateless in t.
class SchemeEvaluator {
 public:
  SchemeEvaluator(const SimContext& ctx, Scheme scheme)
      : ctx_(&ctx),
        scheme_(scheme),
        trust_{100, ctx.spec().tbs_threshold},
        x_(ctx.node_count()),
        z_(ctx.node_count()),
        keep_(ctx.node_count(), 1) {}

  PeriodOutcome step(const SimContext::PeriodView& view) {
    const DetectionParams& p = ctx_->params();
    switch (scheme_) {
      case Scheme::LrtUnfiltered: {
        const Verdict v = fused_decision(view.reports, p.gamma);
        statistic_ = v.statistic;
        return PeriodOutcome{v.decision, false};
      }
      case Scheme::Csd: {
        const double t = static_cast<double>(view.period);
        for (std::size_t i = 0; i < x_.size(); ++i) {
          x_[i] = view.reports[i].lambda / (view.reports[i].mu * t);
        }
        weighted_zscore_filter(x_, ctx_->mus(), p.z_thr, z_, keep_);
        double sum = 0.0;
        std::size_t kept = 0;
        for (std::size_t i = 0; i < keep_.size(); ++i) {
          if (keep_[i]) {
            sum += view.reports[i].lambda;
            ++kept;
          }
        }
        if (kept == 0) {
          statistic_ = 0.0;
          return PeriodOutcome{Decision::Normal, true};
        }
        statistic_ = sum;
        return PeriodOutcome{sum >= p.gamma ? Decision::Abnormal : Decision::Normal, false};
      }
      case Scheme::Tbs: {
        if (view.period_sent > 0.0) {
          trust_ = tbs_update(trust_, view.period_dropped / view.period_sent, p.q_n, p.q_d);
        }
        const Verdict v = tbs_decision(trust_);
        statistic_ = v.statistic;
        return PeriodOutcome{v.decision, false};
      }
      case Scheme::Sbs: {
        double total = 0.0;
        for (const auto& c : view.cumulative) total += c.total;
        if (!(total > 0.0)) {
          statistic_ = 0.0;
          return PeriodOutcome{Decision::Normal, false};  // no traffic yet, no evidence
        }
        const Verdict v = sbs_glrt_decision(view.cumulative, p.q_n, p.gamma);
        statistic_ = v.statistic;
        return PeriodOutcome{v.decision, false};
      }
    }
    return PeriodOutcome{};
  }

  /// Last period's fused statistic (CSD/LRT/SBS) or trust value (TBS).
  [[nodiscard]] double statistic() const { return statistic_; }
  [[nodiscard]] int trust() const { return trust_.trust; }
  [[nodiscard]] std::span<const double> normalized() const { return x_; }
  [[nodiscard]] std::span<const double> zscores() const { return z_; }
  [[nodiscard]] std::span<const std::uint8_t> keep_mask() const { return keep_; }

 private:
  const SimContext* ctx_;
  Scheme scheme_;
  TrustState trust_;
  double statistic_ = 0.0;
  std::vector<double> x_;
  std::vector<double> z_;
  std::vector<std::uint8_t> keep_;
};

/// Runs one trial under an explicit ground truth and returns the per-period
/// scheme outcomes. Deterministic in (spec.seed, trial_index, truth).
std::vector<PeriodOutcome> run_trial(const ScenarioSpec& spec, const HeadGroundTruth& truth,
                                     std::uint64_t trial_index);

struct RatePoint {
  int period = 0;
  double fap = 0.0;
  double fap_stderr = 0.0;
  double mdp = 0.0;
  double mdp_stderr = 0.0;
};

struct RateCurve {
  std::vector<RatePoint> points;
  int trials = 0;
  // Trials in which the filter removed every report at least once.
  std::uint64_t h0_failed_trials = 0;
  std::uint64_t h1_failed_trials = 0;

  [[nodiscard]] double rate(int period, bool mdp) const;  // period is 1-based
};

struct EstimateOptions {
  int workers = 1;                        // <= 0 selects hardware concurrency
  std::ostream* zscore_debug = nullptr;   // forces single-threaded execution
};

/// FAP(t) = fraction of H0 trials deciding Abnormal at t; MDP(t) = fraction
/// of H1 trials deciding Normal at t. An all-removed period counts as the
/// error of its hypothesis. Malicious nodes claim q' under H0 and q'' under
/// H1; the abnormal head drops at compose_plr(q_n, q_a).
RateCurve estimate_rates(const ScenarioSpec& spec, const EstimateOptions& options = {});

enum class RateKind { Fap, Mdp };

/// Smallest t such that the estimated rate stays at or below `target` for
/// every period from t on (the decaying crossing; FAP/MDP curves under
/// falsification rise before they decay). nullopt when never reached.
std::optional<int> periods_to_reach(const RateCurve& curve, double target, RateKind kind);
std::optional<int> periods_to_reach(const ScenarioSpec& spec, double target, RateKind kind,
                                    const EstimateOptions& options = {});

struct SweepCell {
  double value = 0.0;
  RateCurve curve;
};

/// Re-runs the scenario once per axis value with a per-cell derived seed.
/// Axes: z_thr, gamma, q_a, kappa, q_prime, q_dprime (the last three apply
/// to every malicious node).
std::vector<SweepCell> sweep(const ScenarioSpec& spec, std::string_view axis, std::span<const double> values,
                             const EstimateOptions& options = {});

/// Curve CSV with the exact header
/// `period,fap,fap_stderr,mdp,mdp_stderr,trials`.
void write_curve_csv(std::ostream& out, const RateCurve& curve);
std::string curve_csv_string(const RateCurve& curve);

struct LogLinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int first_period = 0;
  int last_period = 0;
  int n_points = 0;
};

/// Least-squares fit of log(rate) vs t over the decaying range: from the
/// curve's peak through the last period whose error count is at least
/// `min_count` (so the log is not dominated by shot noise).
std::optional<LogLinearFit> fit_log_decay(const RateCurve& curve, RateKind kind, int min_count = 5);

}  // namespace csd
