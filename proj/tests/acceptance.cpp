// ============================================================================
// acceptance.cpp -- end-to-end acceptance suite
//
// Runs the ten acceptance checks and prints one [PASS]/[FAIL] line per
// criterion with the measured values. Exit status is the number of failed
// criteria. Heavy criteria run 1e5 trials; expect a few minutes total.
// ============================================================================
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "csd/harness.hpp"
#include "support/oracle.hpp"
#include "support/scenarios.hpp"

using namespace csd;
using csd_test::cluster_scenario;

namespace {

constexpr std::uint64_t kMasterSeed = 424242;
int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* format, ...) {
  char buf[1024];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct PairedStats {
  std::vector<double> csd_h0, csd_h1;  // fused statistic at the final period
  std::vector<int> tbs_h0, tbs_h1;     // trust at the final period
};

// Shared-stream evaluation of CSD and TBS at spec.max_periods. All-removed
// CSD trials are encoded as +/-inf so they count as errors at any threshold.
PairedStats collect_final_statistics(const ScenarioSpec& spec) {
  const SimContext ctx(spec);
  PairedStats out;
  for (int hyp = 0; hyp < 2; ++hyp) {
    for (int trial = 0; trial < spec.trials; ++trial) {
      SchemeEvaluator filter(ctx, Scheme::Csd);
      SchemeEvaluator trust(ctx, Scheme::Tbs);
      double stat = 0.0;
      bool no_evidence = false;
      ctx.simulate_trial(ctx.ground_truth(hyp == 1), static_cast<std::uint64_t>(trial),
                         [&](const SimContext::PeriodView& view) {
                           trust.step(view);
                           if (view.period == spec.max_periods) {
                             const auto outcome = filter.step(view);
                             stat = filter.statistic();
                             no_evidence = outcome.no_trusted_evidence;
                           }
                         });
      const double inf = std::numeric_limits<double>::infinity();
      if (hyp == 0) {
        out.csd_h0.push_back(no_evidence ? inf : stat);  // always a false alarm
        out.tbs_h0.push_back(trust.trust());
      } else {
        out.csd_h1.push_back(no_evidence ? -inf : stat);  // always a miss
        out.tbs_h1.push_back(trust.trust());
      }
    }
  }
  return out;
}

// Min missed-detection rate over thresholds whose false-alarm rate is <= f.
double csd_mdp_at_fap(std::vector<double> h0, const std::vector<double>& h1, double f) {
  std::sort(h0.begin(), h0.end(), std::greater<>());
  const std::size_t allowed = static_cast<std::size_t>(f * static_cast<double>(h0.size()));
  const double cut = h0[allowed];  // any gamma just above keeps fap <= f
  std::size_t misses = 0;
  for (double s : h1) misses += s <= cut ? 1 : 0;
  return static_cast<double>(misses) / static_cast<double>(h1.size());
}

double tbs_mdp_at_fap(const std::vector<int>& h0, const std::vector<int>& h1, double f) {
  const double n = static_cast<double>(h0.size());
  double best = 1.0;
  for (int threshold = 0; threshold <= 201; ++threshold) {
    std::size_t alarms = 0;
    for (int t : h0) alarms += t < threshold ? 1 : 0;
    if (static_cast<double>(alarms) / n > f) continue;
    std::size_t misses = 0;
    for (int t : h1) misses += t >= threshold ? 1 : 0;
    best = std::min(best, static_cast<double>(misses) / n);
  }
  return best;
}

// --------------------------------------------------------------------------

void criterion_1_critical_point() {
  const auto coeffs = llr_coefficients(0.15, 0.2);
  const double target = 0.1740550;
  const double empirical = critical_point_empirical(coeffs, 1000000);
  const bool pass = std::abs(coeffs.beta - target) <= 1e-6 && std::abs(empirical - target) <= 1e-6 &&
                    std::abs(empirical - coeffs.beta) <= 1e-9;
  report(1, pass,
         fmt("critical point: beta=%.9f, bisection root=%.9f, target %.7f +/- 1e-6", coeffs.beta, empirical, target));
}

void criterion_2_exact_oracle() {
  auto spec = cluster_scenario(1);
  spec.scheme = Scheme::LrtUnfiltered;
  spec.trials = 100000;
  spec.max_periods = 1;
  spec.seed = derive_seed(kMasterSeed, {2});
  EstimateOptions options;
  options.workers = 4;
  const auto curve = estimate_rates(spec, options);

  const auto coeffs = llr_coefficients(spec.detection_params());
  const double q = spec.detection_params().q_d;
  const double fap_exact = csd_test::fused_tail_poisson(71.0, spec.q_n, coeffs.coeff_total, coeffs.coeff_dropped, spec.gamma);
  const double mdp_exact = 1.0 - csd_test::fused_tail_poisson(71.0, q, coeffs.coeff_total, coeffs.coeff_dropped, spec.gamma);
  const double fap_se = std::sqrt(fap_exact * (1.0 - fap_exact) / spec.trials);
  const double mdp_se = std::sqrt(mdp_exact * (1.0 - mdp_exact) / spec.trials);
  const double fap_mc = curve.rate(1, false);
  const double mdp_mc = curve.rate(1, true);
  const bool pass = std::abs(fap_mc - fap_exact) <= 4.0 * fap_se && std::abs(mdp_mc - mdp_exact) <= 4.0 * mdp_se;
  report(2, pass,
         fmt("exact-oracle t=1: fap mc=%.6f exact=%.6f (|d|=%.2f se), mdp mc=%.6f exact=%.6f (|d|=%.2f se)", fap_mc,
             fap_exact, std::abs(fap_mc - fap_exact) / fap_se, mdp_mc, mdp_exact,
             std::abs(mdp_mc - mdp_exact) / mdp_se));
}

void criterion_3_regular_equivalence() {
  auto spec = cluster_scenario(1);
  spec.trials = 10000;
  spec.max_periods = 50;
  spec.seed = derive_seed(kMasterSeed, {3});
  const SimContext ctx(spec);
  double min_agreement = 1.0;
  int worst_t = 0;
  const char* worst_hyp = "h0";
  for (int hyp = 0; hyp < 2; ++hyp) {
    std::vector<int> agree(static_cast<std::size_t>(spec.max_periods), 0);
    for (int trial = 0; trial < spec.trials; ++trial) {
      SchemeEvaluator filtered(ctx, Scheme::Csd);
      SchemeEvaluator plain(ctx, Scheme::LrtUnfiltered);
      ctx.simulate_trial(ctx.ground_truth(hyp == 1), static_cast<std::uint64_t>(trial),
                         [&](const SimContext::PeriodView& view) {
                           const auto a = filtered.step(view);
                           const auto b = plain.step(view);
                           if (!a.no_trusted_evidence && a.decision == b.decision) {
                             ++agree[static_cast<std::size_t>(view.period - 1)];
                           }
                         });
    }
    for (int t = 0; t < spec.max_periods; ++t) {
      const double frac = static_cast<double>(agree[static_cast<std::size_t>(t)]) / spec.trials;
      if (frac < min_agreement) {
        min_agreement = frac;
        worst_t = t + 1;
        worst_hyp = hyp == 0 ? "h0" : "h1";
      }
    }
  }
  report(3, min_agreement >= 0.99,
         fmt("regular-scenario equivalence: min per-period verdict agreement %.4f at t=%d (%s), need >= 0.99",
             min_agreement, worst_t, worst_hyp));
}

RateCurve g_c4_curve;  // reused by criteria 5 and 10
std::string g_c4_csv;
ScenarioSpec c4_scenario() {
  auto spec = cluster_scenario(2, 2.0, 0.2, 0.15);
  spec.trials = 100000;
  spec.max_periods = 100;
  spec.seed = derive_seed(kMasterSeed, {4});
  return spec;
}

void criterion_4_exponential_decay() {
  const auto spec = c4_scenario();
  EstimateOptions options;
  options.workers = 4;
  g_c4_curve = estimate_rates(spec, options);
  g_c4_csv = curve_csv_string(g_c4_curve);

  const auto fap_fit = fit_log_decay(g_c4_curve, RateKind::Fap);
  const auto mdp_fit = fit_log_decay(g_c4_curve, RateKind::Mdp);
  const double fap90 = g_c4_curve.rate(90, false);
  const double mdp77 = g_c4_curve.rate(77, true);
  const bool fits_ok = fap_fit && mdp_fit && fap_fit->slope < 0.0 && mdp_fit->slope < 0.0 &&
                       fap_fit->r_squared >= 0.9 && mdp_fit->r_squared >= 0.9;
  const bool pass = fits_ok && fap90 <= 0.02 && mdp77 <= 0.02;
  report(4, pass,
         fmt("exponential decay: fap slope=%.4f R2=%.3f, mdp slope=%.4f R2=%.3f, fap(90)=%.4f (<=0.02), "
             "mdp(77)=%.4f (<=0.02)",
             fap_fit ? fap_fit->slope : 0.0, fap_fit ? fap_fit->r_squared : 0.0, mdp_fit ? mdp_fit->slope : 0.0,
             mdp_fit ? mdp_fit->r_squared : 0.0, fap90, mdp77));
}

void criterion_5_period_grid() {
  struct Cell {
    const char* label;
    double kappa;
    double q_prime;
    double q_dprime;
    RateKind kind;
    double target;
    int expected;
    int periods_cap;
  };
  const Cell cells[] = {
      {"kappa=2 q'=0.2 FAP=0.10", 2.0, 0.2, 0.15, RateKind::Fap, 0.10, 49, 100},
      {"kappa=20 q'=0.2 FAP=0.10", 20.0, 0.2, 0.15, RateKind::Fap, 0.10, 34, 60},
      {"kappa=2 q''=0.05 MDP=0.10", 2.0, 0.2, 0.05, RateKind::Mdp, 0.10, 65, 110},
      {"kappa=20 q''=0.05 MDP=0.01", 20.0, 0.2, 0.05, RateKind::Mdp, 0.01, 75, 110},
  };
  bool pass = true;
  std::string detail = "period grid:";
  for (std::size_t i = 0; i < 4; ++i) {
    const Cell& cell = cells[i];
    std::optional<int> measured;
    if (i == 0) {
      measured = periods_to_reach(g_c4_curve, cell.target, cell.kind);  // same scenario as criterion 4
    } else {
      auto spec = cluster_scenario(2, cell.kappa, cell.q_prime, cell.q_dprime);
      spec.trials = 100000;
      spec.max_periods = cell.periods_cap;
      spec.seed = derive_seed(kMasterSeed, {5, i});
      EstimateOptions options;
      options.workers = 4;
      measured = periods_to_reach(estimate_rates(spec, options), cell.target, cell.kind);
    }
    const double lo = 0.8 * cell.expected;
    const double hi = 1.2 * cell.expected;
    const bool cell_ok = measured && lo <= *measured && *measured <= hi;
    pass = pass && cell_ok;
    detail += fmt(" [%s: %s vs %d +/-20%%%s]", cell.label,
                  measured ? std::to_string(*measured).c_str() : "not_reached", cell.expected, cell_ok ? "" : " X");
  }
  report(5, pass, detail);
}

void criterion_6_no_defense_failure() {
  bool pass = true;
  std::string detail = "no-defense failure:";
  for (int which : {2, 3}) {
    auto spec = cluster_scenario(which);
    spec.scheme = Scheme::LrtUnfiltered;
    spec.trials = 10000;
    spec.max_periods = 100;
    spec.seed = derive_seed(kMasterSeed, {6, static_cast<std::uint64_t>(which)});
    EstimateOptions options;
    options.workers = 4;
    const auto curve = estimate_rates(spec, options);
    double max_fap = 0.0, max_mdp = 0.0;
    for (const auto& p : curve.points) {
      max_fap = std::max(max_fap, p.fap);
      max_mdp = std::max(max_mdp, p.mdp);
    }
    pass = pass && max_fap >= 0.9 && max_mdp >= 0.9;
    detail += fmt(" [scenario%d: max fap=%.3f max mdp=%.3f]", which, max_fap, max_mdp);
  }
  report(6, pass, detail + " (both >= 0.9 by t=100)");
}

void criterion_7_scenario4_failure() {
  auto spec = cluster_scenario(4);
  spec.trials = 10000;
  spec.max_periods = 200;
  spec.seed = derive_seed(kMasterSeed, {7});
  EstimateOptions options;
  options.workers = 4;
  const auto curve = estimate_rates(spec, options);
  const double fap = curve.rate(200, false);
  const double mdp = curve.rate(200, true);
  report(7, fap >= 0.5 || mdp >= 0.5,
         fmt("majority-malicious failure: fap(200)=%.3f mdp(200)=%.3f (either >= 0.5)", fap, mdp));
}

void criterion_8_optimal_threshold() {
  const double grid[] = {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 4.0};
  bool unique_max = true;
  for (double z : grid) {
    if (z == 1.0) continue;
    unique_max = unique_max && supremum_packet_ratio(z) < supremum_packet_ratio(1.0);
  }

  auto spec = c4_scenario();
  spec.trials = 2000;
  spec.max_periods = 150;
  spec.seed = derive_seed(kMasterSeed, {8});
  EstimateOptions options;
  options.workers = 4;
  const std::vector<double> values{0.5, 1.0, 2.0};
  const auto cells = sweep(spec, "z_thr", values, options);
  bool sweep_ok = true;
  std::string detail = fmt("optimal threshold: xi*(1)=%.2f unique on grid: %s; sweep:",
                           supremum_packet_ratio(1.0), unique_max ? "yes" : "no");
  for (const auto& cell : cells) {
    const auto regime = asymptotic_regime(spec.benign_mu_sum(), spec.malicious_mu_sum(), cell.value);
    const bool predicted_decay = regime == RemovalRegime::KeepBenignOnly;
    const double fap = cell.curve.rate(150, false);
    const double mdp = cell.curve.rate(150, true);
    const bool decayed = fap <= 0.1 && mdp <= 0.1;
    sweep_ok = sweep_ok && decayed == predicted_decay;
    detail += fmt(" [z=%.1f: fap=%.3f mdp=%.3f %s]", cell.value, fap, mdp,
                  predicted_decay ? "expect decay" : "expect failure");
  }
  report(8, unique_max && sweep_ok, detail);
}

void criterion_9_baseline_dominance() {
  auto spec = cluster_scenario(1);
  spec.q_a = (0.215 - spec.q_n) / (1.0 - spec.q_n);  // abnormal PLR 0.215
  spec.trials = 10000;
  spec.max_periods = 10;
  spec.seed = derive_seed(kMasterSeed, {9});
  const PairedStats stats = collect_final_statistics(spec);

  bool pass = true;
  std::string detail = "baseline dominance at t=10, q=0.215:";
  for (double f : {0.05, 0.1, 0.2}) {
    const double csd = csd_mdp_at_fap(stats.csd_h0, stats.csd_h1, f);
    const double tbs = tbs_mdp_at_fap(stats.tbs_h0, stats.tbs_h1, f);
    pass = pass && csd <= tbs;
    detail += fmt(" [fap=%.2f: csd mdp=%.4f tbs mdp=%.4f%s]", f, csd, tbs, csd <= tbs ? "" : " X");
  }
  report(9, pass, detail);
}

void criterion_10_determinism() {
  const auto spec = c4_scenario();
  EstimateOptions options;
  options.workers = 1;  // criterion 4 ran with 4 workers
  const std::string rerun = curve_csv_string(estimate_rates(spec, options));
  const bool pass = !g_c4_csv.empty() && rerun == g_c4_csv;
  report(10, pass,
         fmt("determinism: 4-worker and 1-worker runs produce %s CSV (%zu bytes)",
             pass ? "byte-identical" : "DIFFERENT", rerun.size()));
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  std::printf("acceptance suite: eight-node cluster, q_n=0.15, q_d=0.2, gamma=1.4\n");

  using CriterionFn = void (*)();
  const CriterionFn criteria[] = {
      criterion_1_critical_point, criterion_2_exact_oracle,     criterion_3_regular_equivalence,
      criterion_4_exponential_decay, criterion_5_period_grid,   criterion_6_no_defense_failure,
      criterion_7_scenario4_failure, criterion_8_optimal_threshold, criterion_9_baseline_dominance,
      criterion_10_determinism,
  };
  for (auto fn : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    std::printf("            (%.1fs)\n", seconds_since(t0));
  }

  std::printf("acceptance: %d of 10 criteria failed (%.1fs total)\n", g_failures, seconds_since(start));
  return g_failures;
}
