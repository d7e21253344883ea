#include "csd/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

namespace csd {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

int resolve_workers(int requested, int trials) {
  int w = requested;
  if (w <= 0) w = static_cast<int>(std::thread::hardware_concurrency());
  if (w < 1) w = 1;
  return std::min(w, trials);
}

}  // namespace

std::vector<PeriodOutcome> run_trial(const ScenarioSpec& spec, const HeadGroundTruth& truth,
                                     std::uint64_t trial_index) {
  SimContext ctx(spec);
  SchemeEvaluator eval(ctx, spec.scheme);
  std::vector<PeriodOutcome> outcomes;
  outcomes.reserve(static_cast<std::size_t>(spec.max_periods));
  ctx.simulate_trial(truth, trial_index, [&](const SimContext::PeriodView& view) {
    outcomes.push_back(eval.step(view));
  });
  return outcomes;
}

double RateCurve::rate(int period, bool mdp) const {
  const auto& p = points.at(static_cast<std::size_t>(period - 1));
  return mdp ? p.mdp : p.fap;
}

RateCurve estimate_rates(const ScenarioSpec& spec, const EstimateOptions& options) {
  spec.validate();
  const SimContext ctx(spec);
  const int T = spec.max_periods;
  const int trials = spec.trials;
  std::vector<std::uint64_t> false_alarms(static_cast<std::size_t>(T), 0);
  std::vector<std::uint64_t> missed(static_cast<std::size_t>(T), 0);
  std::uint64_t h0_failed = 0;
  std::uint64_t h1_failed = 0;

  const bool debug = options.zscore_debug != nullptr;
  const int workers = debug ? 1 : resolve_workers(options.workers, trials);

  if (debug) {
    // z-score tables exist only for the filtering scheme; other schemes dump
    // an empty table.
    *options.zscore_debug << "trial,period,node_id,x,z,removed,hypothesis\n";
  }

  std::mutex merge_mutex;
  auto worker_fn = [&](int begin, int end) {
    std::vector<std::uint64_t> fa(static_cast<std::size_t>(T), 0);
    std::vector<std::uint64_t> md(static_cast<std::size_t>(T), 0);
    std::uint64_t fail0 = 0;
    std::uint64_t fail1 = 0;
    for (int trial = begin; trial < end; ++trial) {
      for (int hyp = 0; hyp < 2; ++hyp) {
        const bool abnormal = hyp == 1;
        SchemeEvaluator eval(ctx, spec.scheme);
        bool any_removed_all = false;
        ctx.simulate_trial(ctx.ground_truth(abnormal), static_cast<std::uint64_t>(trial),
                           [&](const SimContext::PeriodView& view) {
          const PeriodOutcome out = eval.step(view);
          any_removed_all = any_removed_all || out.no_trusted_evidence;
          const bool error = abnormal ? (out.no_trusted_evidence || out.decision == Decision::Normal)
                                      : (out.no_trusted_evidence || out.decision == Decision::Abnormal);
          if (error) {
            auto& counter = abnormal ? md : fa;
            ++counter[static_cast<std::size_t>(view.period - 1)];
          }
          if (debug && spec.scheme == Scheme::Csd) {
            const auto xs = eval.normalized();
            const auto zs = eval.zscores();
            const auto keep = eval.keep_mask();
            for (std::size_t i = 0; i < xs.size(); ++i) {
              *options.zscore_debug << trial << ',' << view.period << ',' << spec.nodes[i].node_id << ','
                                    << fmt(xs[i]) << ',' << fmt(zs[i]) << ',' << (keep[i] ? 0 : 1) << ','
                                    << (abnormal ? "h1" : "h0") << '\n';
            }
          }
        });
        if (any_removed_all) {
          ++(abnormal ? fail1 : fail0);
        }
      }
    }
    std::lock_guard<std::mutex> lock(merge_mutex);
    for (int t = 0; t < T; ++t) {
      false_alarms[static_cast<std::size_t>(t)] += fa[static_cast<std::size_t>(t)];
      missed[static_cast<std::size_t>(t)] += md[static_cast<std::size_t>(t)];
    }
    h0_failed += fail0;
    h1_failed += fail1;
  };

  if (workers == 1) {
    worker_fn(0, trials);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (trials + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int begin = w * chunk;
      const int end = std::min(trials, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(worker_fn, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  RateCurve curve;
  curve.trials = trials;
  curve.h0_failed_trials = h0_failed;
  curve.h1_failed_trials = h1_failed;
  curve.points.reserve(static_cast<std::size_t>(T));
  const double n = static_cast<double>(trials);
  for (int t = 0; t < T; ++t) {
    RatePoint p;
    p.period = t + 1;
    p.fap = static_cast<double>(false_alarms[static_cast<std::size_t>(t)]) / n;
    p.mdp = static_cast<double>(missed[static_cast<std::size_t>(t)]) / n;
    p.fap_stderr = std::sqrt(p.fap * (1.0 - p.fap) / n);
    p.mdp_stderr = std::sqrt(p.mdp * (1.0 - p.mdp) / n);
    curve.points.push_back(p);
  }
  return curve;
}

std::optional<int> periods_to_reach(const RateCurve& curve, double target, RateKind kind) {
  if (!(target > 0.0 && target < 1.0)) throw std::invalid_argument("periods_to_reach: target must be in (0,1)");
  std::optional<int> reached;
  for (auto it = curve.points.rbegin(); it != curve.points.rend(); ++it) {
    const double rate = kind == RateKind::Fap ? it->fap : it->mdp;
    if (rate <= target) {
      reached = it->period;
    } else {
      break;
    }
  }
  return reached;
}

std::optional<int> periods_to_reach(const ScenarioSpec& spec, double target, RateKind kind,
                                    const EstimateOptions& options) {
  return periods_to_reach(estimate_rates(spec, options), target, kind);
}

namespace {

enum class SweepAxis { ZThr, Gamma, QA, Kappa, QPrime, QDprime };

std::optional<SweepAxis> axis_from_string(std::string_view axis) {
  if (axis == "z_thr") return SweepAxis::ZThr;
  if (axis == "gamma") return SweepAxis::Gamma;
  if (axis == "q_a") return SweepAxis::QA;
  if (axis == "kappa") return SweepAxis::Kappa;
  if (axis == "q_prime") return SweepAxis::QPrime;
  if (axis == "q_dprime") return SweepAxis::QDprime;
  return std::nullopt;
}

void apply_axis(ScenarioSpec& spec, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::ZThr: spec.z_thr = value; return;
    case SweepAxis::Gamma: spec.gamma = value; return;
    case SweepAxis::QA: spec.q_a = value; return;
    case SweepAxis::Kappa:
    case SweepAxis::QPrime:
    case SweepAxis::QDprime: {
      bool any = false;
      for (auto& node : spec.nodes) {
        if (node.role != NodeRole::Malicious) continue;
        any = true;
        if (axis == SweepAxis::Kappa) node.strategy->kappa = value;
        if (axis == SweepAxis::QPrime) node.strategy->q_prime = value;
        if (axis == SweepAxis::QDprime) node.strategy->q_dprime = value;
      }
      if (!any) throw ScenarioError("sweep: axis requires at least one malicious node");
      return;
    }
  }
}

}  // namespace

std::vector<SweepCell> sweep(const ScenarioSpec& spec, std::string_view axis, std::span<const double> values,
                             const EstimateOptions& options) {
  const auto parsed = axis_from_string(axis);
  if (!parsed) throw ScenarioError("sweep: unknown axis '" + std::string(axis) + "'");
  std::vector<SweepCell> cells;
  cells.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    ScenarioSpec cell_spec = spec;
    apply_axis(cell_spec, *parsed, values[i]);
    cell_spec.seed = derive_seed(spec.seed, {kSweepDomain, static_cast<std::uint64_t>(*parsed),
                                             static_cast<std::uint64_t>(i)});
    cell_spec.validate();
    cells.push_back(SweepCell{values[i], estimate_rates(cell_spec, options)});
  }
  return cells;
}

void write_curve_csv(std::ostream& out, const RateCurve& curve) {
  out << "period,fap,fap_stderr,mdp,mdp_stderr,trials\n";
  for (const auto& p : curve.points) {
    out << p.period << ',' << fmt(p.fap) << ',' << fmt(p.fap_stderr) << ',' << fmt(p.mdp) << ','
        << fmt(p.mdp_stderr) << ',' << curve.trials << '\n';
  }
}

std::string curve_csv_string(const RateCurve& curve) {
  std::ostringstream out;
  write_curve_csv(out, curve);
  return out.str();
}

std::optional<LogLinearFit> fit_log_decay(const RateCurve& curve, RateKind kind, int min_count) {
  const auto rate_at = [&](std::size_t i) {
    return kind == RateKind::Fap ? curve.points[i].fap : curve.points[i].mdp;
  };
  if (curve.points.empty() || curve.trials <= 0) return std::nullopt;

  std::size_t peak = 0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    if (rate_at(i) > rate_at(peak)) peak = i;
  }
  const double min_rate = static_cast<double>(min_count) / static_cast<double>(curve.trials);
  std::vector<double> ts;
  std::vector<double> ys;
  for (std::size_t i = peak; i < curve.points.size(); ++i) {
    const double r = rate_at(i);
    if (r >= min_rate) {
      ts.push_back(static_cast<double>(curve.points[i].period));
      ys.push_back(std::log(r));
    }
  }
  if (ts.size() < 3) return std::nullopt;

  const double n = static_cast<double>(ts.size());
  double st = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sy += ys[i];
  }
  const double tbar = st / n;
  const double ybar = sy / n;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double dt = ts[i] - tbar;
    const double dy = ys[i] - ybar;
    stt += dt * dt;
    sty += dt * dy;
    syy += dy * dy;
  }
  if (stt == 0.0) return std::nullopt;
  LogLinearFit fit;
  fit.slope = sty / stt;
  fit.intercept = ybar - fit.slope * tbar;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double resid = ys[i] - (fit.intercept + fit.slope * ts[i]);
    ss_res += resid * resid;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.first_period = static_cast<int>(ts.front());
  fit.last_period = static_cast<int>(ts.back());
  fit.n_points = static_cast<int>(ts.size());
  return fit;
}

}  // namespace csd
