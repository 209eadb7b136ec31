#include "adaptopt/experiments.hpp"

#include "adaptopt/concentration.hpp"
#include "adaptopt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace adaptopt {

namespace {

double suboptimality(const StochasticProblem& problem, const Vector& x) {
  return population_suboptimality(problem, x);
}

const PopulationOracle& require_oracle(const StochasticProblem& problem) {
  const PopulationOracle* oracle = problem.population();
  if (oracle == nullptr) {
    throw OracleUnavailable("family '" + problem.name() + "' has no population oracle");
  }
  return *oracle;
}

std::shared_ptr<const StochasticProblem> build_family(const std::string& name, ParamMap params,
                                                      std::size_t n, bool tie_design_n) {
  if (tie_design_n && name == "abs_linear_adversarial") params["n"] = std::to_string(n);
  return make_family(name, params);
}

std::size_t argmin_index(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
}

void check_disjoint(std::vector<std::vector<std::uint64_t>> groups) {
  std::vector<std::uint64_t> all;
  for (auto& g : groups) all.insert(all.end(), g.begin(), g.end());
  std::sort(all.begin(), all.end());
  check_invariant(std::adjacent_find(all.begin(), all.end()) == all.end(), "sample_hygiene",
                  "stages share a sample id");
}

void check_selection(const SelectionOutcome& s) {
  check_invariant(s.in_safe_set(s.chosen), "safe_set_soundness", "chosen index not in safe set");
  const auto k = static_cast<Eigen::Index>(s.chosen);
  check_invariant(s.mean_losses[k] + s.tau[k] <= s.theta, "safe_set_soundness",
                  "F_chosen + tau_chosen exceeds theta");
  check_invariant(s.mean_losses[k] + s.tau[k] <= s.mean_losses[0], "reference_anchoring",
                  "F_chosen + tau_chosen exceeds F_0");
}

void check_radius(double output_norm, double radius) {
  check_invariant(output_norm <= radius + 1e-9 * std::max(1.0, radius), "ball_feasibility",
                  "output norm " + format_double(output_norm) + " exceeds radius " +
                      format_double(radius));
}

Norm known_radius_norm(ScalingMethod m) {
  switch (m) {
    case ScalingMethod::AdaEmd: return Norm::L1;
    case ScalingMethod::AdaGrad: return Norm::Linf;
    default: return Norm::L2;
  }
}

std::vector<std::string> metric_row(const std::string& metric, const std::string& key, double v) {
  return {metric, key, format_double(v)};
}

Table metric_table() { return Table{{"metric", "key", "value"}, {}}; }

std::string flag_text(bool b) { return b ? "1" : "0"; }

}  // namespace

// ---------------------------------------------------------------------------
// lowerbound

LowerboundResult run_lowerbound(const LowerboundParams& params) {
  if (params.n < 3000) throw std::invalid_argument("lowerbound: n must be at least 3000");
  if (params.trials < 1) throw std::invalid_argument("lowerbound: trials must be >= 1");
  if (params.rate_max_exp < params.rate_min_exp) {
    throw std::invalid_argument("lowerbound: empty rate grid");
  }
  LowerboundResult out;
  out.params = params;
  for (int k = params.rate_min_exp; k <= params.rate_max_exp; ++k) {
    out.rates.push_back(std::exp(static_cast<double>(k)));
  }
  const AbsLinearAdversarial problem(params.n, 0.0);
  const std::size_t n = params.n;
  out.threshold = out.rates.back() / (288.0 * std::sqrt(static_cast<double>(n)));
  out.trials.resize(params.trials);

  parallel_for(params.trials, params.threads, [&](std::size_t t) {
    const auto samples = sample_batch(problem, 2 * n, derive_key(params.seed, t));
    const std::span<const Sample> training(samples.data(), n);
    const std::span<const Sample> validation(samples.data() + n, n);

    std::vector<Vector> points{Vector::Zero(1)};
    Vector norms = Vector::Zero(static_cast<Eigen::Index>(out.rates.size() + 1));
    for (std::size_t k = 0; k < out.rates.size(); ++k) {
      points.push_back(ada_sgd(problem, out.rates[k], training).average_iterate);
      norms[static_cast<Eigen::Index>(k + 1)] = std::abs(points.back()[0]);
    }
    const LossMatrix losses = loss_matrix(problem, validation, points);
    const SelectionOutcome greedy =
        standard_select(losses.rightCols(static_cast<Eigen::Index>(out.rates.size())));
    const ConfidenceWidths widths = widths_theory(losses, 1.0, norms, params.delta);
    const SelectionOutcome reliable = reliable_select(losses, widths, params.gamma);
    check_selection(reliable);

    LowerboundTrial& row = out.trials[t];
    row.greedy = greedy.chosen;
    row.reliable = reliable.chosen;
    row.greedy_suboptimality = suboptimality(problem, points[greedy.chosen + 1]);
    row.reliable_suboptimality = suboptimality(problem, points[reliable.chosen]);
    row.indicator = row.greedy_suboptimality >= out.threshold;
  });

  double hits = 0.0;
  std::vector<double> greedy;
  std::vector<double> reliable;
  for (const LowerboundTrial& row : out.trials) {
    hits += row.indicator ? 1.0 : 0.0;
    greedy.push_back(row.greedy_suboptimality);
    reliable.push_back(row.reliable_suboptimality);
  }
  out.indicator_rate = hits / static_cast<double>(out.trials.size());
  out.greedy_mean = mean(greedy);
  out.reliable_mean = mean(reliable);
  return out;
}

// ---------------------------------------------------------------------------
// scaling

ScalingMethod parse_scaling_method(std::string_view text) {
  if (text == "ada_sgd") return ScalingMethod::AdaSgd;
  if (text == "ada_emd") return ScalingMethod::AdaEmd;
  if (text == "ada_grad") return ScalingMethod::AdaGrad;
  if (text == "two_stage") return ScalingMethod::TwoStage;
  if (text == "lambda_grid") return ScalingMethod::LambdaGrid;
  if (text == "multi_geometry") return ScalingMethod::MultiGeometry;
  throw std::invalid_argument("unknown scaling method '" + std::string(text) + "'");
}

std::string_view to_string(ScalingMethod m) {
  switch (m) {
    case ScalingMethod::AdaSgd: return "ada_sgd";
    case ScalingMethod::AdaEmd: return "ada_emd";
    case ScalingMethod::AdaGrad: return "ada_grad";
    case ScalingMethod::TwoStage: return "two_stage";
    case ScalingMethod::LambdaGrid: return "lambda_grid";
    case ScalingMethod::MultiGeometry: return "multi_geometry";
  }
  return "?";
}

ScalingResult run_scaling(const ScalingParams& params) {
  if (params.trials < 1) throw std::invalid_argument("scaling: trials must be >= 1");
  if (params.n_grid.empty()) throw std::invalid_argument("scaling: empty n grid");
  for (std::size_t i = 1; i < params.n_grid.size(); ++i) {
    if (params.n_grid[i] <= params.n_grid[i - 1]) {
      throw std::invalid_argument("scaling: n grid must be strictly increasing");
    }
  }
  ScalingResult out;
  out.params = params;
  std::vector<double> ns;
  std::vector<double> medians;

  for (const std::size_t n : params.n_grid) {
    const auto problem = build_family(params.family, params.family_params, n, params.tie_design_n);
    const PopulationOracle& oracle = require_oracle(*problem);
    const bool known = params.method == ScalingMethod::AdaSgd ||
                       params.method == ScalingMethod::AdaEmd ||
                       params.method == ScalingMethod::AdaGrad;
    const Norm geometry = known ? known_radius_norm(params.method)
                                : (params.method == ScalingMethod::MultiGeometry ? Norm::L2 : params.p);
    out.d_star = oracle.d_star(geometry);
    const double known_radius = params.radius > 0.0 ? params.radius : out.d_star;
    if (known && !(known_radius > 0.0)) {
      throw std::invalid_argument("scaling: known-radius methods need a positive radius");
    }

    AdaptiveOptions options;
    options.strategy = params.strategy;
    options.grid_radius = params.grid_radius;
    if (params.lipschitz_inflation) {
      LipschitzEstimates lip = lipschitz_from_problem(*problem);
      const double factor = std::sqrt(static_cast<double>(n) / std::log(1.0 / params.delta));
      lip.l2 *= factor;
      lip.coord *= factor;
      options.lipschitz = lip;
    }
    const std::size_t stages = known ? 1
                               : params.method == ScalingMethod::TwoStage ? 2
                                                                          : 3;
    const std::uint64_t n_key = derive_key(params.seed, n);
    std::vector<ScalingTrial> rows(params.trials);

    parallel_for(params.trials, params.threads, [&](std::size_t t) {
      const auto samples = sample_batch(*problem, stages * n, derive_key(n_key, t));
      ScalingTrial& row = rows[t];
      row.n = n;
      row.trial = t;
      Vector output;
      switch (params.method) {
        case ScalingMethod::AdaSgd:
        case ScalingMethod::AdaEmd:
        case ScalingMethod::AdaGrad:
          output = run_geometry_optimizer(geometry, *problem, known_radius, samples).average_iterate;
          row.radius = known_radius;
          break;
        case ScalingMethod::TwoStage: {
          const AdaptiveResult res = optimal_adaptive(*problem, samples, params.p, params.delta, options);
          check_disjoint({res.first_ids, res.second_ids});
          output = res.output;
          row.radius = res.radius;
          row.lambda = res.lambda;
          row.erm_flagged = res.erm.residual_flagged;
          break;
        }
        case ScalingMethod::LambdaGrid: {
          const GridAdaptiveResult res =
              lambda_grid_adaptive(*problem, samples, params.p, params.delta, params.gamma, options);
          check_selection(res.selection);
          output = res.output;
          if (res.selection.chosen > 0) {
            const AdaptiveResult& m = res.members[res.selection.chosen - 1];
            row.radius = m.radius;
            row.lambda = m.lambda;
            row.erm_flagged = m.erm.residual_flagged;
          }
          break;
        }
        case ScalingMethod::MultiGeometry: {
          const MultiGeometryResult res =
              multi_geometry(*problem, samples, params.delta, params.gamma, options);
          check_selection(res.selection);
          output = res.output;
          if (res.selection.chosen > 0) {
            const AdaptiveResult& m = res.candidates[res.selection.chosen - 1];
            row.radius = m.radius;
            row.lambda = m.lambda;
            row.erm_flagged = m.erm.residual_flagged;
          }
          break;
        }
      }
      row.output_norm = norm(output, geometry);
      if (params.method != ScalingMethod::MultiGeometry) check_radius(row.output_norm, row.radius);
      row.suboptimality = suboptimality(*problem, output);
    });

    std::vector<double> sub;
    ScalingPoint point;
    point.n = n;
    for (const ScalingTrial& row : rows) {
      sub.push_back(row.suboptimality);
      point.max_output_norm = std::max(point.max_output_norm, row.output_norm);
    }
    point.median = median(sub);
    point.mean = mean(sub);
    point.q10 = quantile(sub, 0.1);
    point.q90 = quantile(sub, 0.9);
    out.points.push_back(point);
    out.trials.insert(out.trials.end(), rows.begin(), rows.end());
    ns.push_back(static_cast<double>(n));
    medians.push_back(point.median);
  }
  if (ns.size() >= 2 && std::all_of(medians.begin(), medians.end(), [](double v) { return v > 0.0; })) {
    out.fit = fit_loglog(ns, medians);
  } else {
    out.fit.slope = out.fit.intercept = out.fit.slope_stderr = std::nan("");
  }
  return out;
}

// ---------------------------------------------------------------------------
// adaptive

AdaptiveRunResult run_adaptive(const AdaptiveParams& params) {
  if (params.trials < 1) throw std::invalid_argument("adaptive: trials must be >= 1");
  const auto problem = build_family(params.family, params.family_params, params.n, params.tie_design_n);
  const PopulationOracle& oracle = require_oracle(*problem);
  const Norm geometry = params.mode == AdaptiveMode::AllGeometries ? Norm::L2 : params.p;

  AdaptiveRunResult out;
  out.params = params;
  out.d_star = oracle.d_star(geometry);
  AdaptiveOptions options;
  options.strategy = params.strategy;
  options.grid_radius = params.grid_radius;
  const std::size_t stages = params.mode == AdaptiveMode::TwoStage ? 2 : 3;
  if (params.mode == AdaptiveMode::AllGeometries) out.candidate_count = 3;
  if (params.mode == AdaptiveMode::LambdaGrid) {
    out.candidate_count = lambda_grid_size(lipschitz_from_problem(*problem).dual_scale(params.p));
  }
  out.trials.resize(params.trials);

  parallel_for(params.trials, params.threads, [&](std::size_t t) {
    const auto samples = sample_batch(*problem, stages * params.n, derive_key(params.seed, t));
    AdaptiveTrial& row = out.trials[t];
    Vector output;
    const AdaptiveResult* chosen = nullptr;
    std::vector<Vector> candidates;
    Vector tau;
    if (params.mode == AdaptiveMode::TwoStage) {
      const AdaptiveResult res = optimal_adaptive(*problem, samples, params.p, params.delta, options);
      check_disjoint({res.first_ids, res.second_ids});
      output = res.output;
      row.radius = res.radius;
      row.lambda = res.lambda;
      row.erm_residual = res.erm.solver_residual;
      row.erm_flagged = res.erm.residual_flagged;
      row.output_norm = norm(output, geometry);
      check_radius(row.output_norm, row.radius);
    } else if (params.mode == AdaptiveMode::LambdaGrid) {
      const GridAdaptiveResult res =
          lambda_grid_adaptive(*problem, samples, params.p, params.delta, params.gamma, options);
      check_selection(res.selection);
      output = res.output;
      row.chosen = res.selection.chosen;
      tau = res.widths.tau;
      for (std::size_t k = 0; k < res.members.size(); ++k) {
        const AdaptiveResult& m = res.members[k];
        candidates.push_back(m.output);
        row.candidate_lambda.push_back(m.lambda);
        row.candidate_radius.push_back(m.radius);
      }
      if (row.chosen > 0) chosen = &res.members[row.chosen - 1];
      if (chosen != nullptr) {
        row.radius = chosen->radius;
        row.lambda = chosen->lambda;
        row.erm_residual = chosen->erm.solver_residual;
        row.erm_flagged = chosen->erm.residual_flagged;
      }
      row.output_norm = norm(output, geometry);
    } else {
      const MultiGeometryResult res = multi_geometry(*problem, samples, params.delta, params.gamma, options);
      check_selection(res.selection);
      check_disjoint({res.candidates[0].first_ids, res.candidates[0].second_ids, res.validation_ids});
      output = res.output;
      row.chosen = res.selection.chosen;
      tau = res.widths.tau;
      for (const AdaptiveResult& m : res.candidates) {
        candidates.push_back(m.output);
        row.candidate_lambda.push_back(m.lambda);
        row.candidate_radius.push_back(m.radius);
      }
      if (row.chosen > 0) {
        const AdaptiveResult& m = res.candidates[row.chosen - 1];
        row.radius = m.radius;
        row.lambda = m.lambda;
        row.erm_residual = m.erm.solver_residual;
        row.erm_flagged = m.erm.residual_flagged;
      }
      row.output_norm = norm(output, geometry);
    }
    row.suboptimality = suboptimality(*problem, output);
    if (!candidates.empty()) {
      for (std::size_t k = 0; k < candidates.size(); ++k) {
        row.candidate_suboptimality.push_back(suboptimality(*problem, candidates[k]));
        row.candidate_tau.push_back(tau[static_cast<Eigen::Index>(k + 1)]);
      }
      row.best = argmin_index(row.candidate_suboptimality);
      row.key_lemma_ok = row.suboptimality <= row.candidate_suboptimality[row.best] +
                                                  (1.0 + params.gamma) * row.candidate_tau[row.best] +
                                                  1e-12;
    }
  });

  std::vector<double> sub;
  std::vector<double> best;
  double within = 0.0;
  double lemma = 0.0;
  AdaptiveSummary& s = out.summary;
  s.best_rate.assign(out.candidate_count, 0.0);
  for (const AdaptiveTrial& row : out.trials) {
    sub.push_back(row.suboptimality);
    s.max_output_norm = std::max(s.max_output_norm, row.output_norm);
    within += row.output_norm <= 33.0 * out.d_star + 1e-9 ? 1.0 : 0.0;
    lemma += row.key_lemma_ok ? 1.0 : 0.0;
    if (!row.candidate_suboptimality.empty()) {
      best.push_back(row.candidate_suboptimality[row.best]);
      s.best_rate[row.best] += 1.0;
    }
  }
  const double count = static_cast<double>(out.trials.size());
  s.median = median(sub);
  s.mean = mean(sub);
  s.q90 = quantile(sub, 0.9);
  s.radius_bound_rate = within / count;
  s.key_lemma_rate = lemma / count;
  for (double& r : s.best_rate) r /= count;
  s.oracle_best_mean = best.empty() ? std::nan("") : mean(best);
  return out;
}

// ---------------------------------------------------------------------------
// strong convexity

StrongConvexResult run_strong_convexity(const StrongConvexParams& params) {
  if (params.trials < 1) throw std::invalid_argument("strongconvex: trials must be >= 1");
  if (params.mu_exps.empty()) throw std::invalid_argument("strongconvex: empty mu grid");
  const auto problem = make_family("strongly_convex_1d", params.family_params);
  const double lipschitz = *problem->lipschitz_l2();
  StrongConvexResult out;
  out.params = params;
  std::vector<double> ns;
  std::vector<double> greedy_medians;
  std::vector<double> reliable_medians;

  for (const std::size_t n : params.n_grid) {
    if (n < 2) throw std::invalid_argument("strongconvex: n must be >= 2");
    const std::uint64_t n_key = derive_key(params.seed, n);
    std::vector<StrongConvexTrial> rows(params.trials);
    parallel_for(params.trials, params.threads, [&](std::size_t t) {
      const auto samples = sample_batch(*problem, 2 * n, derive_key(n_key, t));
      const std::span<const Sample> training(samples.data(), n);
      const std::span<const Sample> validation(samples.data() + n, n);
      std::vector<Vector> points{Vector::Zero(1)};
      Vector norms = Vector::Zero(static_cast<Eigen::Index>(params.mu_exps.size() + 1));
      for (std::size_t k = 0; k < params.mu_exps.size(); ++k) {
        points.push_back(sgd_strongly_convex(*problem, std::exp(params.mu_exps[k]), training).average_iterate);
        norms[static_cast<Eigen::Index>(k + 1)] = std::abs(points.back()[0]);
      }
      const LossMatrix losses = loss_matrix(*problem, validation, points);
      const SelectionOutcome greedy = standard_select(losses);
      const SelectionOutcome reliable =
          reliable_select(losses, widths_theory(losses, lipschitz, norms, params.delta), params.gamma);
      check_selection(reliable);
      StrongConvexTrial& row = rows[t];
      row.n = n;
      row.trial = t;
      row.greedy = greedy.chosen;
      row.reliable = reliable.chosen;
      row.greedy_suboptimality = suboptimality(*problem, points[greedy.chosen]);
      row.reliable_suboptimality = suboptimality(*problem, points[reliable.chosen]);
    });
    std::vector<double> g;
    std::vector<double> r;
    for (const StrongConvexTrial& row : rows) {
      g.push_back(row.greedy_suboptimality);
      r.push_back(row.reliable_suboptimality);
    }
    StrongConvexPoint point{n, median(g), median(r), mean(g), mean(r)};
    out.points.push_back(point);
    out.trials.insert(out.trials.end(), rows.begin(), rows.end());
    ns.push_back(static_cast<double>(n));
    greedy_medians.push_back(point.greedy_median);
    reliable_medians.push_back(point.reliable_median);
  }
  auto fit_or_nan = [&](const std::vector<double>& y) {
    if (ns.size() >= 2 && std::all_of(y.begin(), y.end(), [](double v) { return v > 0.0; })) {
      return fit_loglog(ns, y);
    }
    return LineFit{std::nan(""), std::nan(""), std::nan("")};
  };
  out.greedy_fit = fit_or_nan(greedy_medians);
  out.reliable_fit = fit_or_nan(reliable_medians);
  return out;
}

// ---------------------------------------------------------------------------
// concentration

CoverageRow run_coverage(const std::string& bound, std::uint64_t seed, double delta,
                         std::size_t trials, std::size_t threads) {
  const auto pos = std::find(kCoverageBounds.begin(), kCoverageBounds.end(), bound);
  if (pos == kCoverageBounds.end()) throw std::invalid_argument("unknown bound '" + bound + "'");
  if (trials < 1) throw std::invalid_argument("coverage: trials must be >= 1");
  const std::uint64_t key = derive_key(seed, static_cast<std::uint64_t>(pos - kCoverageBounds.begin()));

  CoverageRow row;
  row.bound = bound;
  row.delta = delta;
  row.trials = trials;
  if (bound == "hoeffding") {
    row.n = 100;
    row.d = 1;
  } else if (bound == "empirical_bennett") {
    row.n = 200;
    row.d = 1;
  } else if (bound == "vec_l2") {
    row.n = 200;
    row.d = 5;
  } else if (bound == "dependent_sum") {
    row.n = 1;
    row.d = 10;
  } else {
    row.n = 200;
    row.d = 10;
  }
  const std::size_t n = row.n;
  const auto d = static_cast<Eigen::Index>(row.d);
  const std::vector<SubGammaTail> tails(row.d, SubGammaTail{1.0, 0.0});
  const double dependent_bound = dependent_sum_bound(tails, delta);
  const double hoeffding = hoeffding_width(1.0, n, delta);

  std::vector<char> violated(trials, 0);
  parallel_for(trials, threads, [&](std::size_t t) {
    CounterRng rng(key, t);
    bool v = false;
    if (bound == "hoeffding") {
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) sum += rng.bernoulli(0.5) ? 1.0 : 0.0;
      v = std::abs(sum / static_cast<double>(n) - 0.5) > hoeffding;
    } else if (bound == "empirical_bennett") {
      std::vector<double> values(n);
      for (double& x : values) x = rng.uniform();
      const double m = mean(values);
      v = std::abs(m - 0.5) > empirical_bennett_width(values, 1.0, delta, Sides::Two);
    } else if (bound == "dependent_sum") {
      const double z = rng.normal();
      v = static_cast<double>(row.d) * std::abs(z) / std::sqrt(2.0) > dependent_bound;
    } else {
      Eigen::MatrixXd V(static_cast<Eigen::Index>(n), d);
      if (bound == "vec_l2") {
        for (Eigen::Index i = 0; i < V.rows(); ++i) {
          double nrm = 0.0;
          while (nrm == 0.0) {
            for (Eigen::Index j = 0; j < d; ++j) V(i, j) = rng.normal();
            nrm = V.row(i).norm();
          }
          V.row(i) /= nrm;
        }
      } else {
        for (Eigen::Index i = 0; i < V.rows(); ++i) {
          for (Eigen::Index j = 0; j < d; ++j) V(i, j) = rng.rademacher();
        }
      }
      const Vector vbar = V.colwise().mean().transpose();
      const Vector ones = Vector::Ones(d);
      if (bound == "vec_l2") {
        v = vbar.norm() > vec_l2_width(V, 1.0, delta);
      } else if (bound == "vec_inf") {
        v = norm(vbar, Norm::Linf) > vec_inf_width(V, ones, delta);
      } else {
        v = norm(vbar, Norm::L1) > vec_l1_width(V, ones, delta);
      }
    }
    violated[t] = v ? 1 : 0;
  });
  row.violations = static_cast<std::size_t>(std::count(violated.begin(), violated.end(), 1));
  row.rate = static_cast<double>(row.violations) / static_cast<double>(trials);
  row.threshold = delta + 3.0 * std::sqrt(delta * (1.0 - delta) / static_cast<double>(trials));
  row.pass = row.rate <= row.threshold;
  return row;
}

std::vector<CoverageRow> run_concentration(const ConcentrationParams& params) {
  std::vector<CoverageRow> rows;
  for (const std::string& bound : params.bounds) {
    std::size_t trials = params.trials;
    if (trials == 0) trials = bound.rfind("vec_", 0) == 0 ? 10000 : 100000;
    rows.push_back(run_coverage(bound, params.seed, params.delta, trials, params.threads));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// select

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    cells.push_back(first == std::string::npos ? std::string() : cell.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != cell.size() || !std::isfinite(v)) {
    throw std::invalid_argument("line " + std::to_string(line) + ": '" + cell + "' is not a finite number");
  }
  return v;
}

bool skip_line(const std::string& line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first == std::string::npos || line[first] == '#';
}

}  // namespace

LossMatrix read_loss_matrix_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) continue;
    header = split_csv_line(line);
    break;
  }
  if (header.size() < 2 || header[0] != "sample_id") {
    throw std::invalid_argument("loss matrix header must be sample_id,model_0,...,model_K");
  }
  for (std::size_t k = 1; k < header.size(); ++k) {
    if (header[k] != "model_" + std::to_string(k - 1)) {
      throw std::invalid_argument("loss matrix column " + std::to_string(k) + " must be model_" +
                                  std::to_string(k - 1));
    }
  }
  const std::size_t cols = header.size() - 1;
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(header.size()) + " fields");
    }
    for (std::size_t k = 1; k < cells.size(); ++k) values.push_back(parse_cell(cells[k], lineno));
    ++rows;
  }
  if (rows == 0) throw std::invalid_argument("loss matrix has no rows");
  LossMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < cols; ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = values[i * cols + k];
    }
  }
  return m;
}

Vector read_tau_csv(std::istream& in) {
  std::vector<double> taus;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) continue;
    const auto cells = split_csv_line(line);
    if (first) {
      first = false;
      if (cells.back() == "tau") continue;
    }
    if (cells.empty() || cells.size() > 2) {
      throw std::invalid_argument("tau file line " + std::to_string(lineno) + ": expected tau or k,tau");
    }
    if (cells.size() == 2 && parse_cell(cells[0], lineno) != static_cast<double>(taus.size())) {
      throw std::invalid_argument("tau file line " + std::to_string(lineno) + ": indices must run 0..K");
    }
    taus.push_back(parse_cell(cells.back(), lineno));
  }
  Vector tau(static_cast<Eigen::Index>(taus.size()));
  for (std::size_t k = 0; k < taus.size(); ++k) tau[static_cast<Eigen::Index>(k)] = taus[k];
  return tau;
}

SelectResult run_select(const LossMatrix& losses, const ConfidenceWidths& widths, double gamma) {
  if (widths.tau.size() != losses.cols()) {
    throw std::invalid_argument("select: " + std::to_string(widths.tau.size()) + " widths for " +
                                std::to_string(losses.cols()) + " models");
  }
  SelectResult out;
  out.widths = widths;
  out.greedy = standard_select(losses);
  out.reliable = reliable_select(losses, widths, gamma);
  check_selection(out.reliable);
  return out;
}

// ---------------------------------------------------------------------------
// config glue

namespace {

std::size_t threads_of(const Config& cfg) { return cfg.count("threads", 0); }

void load_family(const Config& cfg, const std::string& fallback, std::string& family, ParamMap& params) {
  family = cfg.text("family", fallback);
  for (const auto& [key, value] : cfg.section("family")) params[key] = value;
}

LambdaStrategy strategy_of(const Config& cfg) {
  return parse_lambda_strategy(cfg.text("lambda_strategy", "envelope"));
}

}  // namespace

LowerboundParams lowerbound_params(const Config& cfg) {
  LowerboundParams p;
  p.n = cfg.count("n", p.n);
  p.trials = cfg.count("trials", p.trials);
  p.seed = cfg.u64("seed", p.seed);
  p.delta = cfg.number("delta", p.delta);
  p.gamma = cfg.number("gamma", p.gamma);
  p.rate_min_exp = static_cast<int>(cfg.number("rate_min_exp", p.rate_min_exp));
  p.rate_max_exp = static_cast<int>(cfg.number("rate_max_exp", p.rate_max_exp));
  p.threads = threads_of(cfg);
  return p;
}

ScalingParams scaling_params(const Config& cfg) {
  ScalingParams p;
  load_family(cfg, p.family, p.family, p.family_params);
  p.tie_design_n = cfg.flag("tie_design_n", p.tie_design_n);
  p.method = parse_scaling_method(cfg.text("method", "ada_sgd"));
  p.p = parse_norm(cfg.text("p", "l2"));
  p.n_grid = cfg.counts("n_grid", p.n_grid);
  p.trials = cfg.count("trials", p.trials);
  p.seed = cfg.u64("seed", p.seed);
  p.delta = cfg.number("delta", p.delta);
  p.gamma = cfg.number("gamma", p.gamma);
  p.radius = cfg.number("radius", p.radius);
  p.strategy = strategy_of(cfg);
  p.grid_radius = cfg.number("grid_radius", p.grid_radius);
  p.lipschitz_inflation = cfg.flag("lipschitz_inflation", p.lipschitz_inflation);
  p.threads = threads_of(cfg);
  return p;
}

AdaptiveParams adaptive_params(const Config& cfg) {
  AdaptiveParams p;
  load_family(cfg, p.family, p.family, p.family_params);
  p.tie_design_n = cfg.flag("tie_design_n", p.tie_design_n);
  const std::string geometry = cfg.text("p", "l2");
  if (geometry == "all") {
    p.mode = AdaptiveMode::AllGeometries;
  } else {
    p.p = parse_norm(geometry);
    const std::string mode = cfg.text("mode", "two_stage");
    if (mode == "two_stage") {
      p.mode = AdaptiveMode::TwoStage;
    } else if (mode == "lambda_grid") {
      p.mode = AdaptiveMode::LambdaGrid;
    } else {
      throw std::invalid_argument("unknown adaptive mode '" + mode + "'");
    }
  }
  p.n = cfg.count("n", p.n);
  p.trials = cfg.count("trials", p.trials);
  p.seed = cfg.u64("seed", p.seed);
  p.delta = cfg.number("delta", p.delta);
  p.gamma = cfg.number("gamma", p.gamma);
  p.strategy = strategy_of(cfg);
  p.grid_radius = cfg.number("grid_radius", p.grid_radius);
  p.threads = threads_of(cfg);
  return p;
}

StrongConvexParams strong_convexity_params(const Config& cfg) {
  StrongConvexParams p;
  const std::string family = cfg.text("family", "strongly_convex_1d");
  if (family != "strongly_convex_1d") {
    throw std::invalid_argument("strongconvex runs on strongly_convex_1d only");
  }
  for (const auto& [key, value] : cfg.section("family")) p.family_params[key] = value;
  p.n_grid = cfg.counts("n_grid", p.n_grid);
  p.mu_exps = cfg.numbers("mu_exps", p.mu_exps);
  p.trials = cfg.count("trials", p.trials);
  p.seed = cfg.u64("seed", p.seed);
  p.delta = cfg.number("delta", p.delta);
  p.gamma = cfg.number("gamma", p.gamma);
  p.threads = threads_of(cfg);
  return p;
}

ConcentrationParams concentration_params(const Config& cfg) {
  ConcentrationParams p;
  std::string joined;
  for (const auto& b : p.bounds) joined += (joined.empty() ? "" : ",") + b;
  const std::string bounds = cfg.text("bounds", joined);
  p.bounds.clear();
  std::stringstream ss(bounds);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) p.bounds.push_back(item);
  }
  p.seed = cfg.u64("seed", p.seed);
  p.delta = cfg.number("delta", p.delta);
  p.trials = cfg.count("trials", p.trials);
  p.threads = threads_of(cfg);
  return p;
}

// ---------------------------------------------------------------------------
// reports

Report lowerbound_report(const LowerboundResult& r) {
  Report rep;
  rep.experiment = "lowerbound";
  rep.trials.columns = {"trial", "greedy_rate_index", "greedy_suboptimality", "reliable_index",
                        "reliable_suboptimality", "indicator"};
  for (std::size_t t = 0; t < r.trials.size(); ++t) {
    const LowerboundTrial& row = r.trials[t];
    rep.trials.add_row({std::to_string(t), std::to_string(row.greedy),
                        format_double(row.greedy_suboptimality), std::to_string(row.reliable),
                        format_double(row.reliable_suboptimality), flag_text(row.indicator)});
  }
  rep.summary = metric_table();
  rep.summary.add_row(metric_row("threshold", "", r.threshold));
  rep.summary.add_row(metric_row("indicator_rate", "", r.indicator_rate));
  rep.summary.add_row(metric_row("greedy_mean_suboptimality", "", r.greedy_mean));
  rep.summary.add_row(metric_row("reliable_mean_suboptimality", "", r.reliable_mean));
  return rep;
}

Report scaling_report(const ScalingResult& r) {
  Report rep;
  rep.experiment = "scaling";
  rep.trials.columns = {"n", "trial", "suboptimality", "output_norm", "radius", "lambda", "erm_flagged"};
  for (const ScalingTrial& row : r.trials) {
    rep.trials.add_row({std::to_string(row.n), std::to_string(row.trial),
                        format_double(row.suboptimality), format_double(row.output_norm),
                        format_double(row.radius), format_double(row.lambda),
                        flag_text(row.erm_flagged)});
  }
  rep.summary = metric_table();
  rep.summary.add_row(metric_row("d_star", "", r.d_star));
  for (const ScalingPoint& p : r.points) {
    const std::string n = std::to_string(p.n);
    rep.summary.add_row(metric_row("median", n, p.median));
    rep.summary.add_row(metric_row("mean", n, p.mean));
    rep.summary.add_row(metric_row("q10", n, p.q10));
    rep.summary.add_row(metric_row("q90", n, p.q90));
    rep.summary.add_row(metric_row("max_output_norm", n, p.max_output_norm));
  }
  rep.summary.add_row(metric_row("loglog_slope", "", r.fit.slope));
  rep.summary.add_row(metric_row("loglog_slope_stderr", "", r.fit.slope_stderr));
  return rep;
}

Report adaptive_report(const AdaptiveRunResult& r) {
  static const char* const kGeometryNames[] = {"l2", "l1", "linf"};
  Report rep;
  rep.experiment = "adaptive";
  auto name = [&](std::size_t k) {
    return r.params.mode == AdaptiveMode::AllGeometries ? std::string(kGeometryNames[k])
                                                        : "member" + std::to_string(k + 1);
  };
  rep.trials.columns = {"trial", "lambda", "radius", "output_norm", "suboptimality", "erm_residual",
                        "erm_flagged"};
  if (r.candidate_count > 0) {
    rep.trials.columns.push_back("chosen");
    for (const char* field : {"suboptimality_", "tau_", "lambda_", "radius_"}) {
      for (std::size_t k = 0; k < r.candidate_count; ++k) rep.trials.columns.push_back(field + name(k));
    }
    rep.trials.columns.push_back("best");
    rep.trials.columns.push_back("key_lemma_ok");
  }
  for (std::size_t t = 0; t < r.trials.size(); ++t) {
    const AdaptiveTrial& row = r.trials[t];
    std::vector<std::string> cells{std::to_string(t),
                                   format_double(row.lambda),
                                   format_double(row.radius),
                                   format_double(row.output_norm),
                                   format_double(row.suboptimality),
                                   format_double(row.erm_residual),
                                   flag_text(row.erm_flagged)};
    if (r.candidate_count > 0) {
      cells.push_back(std::to_string(row.chosen));
      for (const auto* field : {&row.candidate_suboptimality, &row.candidate_tau,
                                &row.candidate_lambda, &row.candidate_radius}) {
        for (double v : *field) cells.push_back(format_double(v));
      }
      cells.push_back(std::to_string(row.best + 1));
      cells.push_back(flag_text(row.key_lemma_ok));
    }
    rep.trials.add_row(std::move(cells));
  }
  const AdaptiveSummary& s = r.summary;
  rep.summary = metric_table();
  rep.summary.add_row(metric_row("d_star", "", r.d_star));
  rep.summary.add_row(metric_row("median_suboptimality", "", s.median));
  rep.summary.add_row(metric_row("mean_suboptimality", "", s.mean));
  rep.summary.add_row(metric_row("q90_suboptimality", "", s.q90));
  rep.summary.add_row(metric_row("max_output_norm", "", s.max_output_norm));
  rep.summary.add_row(metric_row("radius_bound_rate", "33", s.radius_bound_rate));
  if (r.candidate_count > 0) {
    rep.summary.add_row(metric_row("key_lemma_rate", "", s.key_lemma_rate));
    rep.summary.add_row(metric_row("oracle_best_mean_suboptimality", "", s.oracle_best_mean));
    for (std::size_t k = 0; k < s.best_rate.size(); ++k) {
      rep.summary.add_row(metric_row("best_rate", name(k), s.best_rate[k]));
    }
  }
  return rep;
}

Report strong_convexity_report(const StrongConvexResult& r) {
  Report rep;
  rep.experiment = "strongconvex";
  rep.trials.columns = {"n", "trial", "greedy_index", "greedy_suboptimality", "reliable_index",
                        "reliable_suboptimality"};
  for (const StrongConvexTrial& row : r.trials) {
    rep.trials.add_row({std::to_string(row.n), std::to_string(row.trial), std::to_string(row.greedy),
                        format_double(row.greedy_suboptimality), std::to_string(row.reliable),
                        format_double(row.reliable_suboptimality)});
  }
  rep.summary = metric_table();
  for (const StrongConvexPoint& p : r.points) {
    const std::string n = std::to_string(p.n);
    rep.summary.add_row(metric_row("greedy_median", n, p.greedy_median));
    rep.summary.add_row(metric_row("reliable_median", n, p.reliable_median));
    rep.summary.add_row(metric_row("greedy_mean", n, p.greedy_mean));
    rep.summary.add_row(metric_row("reliable_mean", n, p.reliable_mean));
  }
  rep.summary.add_row(metric_row("greedy_loglog_slope", "", r.greedy_fit.slope));
  rep.summary.add_row(metric_row("greedy_loglog_slope_stderr", "", r.greedy_fit.slope_stderr));
  rep.summary.add_row(metric_row("reliable_loglog_slope", "", r.reliable_fit.slope));
  rep.summary.add_row(metric_row("reliable_loglog_slope_stderr", "", r.reliable_fit.slope_stderr));
  return rep;
}

Report concentration_report(const std::vector<CoverageRow>& rows) {
  Report rep;
  rep.experiment = "concentration";
  rep.trials.columns = {"bound", "n", "d", "delta", "trials", "violations", "violation_rate",
                        "threshold", "pass"};
  rep.summary = metric_table();
  for (const CoverageRow& row : rows) {
    rep.trials.add_row({row.bound, std::to_string(row.n), std::to_string(row.d),
                        format_double(row.delta), std::to_string(row.trials),
                        std::to_string(row.violations), format_double(row.rate),
                        format_double(row.threshold), flag_text(row.pass)});
    rep.summary.add_row(metric_row("violation_rate", row.bound, row.rate));
  }
  return rep;
}

Report select_report(const SelectResult& r) {
  Report rep;
  rep.experiment = "select";
  rep.trials.columns = {"k", "mean_loss", "tau", "in_safe_set", "chosen_flag", "greedy_flag"};
  for (Eigen::Index k = 0; k < r.reliable.mean_losses.size(); ++k) {
    const auto uk = static_cast<std::size_t>(k);
    rep.trials.add_row({std::to_string(k), format_double(r.reliable.mean_losses[k]),
                        format_double(r.reliable.tau[k]), flag_text(r.reliable.in_safe_set(uk)),
                        flag_text(r.reliable.chosen == uk), flag_text(r.greedy.chosen == uk)});
  }
  rep.summary = metric_table();
  rep.summary.add_row({"greedy_chosen", "", std::to_string(r.greedy.chosen)});
  rep.summary.add_row({"reliable_chosen", "", std::to_string(r.reliable.chosen)});
  rep.summary.add_row(metric_row("theta", "", r.reliable.theta));
  rep.summary.add_row({"width_rule", "", std::string(to_string(r.widths.rule))});
  return rep;
}

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  return in;
}

Report finish(Report rep, const Config& cfg) {
  rep.config = cfg.resolved();
  return rep;
}

}  // namespace

Report run_experiment(std::string_view experiment, const Config& cfg) {
  if (experiment == "lowerbound") {
    const auto p = lowerbound_params(cfg);
    cfg.reject_unused();
    return finish(lowerbound_report(run_lowerbound(p)), cfg);
  }
  if (experiment == "scaling") {
    const auto p = scaling_params(cfg);
    cfg.reject_unused();
    return finish(scaling_report(run_scaling(p)), cfg);
  }
  if (experiment == "adaptive") {
    const auto p = adaptive_params(cfg);
    cfg.reject_unused();
    return finish(adaptive_report(run_adaptive(p)), cfg);
  }
  if (experiment == "strongconvex") {
    const auto p = strong_convexity_params(cfg);
    cfg.reject_unused();
    return finish(strong_convexity_report(run_strong_convexity(p)), cfg);
  }
  if (experiment == "concentration") {
    const auto p = concentration_params(cfg);
    cfg.reject_unused();
    return finish(concentration_report(run_concentration(p)), cfg);
  }
  if (experiment == "select") {
    const std::string input = cfg.text("input", "");
    if (input.empty()) throw std::invalid_argument("select: input=<loss matrix csv> is required");
    const double gamma = cfg.number("gamma", 3.0);
    const bool has_m = cfg.has("m_values");
    const bool has_all = cfg.has("m_all");
    const bool has_tau = cfg.has("tau_file");
    if (int(has_m) + int(has_all) + int(has_tau) != 1) {
      throw std::invalid_argument("select: give exactly one of m_values, m_all, tau_file");
    }
    std::vector<double> m_values;
    double m_all = 0.0;
    std::string tau_file;
    if (has_m) m_values = cfg.numbers("m_values", {});
    if (has_all) m_all = cfg.number("m_all", 0.0);
    if (has_tau) tau_file = cfg.text("tau_file", "");
    cfg.reject_unused();

    auto in = open_input(input);
    const LossMatrix losses = read_loss_matrix_csv(in);
    ConfidenceWidths widths;
    if (has_tau) {
      auto tin = open_input(tau_file);
      widths = widths_custom(read_tau_csv(tin));
    } else {
      Vector m = Vector::Constant(losses.cols(), m_all);
      if (has_m) {
        if (m_values.size() != static_cast<std::size_t>(losses.cols())) {
          throw std::invalid_argument("select: m_values needs one value per model");
        }
        for (std::size_t k = 0; k < m_values.size(); ++k) m[static_cast<Eigen::Index>(k)] = m_values[k];
      }
      widths = widths_practical(losses, m);
    }
    return finish(select_report(run_select(losses, widths, gamma)), cfg);
  }
  throw std::invalid_argument("unknown experiment '" + std::string(experiment) + "'");
}

}  // namespace adaptopt
