#include "adaptopt/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace adaptopt {

namespace {

void require_radius(double radius, const char* who) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument(std::string(who) + ": radius must be positive and finite");
  }
}

void record(std::optional<OptimizerTrace>& trace, const Vector& u, double grad_norm,
            const Vector& accumulator) {
  if (!trace) return;
  trace->iterates.push_back(u);
  trace->grad_norms.push_back(grad_norm);
  trace->accumulators.push_back(accumulator);
}

OptimizerRun finish(double radius, Norm p, std::span<const Sample> samples, Vector sum,
                    std::optional<OptimizerTrace> trace) {
  OptimizerRun run;
  run.radius = radius;
  run.norm = p;
  run.iterate_count = samples.size();
  if (!samples.empty()) sum /= static_cast<double>(samples.size());
  run.average_iterate = std::move(sum);
  run.trace = std::move(trace);
  return run;
}

}  // namespace

OptimizerRun ada_sgd(const StochasticProblem& problem, double radius,
                     std::span<const Sample> samples, bool record_trace) {
  require_radius(radius, "ada_sgd");
  const int d = problem.dimension();
  const Domain domain = problem.domain();
  std::optional<OptimizerTrace> trace;
  if (record_trace) trace.emplace();

  Vector u = Vector::Zero(d);
  Vector sum = Vector::Zero(d);
  Vector g(d);
  Vector acc = Vector::Zero(1);
  for (const Sample& s : samples) {
    sum += u;
    problem.subgradient(u, s, g);
    const double gn2 = g.squaredNorm();
    acc[0] += gn2;
    record(trace, u, std::sqrt(gn2), acc);
    if (acc[0] > 0.0) {
      u -= (radius / std::sqrt(acc[0])) * g;
      project_feasible(u, domain, Norm::L2, radius);
    }
  }
  return finish(radius, Norm::L2, samples, std::move(sum), std::move(trace));
}

OptimizerRun ada_grad(const StochasticProblem& problem, double radius,
                      std::span<const Sample> samples, bool record_trace) {
  require_radius(radius, "ada_grad");
  const int d = problem.dimension();
  const Domain domain = problem.domain();
  std::optional<OptimizerTrace> trace;
  if (record_trace) trace.emplace();

  Vector u = Vector::Zero(d);
  Vector sum = Vector::Zero(d);
  Vector g(d);
  Vector acc = Vector::Zero(d);
  for (const Sample& s : samples) {
    sum += u;
    problem.subgradient(u, s, g);
    acc += g.cwiseAbs2();
    record(trace, u, norm(g, Norm::L1), acc);
    for (int j = 0; j < d; ++j) {
      if (acc[j] > 0.0) u[j] -= radius * g[j] / std::sqrt(acc[j]);
    }
    project_feasible(u, domain, Norm::Linf, radius);
  }
  return finish(radius, Norm::Linf, samples, std::move(sum), std::move(trace));
}

OptimizerRun ada_emd(const StochasticProblem& problem, double radius,
                     std::span<const Sample> samples, bool record_trace) {
  require_radius(radius, "ada_emd");
  const int d = problem.dimension();
  const Domain domain = problem.domain();
  double mass = radius;
  bool slack = false;
  switch (domain.kind) {
    case Domain::Kind::Unconstrained: break;
    case Domain::Kind::NonNegative: slack = true; break;
    case Domain::Kind::Ball:
      if (domain.norm != Norm::L1 && d != 1) {
        throw std::invalid_argument("ada_emd: only l1-ball domains are supported in d > 1");
      }
      mass = std::min(radius, domain.radius);
      break;
  }
  std::optional<OptimizerTrace> trace;
  if (record_trace) trace.emplace();

  // Log-weights on the simplex. Unconstrained: [w+ ; w-]. Nonnegative: [w ; slack].
  const int coords = slack ? d + 1 : 2 * d;
  const double log_n = std::log(static_cast<double>(coords));
  Vector logw = Vector::Constant(coords, -log_n);
  Vector w = Vector::Constant(coords, 1.0 / coords);

  auto recompose = [&](Vector& u) {
    if (slack) {
      u = mass * w.head(d);
    } else {
      u = mass * (w.head(d) - w.tail(d));
    }
  };

  Vector u(d);
  recompose(u);
  Vector sum = Vector::Zero(d);
  Vector g(d);
  Vector acc = Vector::Zero(1);
  for (const Sample& s : samples) {
    sum += u;
    problem.subgradient(u, s, g);
    const double ginf = norm(g, Norm::Linf);
    acc[0] += ginf * ginf;
    record(trace, u, ginf, acc);
    if (acc[0] > 0.0) {
      const double beta = std::sqrt(2.0 * log_n / acc[0]);
      logw.head(d) -= beta * g;
      if (!slack) logw.tail(d) += beta * g;
      const double top = logw.maxCoeff();
      w = (logw.array() - top).exp();
      const double total = w.sum();
      w /= total;
      logw.array() -= top + std::log(total);
      recompose(u);
    }
  }
  return finish(radius, Norm::L1, samples, std::move(sum), std::move(trace));
}

OptimizerRun sgd_strongly_convex(const StochasticProblem& problem, double mu,
                                 std::span<const Sample> samples) {
  if (!(mu > 0.0)) throw std::invalid_argument("sgd_strongly_convex: mu must be positive");
  const int d = problem.dimension();
  const Domain domain = problem.domain();
  Vector u = Vector::Zero(d);
  Vector sum = Vector::Zero(d);
  Vector g(d);
  double weight_total = 0.0;
  double t = 0.0;
  for (const Sample& s : samples) {
    t += 1.0;
    sum += t * u;
    weight_total += t;
    problem.subgradient(u, s, g);
    u -= g / (mu * t);
    domain.project(u);
  }
  OptimizerRun run;
  run.radius = std::numeric_limits<double>::infinity();
  run.iterate_count = samples.size();
  run.average_iterate = weight_total > 0.0 ? Vector(sum / weight_total) : sum;
  return run;
}

OptimizerRun run_geometry_optimizer(Norm p, const StochasticProblem& problem, double radius,
                                    std::span<const Sample> samples) {
  switch (p) {
    case Norm::L2: return ada_sgd(problem, radius, samples);
    case Norm::L1: return ada_emd(problem, radius, samples);
    case Norm::Linf: return ada_grad(problem, radius, samples);
  }
  throw std::invalid_argument("unknown geometry");
}

std::string_view geometry_optimizer_name(Norm p) {
  switch (p) {
    case Norm::L2: return "ada_sgd";
    case Norm::L1: return "ada_emd";
    case Norm::Linf: return "ada_grad";
  }
  return "?";
}

void write_trace_csv(std::ostream& out, const OptimizerTrace& trace) {
  const std::size_t d = trace.iterates.empty() ? 0 : static_cast<std::size_t>(trace.iterates[0].size());
  out << "step";
  for (std::size_t j = 0; j < d; ++j) out << ",x" << j + 1;
  out << ",grad_norm\n";
  char buf[32];
  for (std::size_t t = 0; t < trace.iterates.size(); ++t) {
    out << t + 1;
    for (Eigen::Index j = 0; j < trace.iterates[t].size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", trace.iterates[t][j]);
      out << ',' << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", trace.grad_norms[t]);
    out << ',' << buf << '\n';
  }
}

// ---------------------------------------------------------------------------
// Regularized ERM

namespace {

struct Objective {
  const EmpiricalRisk& risk;
  double lambda;
  Norm p;

  double value(const Vector& x) const { return risk.value(x) + lambda * norm(x, p); }
};

bool exact_1d_applicable(const StochasticProblem& problem, std::span<const Sample> samples) {
  if (problem.dimension() != 1) return false;
  for (const Sample& s : samples) {
    if (!problem.breakpoints(s)) return false;
  }
  return true;
}

ErmSolution solve_exact_1d(const StochasticProblem& problem, std::span<const Sample> samples,
                           const Objective& objective) {
  const Domain domain = problem.domain();
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  if (domain.kind == Domain::Kind::Ball) {
    lo = -domain.radius;
    hi = domain.radius;
  } else if (domain.kind == Domain::Kind::NonNegative) {
    lo = 0.0;
  }

  std::vector<double> candidates{0.0};
  for (const Sample& s : samples) {
    const auto kinks = problem.breakpoints(s);
    for (double b : *kinks) candidates.push_back(std::clamp(b, lo, hi));
  }
  if (std::isfinite(lo)) candidates.push_back(lo);
  if (std::isfinite(hi)) candidates.push_back(hi);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  Vector x(1);
  auto phi = [&](double v) {
    x[0] = v;
    return objective.value(x);
  };
  // Beyond the outermost kink the objective is affine; a negative outward slope means
  // no minimizer exists.
  const double left = candidates.front();
  const double right = candidates.back();
  const double step = 1.0 + std::abs(left) + std::abs(right);
  if (!std::isfinite(hi) && phi(right + step) < phi(right)) {
    throw std::domain_error("regularized_erm: objective is unbounded below as x -> +inf");
  }
  if (!std::isfinite(lo) && phi(left - step) < phi(left)) {
    throw std::domain_error("regularized_erm: objective is unbounded below as x -> -inf");
  }

  // Ties within rounding go to the smallest |x|, then the smaller x.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](double a, double b) { return std::abs(a) < std::abs(b); });
  std::vector<double> values(candidates.size());
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    values[i] = phi(candidates[i]);
    best_value = std::min(best_value, values[i]);
  }
  const double slack = 1e-12 * (1.0 + std::abs(best_value));
  std::size_t chosen = 0;
  while (values[chosen] > best_value + slack) ++chosen;

  ErmSolution sol;
  sol.minimizer = Vector::Constant(1, candidates[chosen]);
  sol.objective_value = values[chosen];
  sol.solver_residual = 0.0;
  sol.solver = ErmSolver::Exact1D;
  return sol;
}

ErmSolution solve_generic(const StochasticProblem& problem, const Objective& objective,
                          const ErmOptions& options, double tolerance) {
  const int d = problem.dimension();
  const Domain domain = problem.domain();
  const Norm p = objective.p;

  ErmSolution sol;
  sol.solver = ErmSolver::Generic;

  Vector x = Vector::Zero(d);
  Vector g(d);
  Vector reg(d);
  objective.risk.subgradient(x, g);
  const double value0 = objective.value(x);
  if (dual_norm(g, p) <= objective.lambda) {
    sol.minimizer = x;
    sol.objective_value = value0;
    sol.solver_residual = 0.0;
    return sol;
  }

  Vector best = x;
  double best_value = value0;
  double r = 1.0;
  double residual = std::numeric_limits<double>::infinity();
  const std::size_t stage_length = std::max<std::size_t>(options.stage_length, 1);
  std::size_t used = 0;
  while (used < options.max_iterations) {
    const Vector center = best;
    x = center;
    double gmax = 0.0;
    double alpha_sum = 0.0;
    double alpha_g2_sum = 0.0;
    const std::size_t m = std::min(stage_length, options.max_iterations - used);
    for (std::size_t k = 1; k <= m; ++k) {
      const double value = objective.value(x);
      if (value < best_value) {
        best_value = value;
        best = x;
      }
      objective.risk.subgradient(x, g);
      norm_subgradient(x, p, reg);
      g += objective.lambda * reg;
      const double gn = g.norm();
      if (gn == 0.0) {
        // Zero subgradient: x is optimal.
        alpha_sum = std::numeric_limits<double>::infinity();
        break;
      }
      gmax = std::max(gmax, gn);
      const double alpha = r / (gmax * std::sqrt(static_cast<double>(k)));
      alpha_sum += alpha;
      alpha_g2_sum += alpha * alpha * gn * gn;
      x -= alpha * g;
      domain.project(x);
    }
    used += m;
    const double moved = (best - center).norm();
    const bool interior = moved < 0.75 * r;
    const double certificate =
        std::isinf(alpha_sum) ? 0.0 : (r * r + alpha_g2_sum) / (2.0 * alpha_sum);
    if (interior) residual = certificate;
    if (std::isinf(alpha_sum)) break;
    if (interior && residual <= tolerance) break;
    if (moved <= 0.25 * r) {
      r *= 0.5;
    } else if (!interior) {
      r *= 2.0;
    }
  }
  sol.minimizer = best;
  sol.objective_value = best_value;
  sol.solver_residual = residual;
  return sol;
}

}  // namespace

ErmSolution regularized_erm(const StochasticProblem& problem, std::span<const Sample> samples,
                            double lambda, Norm p, const ErmOptions& options) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("regularized_erm: lambda must be positive and finite");
  }
  if (samples.empty()) throw std::invalid_argument("regularized_erm: no samples");

  const auto risk = problem.empirical_risk(samples);
  const Objective objective{*risk, lambda, p};
  const double value0 = objective.value(Vector::Zero(problem.dimension()));
  const double tolerance = options.tolerance.value_or(1e-6 * (1.0 + std::abs(value0)));

  ErmSolver solver = options.solver;
  if (solver == ErmSolver::Auto) {
    solver = exact_1d_applicable(problem, samples) ? ErmSolver::Exact1D : ErmSolver::Generic;
  } else if (solver == ErmSolver::Exact1D && !exact_1d_applicable(problem, samples)) {
    throw std::invalid_argument(
        "regularized_erm: exact solver needs a one-dimensional piecewise-linear problem");
  }

  ErmSolution sol = solver == ErmSolver::Exact1D
                        ? solve_exact_1d(problem, samples, objective)
                        : solve_generic(problem, objective, options, tolerance);
  sol.lambda = lambda;
  sol.norm = p;
  sol.tolerance = tolerance;
  sol.residual_flagged = !(sol.solver_residual <= tolerance);
  return sol;
}

}  // namespace adaptopt
