#include "adaptopt/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adaptopt {

std::string_view to_string(LambdaStrategy s) {
  switch (s) {
    case LambdaStrategy::Envelope: return "envelope";
    case LambdaStrategy::GridSup: return "grid_sup";
    case LambdaStrategy::Exact1D: return "exact_1d";
  }
  return "?";
}

LambdaStrategy parse_lambda_strategy(std::string_view text) {
  if (text == "envelope" || text == "lipschitz_envelope") return LambdaStrategy::Envelope;
  if (text == "grid_sup" || text == "grid") return LambdaStrategy::GridSup;
  if (text == "exact_1d") return LambdaStrategy::Exact1D;
  throw std::invalid_argument("unknown lambda strategy '" + std::string(text) + "'");
}

double LipschitzEstimates::dual_scale(Norm p) const {
  switch (p) {
    case Norm::L2: return l2;
    case Norm::L1: return norm(coord, Norm::Linf);
    case Norm::Linf: return norm(coord, Norm::L1);
  }
  return 0.0;
}

LipschitzEstimates lipschitz_from_problem(const StochasticProblem& problem) {
  const auto l2 = problem.lipschitz_l2();
  const auto coord = problem.lipschitz_coord();
  if (!l2 || !coord) {
    throw std::invalid_argument("family '" + problem.name() + "' has no Lipschitz estimates");
  }
  return {*l2, *coord};
}

namespace {

void check_lipschitz(const LipschitzEstimates& lip, int d) {
  if (!(lip.l2 >= 0.0) || lip.coord.size() != d || (d > 0 && lip.coord.minCoeff() < 0.0)) {
    throw std::invalid_argument("Lipschitz estimates must be nonnegative with one entry per coordinate");
  }
}

LipschitzEstimates resolve_lipschitz(const StochasticProblem& problem,
                                     const std::optional<LipschitzEstimates>& given) {
  LipschitzEstimates lip = given ? *given : lipschitz_from_problem(problem);
  check_lipschitz(lip, problem.dimension());
  return lip;
}

void absorb(DispersionSup& acc, const DispersionSup& at) {
  acc.l2 = std::max(acc.l2, at.l2);
  acc.max_coord = std::max(acc.max_coord, at.max_coord);
  acc.sum_coord = std::max(acc.sum_coord, at.sum_coord);
}

std::vector<Vector> exact_1d_points(const StochasticProblem& problem,
                                    std::span<const Sample> samples) {
  if (problem.dimension() != 1) {
    throw std::invalid_argument("exact_1d strategy needs a one-dimensional problem");
  }
  std::vector<double> kinks;
  for (const Sample& s : samples) {
    const auto b = problem.breakpoints(s);
    if (!b) throw std::invalid_argument("exact_1d strategy needs a piecewise-linear problem");
    kinks.insert(kinks.end(), b->begin(), b->end());
  }
  std::sort(kinks.begin(), kinks.end());
  kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());

  std::vector<double> xs{0.0};
  if (!kinks.empty()) {
    xs.push_back(kinks.front() - 1.0);
    xs.push_back(kinks.back() + 1.0);
  }
  for (std::size_t i = 0; i < kinks.size(); ++i) {
    xs.push_back(kinks[i]);
    if (i + 1 < kinks.size()) xs.push_back(0.5 * (kinks[i] + kinks[i + 1]));
  }
  const Domain domain = problem.domain();
  std::vector<Vector> points;
  points.reserve(xs.size());
  for (double v : xs) {
    Vector x = Vector::Constant(1, v);
    domain.project(x);
    points.push_back(std::move(x));
  }
  return points;
}

}  // namespace

DispersionSup dispersion_at(const StochasticProblem& problem, std::span<const Sample> samples,
                            const Vector& x) {
  const int d = problem.dimension();
  Vector mean = Vector::Zero(d);
  Vector m2 = Vector::Zero(d);
  Vector g(d);
  double count = 0.0;
  for (const Sample& s : samples) {
    problem.subgradient(x, s, g);
    count += 1.0;
    const Vector delta = g - mean;
    mean += delta / count;
    m2.array() += delta.array() * (g - mean).array();
  }
  DispersionSup out;
  if (count == 0.0) return out;
  const Vector var = (m2 / count).cwiseMax(0.0);
  out.l2 = std::sqrt(var.sum());
  out.max_coord = std::sqrt(var.maxCoeff());
  out.sum_coord = var.cwiseSqrt().sum();
  return out;
}

std::vector<Vector> dispersion_grid(const StochasticProblem& problem, double grid_radius) {
  const int d = problem.dimension();
  const Domain domain = problem.domain();
  std::vector<Vector> points;
  if (d == 1) {
    for (int i = 0; i <= 20; ++i) {
      points.push_back(Vector::Constant(1, -grid_radius + grid_radius * i / 10.0));
    }
  } else {
    points.push_back(Vector::Zero(d));
    for (double scale : {grid_radius, 0.5 * grid_radius}) {
      points.push_back(Vector::Constant(d, scale));
      points.push_back(Vector::Constant(d, -scale));
    }
    for (int j = 0; j < std::min(d, 4); ++j) {
      points.push_back(grid_radius * Vector::Unit(d, j));
      points.push_back(-grid_radius * Vector::Unit(d, j));
    }
  }
  for (Vector& x : points) domain.project(x);
  return points;
}

DispersionSup dispersion_sup(const StochasticProblem& problem, std::span<const Sample> samples,
                             LambdaStrategy strategy, const LipschitzEstimates& lipschitz,
                             double grid_radius) {
  DispersionSup sup;
  switch (strategy) {
    case LambdaStrategy::Envelope:
      check_lipschitz(lipschitz, problem.dimension());
      sup.l2 = std::min(2.0 * lipschitz.l2, 2.0 * lipschitz.coord.norm());
      sup.max_coord = 2.0 * norm(lipschitz.coord, Norm::Linf);
      sup.sum_coord = 2.0 * norm(lipschitz.coord, Norm::L1);
      return sup;
    case LambdaStrategy::GridSup:
      for (const Vector& x : dispersion_grid(problem, grid_radius)) {
        absorb(sup, dispersion_at(problem, samples, x));
      }
      return sup;
    case LambdaStrategy::Exact1D:
      for (const Vector& x : exact_1d_points(problem, samples)) {
        absorb(sup, dispersion_at(problem, samples, x));
      }
      return sup;
  }
  return sup;
}

double lambda_from_dispersion(Norm p, const DispersionSup& sup, const LipschitzEstimates& lipschitz,
                              int dimension, std::size_t n, double delta) {
  if (n < 2) throw std::invalid_argument("lambda needs n >= 2");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  const double dn = static_cast<double>(n);
  switch (p) {
    case Norm::L2: {
      const double c = std::log(6.0 / delta);
      return 4.0 * std::sqrt(c) / std::sqrt(dn) * sup.l2 + 20.0 * lipschitz.l2 * c / (dn - 1.0);
    }
    case Norm::L1: {
      const double c = std::log(4.0 * dimension / delta);
      return 4.0 * std::sqrt(2.0 * c) / std::sqrt(dn - 1.0) * sup.max_coord +
             28.0 * lipschitz.dual_scale(Norm::L1) * c / (3.0 * (dn - 1.0));
    }
    case Norm::Linf: {
      const double c = std::log(30.0 / delta);
      return 9.0 * std::sqrt(2.0 * c) / (2.0 * std::sqrt(dn - 1.0)) * sup.sum_coord +
             50.0 * lipschitz.dual_scale(Norm::Linf) * c / (dn - 1.0);
    }
  }
  return 0.0;
}

double compute_lambda(const StochasticProblem& problem, std::span<const Sample> samples, Norm p,
                      double delta, LambdaStrategy strategy,
                      const std::optional<LipschitzEstimates>& lipschitz, double grid_radius) {
  const LipschitzEstimates lip = resolve_lipschitz(problem, lipschitz);
  const DispersionSup sup = dispersion_sup(problem, samples, strategy, lip, grid_radius);
  return lambda_from_dispersion(p, sup, lip, problem.dimension(), samples.size(), delta);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::uint64_t> ids_of(std::span<const Sample> samples) {
  std::vector<std::uint64_t> ids;
  ids.reserve(samples.size());
  for (const Sample& s : samples) ids.push_back(s.id);
  return ids;
}

std::size_t split_count(std::span<const Sample> samples, std::size_t parts, const char* who) {
  if (samples.size() % parts != 0 || samples.size() / parts < 2) {
    throw std::invalid_argument(std::string(who) + ": need " + std::to_string(parts) +
                                " equal parts of at least 2 samples");
  }
  return samples.size() / parts;
}

}  // namespace

AdaptiveResult optimal_adaptive_with_lambda(const StochasticProblem& problem,
                                            std::span<const Sample> samples, Norm p,
                                            double lambda, const AdaptiveOptions& options) {
  const std::size_t n = split_count(samples, 2, "optimal_adaptive");
  const auto first = samples.first(n);
  const auto second = samples.subspan(n, n);

  AdaptiveResult res;
  res.p = p;
  res.lambda = lambda;
  res.strategy = options.strategy;
  res.first_ids = ids_of(first);
  res.second_ids = ids_of(second);
  res.erm = regularized_erm(problem, first, lambda, p, options.erm);
  res.radius = 3.0 * norm(res.erm.minimizer, p);
  if (res.radius > 0.0) {
    res.output = run_geometry_optimizer(p, problem, res.radius, second).average_iterate;
  } else {
    res.output = Vector::Zero(problem.dimension());
  }
  return res;
}

AdaptiveResult optimal_adaptive(const StochasticProblem& problem, std::span<const Sample> samples,
                                Norm p, double delta, const AdaptiveOptions& options) {
  const std::size_t n = split_count(samples, 2, "optimal_adaptive");
  const double lambda = compute_lambda(problem, samples.first(n), p, delta, options.strategy,
                                       options.lipschitz, options.grid_radius);
  return optimal_adaptive_with_lambda(problem, samples, p, lambda, options);
}

double lambda_grid_base(std::size_t n, double delta) {
  if (n < 2) throw std::invalid_argument("lambda grid needs n >= 2");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  const double c = std::log(30.0 / delta);
  const double m = static_cast<double>(n) - 1.0;
  return 7.0 * std::sqrt(c / m) + 50.0 * c / m;
}

std::size_t lambda_grid_size(double lipschitz_scale) {
  if (!(lipschitz_scale > 0.0)) return 1;
  // The small offset keeps exact powers of e from rounding up a step.
  const double k = std::ceil(std::log(lipschitz_scale) - 1e-9);
  return k < 1.0 ? 1 : static_cast<std::size_t>(k);
}

LossMatrix loss_matrix(const StochasticProblem& problem, std::span<const Sample> samples,
                       std::span<const Vector> points) {
  LossMatrix m(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(points.size()));
  for (std::size_t k = 0; k < points.size(); ++k) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          problem.loss(points[k], samples[i]);
    }
  }
  return m;
}

GridAdaptiveResult lambda_grid_adaptive(const StochasticProblem& problem,
                                        std::span<const Sample> samples, Norm p, double delta,
                                        double gamma, const AdaptiveOptions& options) {
  const std::size_t n = split_count(samples, 3, "lambda_grid_adaptive");
  const auto training = samples.first(2 * n);
  const auto validation = samples.subspan(2 * n, n);
  const LipschitzEstimates lip = resolve_lipschitz(problem, options.lipschitz);
  const double scale = lip.dual_scale(p);

  GridAdaptiveResult out;
  const double base = lambda_grid_base(n, delta);
  const std::size_t k_count = lambda_grid_size(scale);
  std::vector<Vector> points{Vector::Zero(problem.dimension())};
  Vector envelopes = Vector::Zero(static_cast<Eigen::Index>(k_count + 1));
  for (std::size_t k = 1; k <= k_count; ++k) {
    const double lambda = std::exp(static_cast<double>(k)) * base;
    out.lambdas.push_back(lambda);
    out.members.push_back(optimal_adaptive_with_lambda(problem, training, p, lambda, options));
    points.push_back(out.members.back().output);
    envelopes[static_cast<Eigen::Index>(k)] = scale * norm(points.back(), p);
  }
  const LossMatrix losses = loss_matrix(problem, validation, points);
  out.widths = widths_theory(losses, envelopes, delta);
  out.selection = reliable_select(losses, out.widths, gamma);
  out.output = points[out.selection.chosen];
  return out;
}

MultiGeometryResult multi_geometry(const StochasticProblem& problem,
                                   std::span<const Sample> samples, double delta, double gamma,
                                   const AdaptiveOptions& options) {
  const std::size_t n = split_count(samples, 3, "multi_geometry");
  const auto training = samples.first(2 * n);
  const auto validation = samples.subspan(2 * n, n);
  const LipschitzEstimates lip = resolve_lipschitz(problem, options.lipschitz);
  const int d = problem.dimension();
  const DispersionSup sup =
      dispersion_sup(problem, training.first(n), options.strategy, lip, options.grid_radius);

  MultiGeometryResult out;
  out.validation_ids = ids_of(validation);
  std::vector<Vector> points{Vector::Zero(d)};
  for (std::size_t k = 0; k < kGeometries.size(); ++k) {
    const Norm p = kGeometries[k];
    const double lambda = lambda_from_dispersion(p, sup, lip, d, n, delta);
    out.candidates[k] = optimal_adaptive_with_lambda(problem, training, p, lambda, options);
    points.push_back(out.candidates[k].output);
  }

  const LossMatrix losses = loss_matrix(problem, validation, points);
  const Vector var = difference_variances(losses);
  const double dn = static_cast<double>(n);
  const double c = std::log(12.0 / delta);
  Vector tau = Vector::Zero(4);
  for (Eigen::Index k = 1; k < 4; ++k) {
    const Vector& x = points[static_cast<std::size_t>(k)];
    const double q = std::min({lip.l2 * norm(x, Norm::L2),
                               norm(lip.coord, Norm::Linf) * norm(x, Norm::L1),
                               norm(lip.coord, Norm::L1) * norm(x, Norm::Linf)});
    tau[k] = std::sqrt(2.0 * var[k] * c / dn) + (14.0 / 3.0) * c / (dn - 1.0) * q;
  }
  out.widths = widths_custom(tau);
  out.widths.rule = WidthRule::Theory;
  out.widths.delta = delta;
  out.selection = reliable_select(losses, out.widths, gamma);
  out.output = points[out.selection.chosen];
  return out;
}

}  // namespace adaptopt
