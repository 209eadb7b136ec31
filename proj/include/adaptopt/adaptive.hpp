#pragma once

#include "adaptopt/optimizers.hpp"
#include "adaptopt/problem.hpp"
#include "adaptopt/selection.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace adaptopt {

/// How the sup over x of the gradient dispersion terms is obtained.
///   Envelope: Delta_j(x) <= (2 l_j)^2 everywhere.
///   GridSup:  maximum over a small deterministic grid of points.
///   Exact1D:  one-dimensional piecewise-linear problems; Delta is piecewise
///             constant, so breakpoints, midpoints and outer points suffice.
enum class LambdaStrategy { Envelope, GridSup, Exact1D };
std::string_view to_string(LambdaStrategy s);
LambdaStrategy parse_lambda_strategy(std::string_view text);

/// L_hat (l2) and l_hat (per-coordinate) estimates.
struct LipschitzEstimates {
  double l2 = 0.0;
  Vector coord;

  /// l_p for geometry p: L_hat for l2, ||l_hat||_inf for l1, ||l_hat||_1 for linf.
  double dual_scale(Norm p) const;
};

/// From the problem's constants. Throws std::invalid_argument when unknown.
LipschitzEstimates lipschitz_from_problem(const StochasticProblem& problem);

/// Sup over x of sqrt(sum_j Delta_j), max_j sqrt(Delta_j) and sum_j sqrt(Delta_j),
/// with Delta_j(x) = (1/n) sum_i (grad_j f_i(x) - grad_j Fbar(x))^2.
struct DispersionSup {
  double l2 = 0.0;
  double max_coord = 0.0;
  double sum_coord = 0.0;
};

DispersionSup dispersion_at(const StochasticProblem& problem, std::span<const Sample> samples,
                            const Vector& x);
/// Grid: 1D uses 21 evenly spaced points on [-r, r]; otherwise 0, +-r 1, +-(r/2) 1 and
/// +-r e_j for the first four coordinates. Points are projected onto the domain.
std::vector<Vector> dispersion_grid(const StochasticProblem& problem, double grid_radius);
DispersionSup dispersion_sup(const StochasticProblem& problem, std::span<const Sample> samples,
                             LambdaStrategy strategy, const LipschitzEstimates& lipschitz,
                             double grid_radius = 2.0);

/// Regularization weight for geometry p from n samples, given the dispersion sup.
double lambda_from_dispersion(Norm p, const DispersionSup& sup, const LipschitzEstimates& lipschitz,
                              int dimension, std::size_t n, double delta);

double compute_lambda(const StochasticProblem& problem, std::span<const Sample> samples, Norm p,
                      double delta, LambdaStrategy strategy = LambdaStrategy::Envelope,
                      const std::optional<LipschitzEstimates>& lipschitz = std::nullopt,
                      double grid_radius = 2.0);

struct AdaptiveOptions {
  LambdaStrategy strategy = LambdaStrategy::Envelope;
  std::optional<LipschitzEstimates> lipschitz;  // defaults to the problem's constants
  double grid_radius = 2.0;
  ErmOptions erm;
};

struct AdaptiveResult {
  Vector output;
  double lambda = 0.0;
  double radius = 0.0;  // 3 ||x_lambda||_p
  ErmSolution erm;
  Norm p = Norm::L2;
  LambdaStrategy strategy = LambdaStrategy::Envelope;
  std::vector<std::uint64_t> first_ids;
  std::vector<std::uint64_t> second_ids;
};

/// Two-stage method with a given lambda: regularized ERM on samples[0, n) gives
/// R = 3 ||x_lambda||_p, then the geometry's optimizer runs with radius R on samples[n, 2n).
/// R = 0 returns the origin. Requires an even number of at least 4 samples.
AdaptiveResult optimal_adaptive_with_lambda(const StochasticProblem& problem,
                                            std::span<const Sample> samples, Norm p,
                                            double lambda, const AdaptiveOptions& options = {});

/// As above with lambda from compute_lambda on the first half.
AdaptiveResult optimal_adaptive(const StochasticProblem& problem, std::span<const Sample> samples,
                                Norm p, double delta, const AdaptiveOptions& options = {});

/// lambda^(0) = 7 sqrt(ln(30/delta)/(n-1)) + 50 ln(30/delta)/(n-1).
double lambda_grid_base(std::size_t n, double delta);
/// K_p = max(1, ceil(ln l_p)).
std::size_t lambda_grid_size(double lipschitz_scale);

struct GridAdaptiveResult {
  std::vector<double> lambdas;          // e^k lambda^(0), k = 1..K
  std::vector<AdaptiveResult> members;  // one per lambda
  SelectionOutcome selection;           // column 0 is the origin, column k member k-1
  ConfidenceWidths widths;
  Vector output;
};

/// Grid search over lambda: samples[0, 2n) feed every member, samples[2n, 3n) validate.
GridAdaptiveResult lambda_grid_adaptive(const StochasticProblem& problem,
                                        std::span<const Sample> samples, Norm p, double delta,
                                        double gamma, const AdaptiveOptions& options = {});

struct MultiGeometryResult {
  std::array<AdaptiveResult, 3> candidates;  // l2, l1, linf
  SelectionOutcome selection;                // column 0 is the origin, column k candidate k-1
  ConfidenceWidths widths;
  Vector output;
  std::vector<std::uint64_t> validation_ids;
};

inline constexpr std::array<Norm, 3> kGeometries{Norm::L2, Norm::L1, Norm::Linf};

/// Runs the two-stage method in all three geometries on samples[0, 2n) and selects among
/// them on samples[2n, 3n) with tau_k = sqrt(2 s_k^2 c / n) + (14/3) c/(n-1) q_k,
/// c = ln(12/delta), q_k = min(L ||x_k||_2, ||l||_inf ||x_k||_1, ||l||_1 ||x_k||_inf).
MultiGeometryResult multi_geometry(const StochasticProblem& problem,
                                   std::span<const Sample> samples, double delta, double gamma = 3.0,
                                   const AdaptiveOptions& options = {});

/// Validation loss matrix for candidate points (column 0 first).
LossMatrix loss_matrix(const StochasticProblem& problem, std::span<const Sample> samples,
                       std::span<const Vector> points);

}  // namespace adaptopt
