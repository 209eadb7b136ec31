#pragma once

#include "adaptopt/problem.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace adaptopt {

struct OptimizerTrace {
  std::vector<Vector> iterates;       // u_1 .. u_n
  std::vector<double> grad_norms;     // ||g_t|| in the optimizer's dual norm
  std::vector<Vector> accumulators;   // accumulator state after step t
};

struct OptimizerRun {
  double radius = 0.0;
  Norm norm = Norm::L2;
  std::size_t iterate_count = 0;
  Vector average_iterate;
  std::optional<OptimizerTrace> trace;
};

/// Adaptive SGD on the l2 ball of radius R intersected with the problem domain:
///   u_{t+1} = proj(u_t - R g_t / sqrt(sum_{j<=t} ||g_j||_2^2)),  u_1 = 0.
/// Returns the uniform average of u_1..u_n. Steps with a zero accumulator are skipped.
OptimizerRun ada_sgd(const StochasticProblem& problem, double radius,
                     std::span<const Sample> samples, bool record_trace = false);

/// Entropic mirror descent on the l1 ball of radius R. Unconstrained domains use
/// x = R (w+ - w-) with w on the 2d-simplex started uniform (x = 0); nonnegative
/// domains use x = R w on the first d coordinates of a (d+1)-simplex with a slack
/// coordinate. Step: w <- w exp(-beta_t g~), beta_t = sqrt(2 ln N / sum ||g_l||_inf^2).
OptimizerRun ada_emd(const StochasticProblem& problem, double radius,
                     std::span<const Sample> samples, bool record_trace = false);

/// Diagonal AdaGrad on the linf ball of radius R intersected with the domain:
///   G_j += g_j^2,  u_j <- clip(u_j - R g_j / sqrt(G_j), [-R, R]),  u_1 = 0.
OptimizerRun ada_grad(const StochasticProblem& problem, double radius,
                      std::span<const Sample> samples, bool record_trace = false);

/// Projected SGD with step 1/(mu t) onto the problem domain and weights t in the
/// average. Generates candidates for a strong-convexity parameter sweep.
OptimizerRun sgd_strongly_convex(const StochasticProblem& problem, double mu,
                                 std::span<const Sample> samples);

/// The optimizer paired with each geometry: l2 -> AdaSGD, l1 -> AdaEMD, linf -> AdaGrad.
OptimizerRun run_geometry_optimizer(Norm p, const StochasticProblem& problem, double radius,
                                    std::span<const Sample> samples);
std::string_view geometry_optimizer_name(Norm p);

/// Writes a trace as CSV: step, x_1..x_d, grad_norm.
void write_trace_csv(std::ostream& out, const OptimizerTrace& trace);

// ---------------------------------------------------------------------------

enum class ErmSolver { Auto, Exact1D, Generic };

struct ErmOptions {
  ErmSolver solver = ErmSolver::Auto;
  std::size_t max_iterations = 20000;
  std::size_t stage_length = 200;
  /// Absolute tolerance on the objective gap. Default 1e-6 (1 + |objective at 0|).
  std::optional<double> tolerance;
};

struct ErmSolution {
  double lambda = 0.0;
  Norm norm = Norm::L2;
  Vector minimizer;
  double objective_value = 0.0;
  /// Bound on objective_value - min. Zero for the exact solver.
  double solver_residual = 0.0;
  double tolerance = 0.0;
  bool residual_flagged = false;
  ErmSolver solver = ErmSolver::Generic;
};

/// Minimizes (1/n) sum f_i(x) + lambda ||x||_p over the problem domain.
///
/// Auto picks the exact breakpoint scan for one-dimensional piecewise-linear
/// problems and the generic solver otherwise. The generic solver returns 0 when
/// the origin satisfies the optimality condition, and otherwise runs restarted
/// projected subgradient descent whose per-stage radius halves or doubles with
/// the distance travelled. A residual above tolerance sets residual_flagged.
/// Throws std::invalid_argument for lambda <= 0 or empty samples, and
/// std::domain_error if the exact solver finds the objective unbounded below.
ErmSolution regularized_erm(const StochasticProblem& problem, std::span<const Sample> samples,
                            double lambda, Norm p, const ErmOptions& options = {});

}  // namespace adaptopt
