#pragma once

#include "adaptopt/norms.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace adaptopt {

/// One draw S from a problem's sample law. `id` is the counter index the draw
/// was generated from; the remaining fields are family-specific payload.
struct Sample {
  std::uint64_t id = 0;
  int label = 0;
  double value = 0.0;
  Vector features;
};

/// Feasible set X of a problem.
struct Domain {
  enum class Kind { Unconstrained, Ball, NonNegative };

  Kind kind = Kind::Unconstrained;
  Norm norm = Norm::L2;  // Ball only
  double radius = 0.0;   // Ball only

  static Domain unconstrained() { return {}; }
  static Domain ball(Norm p, double r) { return {Kind::Ball, p, r}; }
  static Domain nonnegative() { return {Kind::NonNegative, Norm::L2, 0.0}; }

  /// Euclidean projection onto the domain, in place.
  void project(Vector& x) const;
  bool contains(const Vector& x, double tol = 1e-12) const;
};

/// Projects onto {x in domain : ||x||_p <= radius}. Supported when the domain is
/// unconstrained, nonnegative (p = l2 or linf), a ball in the same norm, or d = 1.
/// Throws std::invalid_argument for other intersections.
void project_feasible(Vector& x, const Domain& domain, Norm p, double radius);

/// Raised when a population quantity is requested from a family that has none.
class OracleUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact population quantities for synthetic families.
class PopulationOracle {
 public:
  virtual ~PopulationOracle() = default;
  /// F(x) = E f(x; S).
  virtual double pop_loss(const Vector& x) const = 0;
  /// F* = inf F.
  virtual double f_star() const = 0;
  /// Norm of the minimizer nearest the origin, measured in `p`.
  virtual double d_star(Norm p) const = 0;
  virtual Vector minimizer() const = 0;
};

/// Empirical objective (1/n) sum f_i(x) over a fixed sample set.
class EmpiricalRisk {
 public:
  virtual ~EmpiricalRisk() = default;
  virtual int dimension() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual void subgradient(const Vector& x, Vector& g) const = 0;
};

/// A sampleable stochastic convex objective f(x; S).
///
/// Implementations are immutable after construction and may be shared across
/// threads. Subgradients at kinks are the minimum-norm element.
class StochasticProblem {
 public:
  virtual ~StochasticProblem() = default;

  virtual std::string name() const = 0;
  virtual int dimension() const = 0;
  virtual Domain domain() const { return Domain::unconstrained(); }

  /// Draws the sample with counter index `id` from the stream keyed by `seed`.
  virtual Sample draw(std::uint64_t seed, std::uint64_t id) const = 0;

  virtual double loss(const Vector& x, const Sample& s) const = 0;
  /// Writes a subgradient of f(., s) at x into g (resized as needed).
  virtual void subgradient(const Vector& x, const Sample& s, Vector& g) const = 0;

  /// Almost-sure bound on ||subgradient||_2 over the domain, when known.
  virtual std::optional<double> lipschitz_l2() const { return std::nullopt; }
  /// Per-coordinate bounds on |subgradient_j| over the domain, when known.
  virtual std::optional<Vector> lipschitz_coord() const { return std::nullopt; }

  /// Exact population oracle, or nullptr when the family has none.
  virtual const PopulationOracle* population() const { return nullptr; }

  /// For one-dimensional piecewise-linear families: the kink locations of f(., s).
  /// An empty optional means the family is not 1D piecewise-linear.
  virtual std::optional<std::vector<double>> breakpoints(const Sample&) const {
    return std::nullopt;
  }

  /// Empirical risk over `samples`. The default averages per-sample oracles;
  /// families with sufficient statistics override it. The returned object keeps
  /// a reference to `samples` and to this problem.
  virtual std::unique_ptr<EmpiricalRisk> empirical_risk(std::span<const Sample> samples) const;
};

/// Draws n samples with ids first_id .. first_id + n - 1. Deterministic in
/// (problem, n, seed, first_id).
std::vector<Sample> sample_batch(const StochasticProblem& problem, std::size_t n,
                                 std::uint64_t seed, std::uint64_t first_id = 0);

/// F(x) - F*. Throws OracleUnavailable when the problem has no population oracle.
double population_suboptimality(const StochasticProblem& problem, const Vector& x);

/// (1/n) sum f_i(x).
double empirical_loss(const StochasticProblem& problem, std::span<const Sample> samples,
                      const Vector& x);

}  // namespace adaptopt
