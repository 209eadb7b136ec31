#pragma once

#include "adaptopt/problem.hpp"

#include <Eigen/Core>

#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <string_view>

namespace adaptopt {

using ParamMap = std::map<std::string, std::string, std::less<>>;

/// f(x; 0) = |x - c|, f(x; 1) = -(x - c), S ~ Bernoulli(q) with
/// q = 1/2 - 1/(16 sqrt(n_design)). F(x) = (1-q)|x-c| - q(x-c), minimized at c with F* = 0.
/// shift c = 0 is the lower-bound instance; c = 1 gives D* = 1.
class AbsLinearAdversarial final : public StochasticProblem, public PopulationOracle {
 public:
  explicit AbsLinearAdversarial(std::size_t n_design, double shift = 0.0);

  double success_probability() const { return q_; }
  double shift() const { return shift_; }
  std::size_t design_n() const { return n_design_; }

  std::string name() const override { return "abs_linear_adversarial"; }
  int dimension() const override { return 1; }
  Sample draw(std::uint64_t seed, std::uint64_t id) const override;
  double loss(const Vector& x, const Sample& s) const override;
  void subgradient(const Vector& x, const Sample& s, Vector& g) const override;
  std::optional<double> lipschitz_l2() const override { return 1.0; }
  std::optional<Vector> lipschitz_coord() const override { return Vector::Ones(1); }
  const PopulationOracle* population() const override { return this; }
  std::optional<std::vector<double>> breakpoints(const Sample& s) const override;
  std::unique_ptr<EmpiricalRisk> empirical_risk(std::span<const Sample> samples) const override;

  double pop_loss(const Vector& x) const override;
  double f_star() const override { return 0.0; }
  double d_star(Norm) const override { return std::abs(shift_); }
  Vector minimizer() const override { return Vector::Constant(1, shift_); }

 private:
  std::size_t n_design_;
  double shift_;
  double q_;
};

/// f(x; xi) = (mu/2)(x - x* - noise*xi)^2 with xi ~ Uniform[-1, 1] on the interval
/// [-radius, radius]. F(x) = (mu/2)(x - x*)^2 + mu noise^2 / 6.
class StronglyConvex1D final : public StochasticProblem, public PopulationOracle {
 public:
  StronglyConvex1D(double mu, double optimum, double noise, double radius);

  double mu() const { return mu_; }

  std::string name() const override { return "strongly_convex_1d"; }
  int dimension() const override { return 1; }
  Domain domain() const override { return Domain::ball(Norm::L2, radius_); }
  Sample draw(std::uint64_t seed, std::uint64_t id) const override;
  double loss(const Vector& x, const Sample& s) const override;
  void subgradient(const Vector& x, const Sample& s, Vector& g) const override;
  std::optional<double> lipschitz_l2() const override;
  std::optional<Vector> lipschitz_coord() const override;
  const PopulationOracle* population() const override { return this; }

  double pop_loss(const Vector& x) const override;
  double f_star() const override;
  double d_star(Norm) const override { return std::abs(optimum_); }
  Vector minimizer() const override { return Vector::Constant(1, optimum_); }

 private:
  double mu_;
  double optimum_;
  double noise_;
  double radius_;
};

/// f(x; a) = |<a, x - x*>| with a uniform on the unit sphere of R^d.
/// F(x) = c_d ||x - x*||_2 where c_d = E|a_1| = Gamma(d/2) / (sqrt(pi) Gamma((d+1)/2)).
class EuclideanHingeLike final : public StochasticProblem, public PopulationOracle {
 public:
  explicit EuclideanHingeLike(Vector optimum);

  double sphere_abs_moment() const { return c_d_; }

  std::string name() const override { return "euclidean_hinge_like"; }
  int dimension() const override { return static_cast<int>(optimum_.size()); }
  Sample draw(std::uint64_t seed, std::uint64_t id) const override;
  double loss(const Vector& x, const Sample& s) const override;
  void subgradient(const Vector& x, const Sample& s, Vector& g) const override;
  std::optional<double> lipschitz_l2() const override { return 1.0; }
  std::optional<Vector> lipschitz_coord() const override { return Vector::Ones(dimension()); }
  const PopulationOracle* population() const override { return this; }

  double pop_loss(const Vector& x) const override;
  double f_star() const override { return 0.0; }
  double d_star(Norm p) const override { return norm(optimum_, p); }
  Vector minimizer() const override { return optimum_; }

 private:
  Vector optimum_;
  double c_d_;
};

/// Separable sharp losses f(x; xi) = sum_j c_j (|x_j - x*_j| + xi_j (x_j - x*_j)) with
/// xi_j = noise * Rademacher. F(x) = sum_j c_j |x_j - x*_j|, F* = 0.
///
/// Backs both `sparse_optimum_l1_geometry` (x* = e_1, flat scales) and
/// `dense_optimum_linf_geometry` (x* = 1, decaying scales c_j = j^-decay).
class SeparableSharpFamily final : public StochasticProblem, public PopulationOracle {
 public:
  SeparableSharpFamily(std::string name, Vector optimum, Vector scales, double noise);

  const Vector& scales() const { return scales_; }
  double noise() const { return noise_; }

  std::string name() const override { return name_; }
  int dimension() const override { return static_cast<int>(optimum_.size()); }
  Sample draw(std::uint64_t seed, std::uint64_t id) const override;
  double loss(const Vector& x, const Sample& s) const override;
  void subgradient(const Vector& x, const Sample& s, Vector& g) const override;
  std::optional<double> lipschitz_l2() const override;
  std::optional<Vector> lipschitz_coord() const override;
  const PopulationOracle* population() const override { return this; }
  std::unique_ptr<EmpiricalRisk> empirical_risk(std::span<const Sample> samples) const override;

  double pop_loss(const Vector& x) const override;
  double f_star() const override { return 0.0; }
  double d_star(Norm p) const override { return norm(optimum_, p); }
  Vector minimizer() const override { return optimum_; }

 private:
  std::string name_;
  Vector optimum_;
  Vector scales_;
  double noise_;
};

/// Multiclass logistic regression with features on the unit sphere of R^m.
/// x is the C x m weight matrix flattened row-major; f(X; S) = -log softmax_{label}(X s).
/// Labels follow a softmax teacher with weights teacher_scale on the "diagonal".
/// No closed-form population oracle.
class MulticlassLogistic final : public StochasticProblem {
 public:
  MulticlassLogistic(int classes, int features, double teacher_scale);

  int classes() const { return classes_; }
  int features() const { return features_; }

  std::string name() const override { return "multiclass_logistic"; }
  int dimension() const override { return classes_ * features_; }
  Sample draw(std::uint64_t seed, std::uint64_t id) const override;
  double loss(const Vector& x, const Sample& s) const override;
  void subgradient(const Vector& x, const Sample& s, Vector& g) const override;
  /// ||(p - e_y) s^T||_F <= ||p - e_y||_2 <= sqrt(2).
  std::optional<double> lipschitz_l2() const override { return std::sqrt(2.0); }
  std::optional<Vector> lipschitz_coord() const override { return Vector::Ones(dimension()); }

 private:
  int classes_;
  int features_;
  double teacher_scale_;
};

/// Valid M(x) for multiclass logistic losses with ||features||_2 <= 1:
/// 2 * max_c ||x_c - x0_c||_2 over rows c. Throws std::invalid_argument on shape mismatch.
double logistic_width_helper(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x0);

/// Builds a family by name. Recognized parameters per family:
///   abs_linear_adversarial       n (3000), shift (0)
///   strongly_convex_1d           mu (1), optimum (1), noise (1), radius (4)
///   euclidean_hinge_like         d (10), optimum (1 -> e_1, or a comma list)
///   sparse_optimum_l1_geometry   d (50), noise (0.5), scale (1), optimum (e_1)
///   dense_optimum_linf_geometry  d (50), noise (0.5), decay (1), optimum (all ones)
///   multiclass_logistic          classes (3), features (4), teacher_scale (2)
/// Unknown names or parameters throw std::invalid_argument.
std::shared_ptr<const StochasticProblem> make_family(std::string_view name,
                                                     const ParamMap& params = {});

}  // namespace adaptopt
