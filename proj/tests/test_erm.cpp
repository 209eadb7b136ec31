#include "adaptopt/families.hpp"
#include "adaptopt/optimizers.hpp"
#include "adaptopt/rng.hpp"
#include "test_problems.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace adaptopt;
using adaptopt::testing::OpaqueKinks;
using adaptopt::testing::RandomKinks;

namespace {

double objective(const StochasticProblem& p, std::span<const Sample> s, double lambda, Norm q,
                 const Vector& x) {
  return empirical_loss(p, s, x) + lambda * norm(x, q);
}

// Brute force over every kink and the origin; the 1D objective is piecewise linear
// and bounded below here, so its minimum sits on one of them.
double kink_minimum(const RandomKinks& p, std::span<const Sample> s, double lambda) {
  double best = objective(p, s, lambda, Norm::L2, Vector::Zero(1));
  for (const Sample& smp : s) {
    best = std::min(best, objective(p, s, lambda, Norm::L2, Vector::Constant(1, smp.features[1])));
  }
  return best;
}

std::vector<Sample> labelled(std::size_t n, int label) {
  std::vector<Sample> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i].id = i;
    s[i].label = label;
  }
  return s;
}

}  // namespace

TEST(RegularizedErm, AbsoluteValueExample) {
  // Every sample is |x - 1|; lambda = 0.5 leaves x = 1 optimal with value 0.5.
  const AbsLinearAdversarial p(3000, 1.0);
  const auto samples = labelled(10, 0);
  for (ErmSolver solver : {ErmSolver::Exact1D, ErmSolver::Generic, ErmSolver::Auto}) {
    ErmOptions opt;
    opt.solver = solver;
    const ErmSolution sol = regularized_erm(p, samples, 0.5, Norm::L2, opt);
    EXPECT_NEAR(sol.minimizer[0], 1.0, 1e-5);
    EXPECT_NEAR(sol.objective_value, 0.5, 1e-6);
    EXPECT_FALSE(sol.residual_flagged);
  }
  EXPECT_EQ(regularized_erm(p, samples, 0.5, Norm::L2).solver, ErmSolver::Exact1D);
}

TEST(RegularizedErm, LargeLambdaGivesOrigin) {
  const AbsLinearAdversarial p(3000, 1.0);
  const auto samples = labelled(10, 0);
  for (ErmSolver solver : {ErmSolver::Exact1D, ErmSolver::Generic}) {
    ErmOptions opt;
    opt.solver = solver;
    EXPECT_EQ(regularized_erm(p, samples, 1.5, Norm::L2, opt).minimizer[0], 0.0);
  }
}

TEST(RegularizedErm, RejectsBadInput) {
  const AbsLinearAdversarial p(3000, 1.0);
  const auto samples = labelled(4, 0);
  EXPECT_THROW(regularized_erm(p, samples, 0.0, Norm::L2), std::invalid_argument);
  EXPECT_THROW(regularized_erm(p, std::span<const Sample>{}, 1.0, Norm::L2), std::invalid_argument);
  // -(x - 1) + 0.5 |x| is unbounded below.
  EXPECT_THROW(regularized_erm(p, labelled(4, 1), 0.5, Norm::L2), std::domain_error);
}

TEST(RegularizedErm, ExactMatchesBruteForce) {
  const RandomKinks p(3.0);
  CounterRng rng(8);
  for (std::uint64_t inst = 0; inst < 100; ++inst) {
    const auto samples = sample_batch(p, 5 + inst % 40, derive_key(3, inst));
    const double lambda = rng.uniform(0.05, 1.5);
    ErmOptions opt;
    opt.solver = ErmSolver::Exact1D;
    const ErmSolution sol = regularized_erm(p, samples, lambda, Norm::L2, opt);
    EXPECT_NEAR(sol.objective_value, kink_minimum(p, samples, lambda), 1e-12);
    EXPECT_EQ(sol.solver_residual, 0.0);
  }
}

TEST(RegularizedErm, GenericAgreesWithExactOnRandomInstances) {
  const RandomKinks exact_problem(3.0);
  const OpaqueKinks opaque(3.0);
  CounterRng rng(9);
  for (std::uint64_t inst = 0; inst < 100; ++inst) {
    const auto samples = sample_batch(exact_problem, 5 + inst % 40, derive_key(4, inst));
    const double lambda = rng.uniform(0.05, 1.5);
    const ErmSolution exact = regularized_erm(exact_problem, samples, lambda, Norm::L2);
    const ErmSolution generic = regularized_erm(opaque, samples, lambda, Norm::L2);
    EXPECT_EQ(generic.solver, ErmSolver::Generic);
    EXPECT_FALSE(generic.residual_flagged) << "instance " << inst;
    EXPECT_GE(generic.objective_value, exact.objective_value - 1e-12);
    EXPECT_LE(generic.objective_value - exact.objective_value, generic.tolerance) << "instance " << inst;
    // The certificate must be honest.
    EXPECT_LE(generic.objective_value - exact.objective_value, generic.solver_residual + 1e-12);
  }
}

TEST(RegularizedErm, ObjectiveValueMatchesDefinition) {
  for (const char* family : {"sparse_optimum_l1_geometry", "dense_optimum_linf_geometry",
                             "euclidean_hinge_like"}) {
    const auto p = make_family(family, {{"d", "10"}});
    const auto samples = sample_batch(*p, 400, 6);
    for (Norm q : {Norm::L2, Norm::L1, Norm::Linf}) {
      const ErmSolution sol = regularized_erm(*p, samples, 0.05, q);
      EXPECT_NEAR(sol.objective_value, objective(*p, samples, 0.05, q, sol.minimizer), 1e-9);
      EXPECT_LE(sol.solver_residual, sol.tolerance) << family << " " << to_string(q);
      EXPECT_FALSE(sol.residual_flagged);
    }
  }
}

TEST(RegularizedErm, GenericBeatsRandomPerturbations) {
  const auto p = make_family("sparse_optimum_l1_geometry", {{"d", "6"}});
  const auto samples = sample_batch(*p, 300, 10);
  CounterRng rng(12);
  for (Norm q : {Norm::L2, Norm::L1, Norm::Linf}) {
    const ErmSolution sol = regularized_erm(*p, samples, 0.1, q);
    for (int k = 0; k < 300; ++k) {
      Vector x = sol.minimizer;
      for (int j = 0; j < x.size(); ++j) x[j] += 0.2 * rng.normal();
      EXPECT_GE(objective(*p, samples, 0.1, q, x), sol.objective_value - sol.tolerance);
    }
  }
}
