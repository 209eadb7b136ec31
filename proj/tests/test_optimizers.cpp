#include "adaptopt/families.hpp"
#include "adaptopt/optimizers.hpp"
#include "adaptopt/rng.hpp"
#include "adaptopt/stats.hpp"
#include "test_problems.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

using namespace adaptopt;
using adaptopt::testing::LinearProblem;

namespace {

std::vector<Sample> blank_samples(std::size_t n) {
  std::vector<Sample> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i].id = i;
  return s;
}

// Hand simulation of u_{t+1} = clip(u_t - R g_t / sqrt(sum g^2)) in 1D, constant gradient g.
double simulate_1d_average(double g, double radius, std::size_t n) {
  double u = 0.0;
  double acc = 0.0;
  double sum = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    sum += u;
    acc += g * g;
    u = std::clamp(u - radius * g / std::sqrt(acc), -radius, radius);
  }
  return sum / static_cast<double>(n);
}

}  // namespace

TEST(AdaSgd, HandTraceOnNegativeLinear) {
  const LinearProblem p(Vector::Constant(1, -1.0));
  const auto samples = blank_samples(3);
  const OptimizerRun run = ada_sgd(p, 1.0, samples, true);
  ASSERT_TRUE(run.trace.has_value());
  EXPECT_EQ(run.trace->iterates[0][0], 0.0);
  EXPECT_EQ(run.trace->iterates[1][0], 1.0);
  EXPECT_EQ(run.trace->iterates[2][0], 1.0);
  EXPECT_NEAR(run.average_iterate[0], 2.0 / 3.0, 1e-15);
  EXPECT_EQ(run.iterate_count, 3u);
}

TEST(AdaGrad, CoincidesWithAdaSgdInOneDimension) {
  const LinearProblem p(Vector::Constant(1, -1.0));
  const auto samples = blank_samples(3);
  EXPECT_NEAR(ada_grad(p, 1.0, samples).average_iterate[0], 2.0 / 3.0, 1e-15);
  for (double g : {-0.3, 0.7, 2.0}) {
    for (std::size_t n : {1u, 5u, 40u}) {
      const LinearProblem q(Vector::Constant(1, g));
      const auto s = blank_samples(n);
      const double oracle = simulate_1d_average(g, 1.5, n);
      EXPECT_NEAR(ada_grad(q, 1.5, s).average_iterate[0], oracle, 1e-12);
      EXPECT_NEAR(ada_sgd(q, 1.5, s).average_iterate[0], oracle, 1e-12);
    }
  }
}

TEST(AdaEmd, PositiveLinearOnNonnegativeDomainDecreases) {
  const LinearProblem p(Vector::Constant(1, 1.0), Domain::nonnegative());
  double previous = 2.0;
  for (std::size_t n : {1u, 2u, 4u}) {
    const OptimizerRun run = ada_emd(p, 1.0, blank_samples(n), true);
    for (const Vector& u : run.trace->iterates) {
      EXPECT_GE(u[0], 0.0);
      EXPECT_LE(u[0], 1.0);
    }
    // Closed form: weight on the coordinate is 1 / (1 + exp(sum_s beta_s)), beta_s = sqrt(2 ln 2 / s).
    double sum = 0.0;
    double exponent = 0.0;
    for (std::size_t t = 1; t <= n; ++t) {
      sum += 1.0 / (1.0 + std::exp(exponent));
      exponent += std::sqrt(2.0 * std::log(2.0) / static_cast<double>(t));
    }
    EXPECT_NEAR(run.average_iterate[0], sum / static_cast<double>(n), 1e-14);
    EXPECT_LT(run.average_iterate[0], previous);
    previous = run.average_iterate[0];
  }
}

TEST(AdaEmd, UnconstrainedStartsAtOriginAndMovesAgainstGradient) {
  Vector c(3);
  c << 1.0, -2.0, 0.0;
  const LinearProblem p(c);
  const OptimizerRun run = ada_emd(p, 2.0, blank_samples(50), true);
  EXPECT_EQ(run.trace->iterates[0].norm(), 0.0);
  EXPECT_LT(run.average_iterate[0], 0.0);
  EXPECT_GT(run.average_iterate[1], 0.0);
  EXPECT_NEAR(run.average_iterate[2], 0.0, 1e-15);
}

TEST(Optimizers, ScaleEquivarianceOnLinearLosses) {
  const LinearProblem p(Vector::Constant(1, -1.0));
  const auto samples = blank_samples(25);
  for (double c : {0.5, 3.0, 10.0}) {
    const OptimizerRun base = ada_sgd(p, 1.0, samples, true);
    const OptimizerRun scaled = ada_sgd(p, c, samples, true);
    for (std::size_t t = 0; t < samples.size(); ++t) {
      EXPECT_NEAR(scaled.trace->iterates[t][0], c * base.trace->iterates[t][0], 1e-12);
    }
  }
}

TEST(Optimizers, AveragesStayInBall) {
  for (const char* family : {"sparse_optimum_l1_geometry", "dense_optimum_linf_geometry",
                             "euclidean_hinge_like", "multiclass_logistic"}) {
    const auto p = make_family(family);
    const auto samples = sample_batch(*p, 400, 5);
    for (double r : {0.1, 1.0, 5.0}) {
      for (Norm q : {Norm::L2, Norm::L1, Norm::Linf}) {
        const OptimizerRun run = run_geometry_optimizer(q, *p, r, samples);
        EXPECT_LE(norm(run.average_iterate, q), r + 1e-9) << family;
      }
    }
  }
}

TEST(Optimizers, TraceIteratesInBallAndAccumulatorsMonotone) {
  const auto p = make_family("sparse_optimum_l1_geometry", {{"d", "8"}});
  const auto samples = sample_batch(*p, 300, 9);
  const OptimizerRun runs[] = {ada_sgd(*p, 1.0, samples, true), ada_emd(*p, 1.0, samples, true),
                               ada_grad(*p, 1.0, samples, true)};
  const Norm norms[] = {Norm::L2, Norm::L1, Norm::Linf};
  for (int k = 0; k < 3; ++k) {
    const OptimizerTrace& tr = *runs[k].trace;
    ASSERT_EQ(tr.iterates.size(), samples.size());
    for (std::size_t t = 0; t < tr.iterates.size(); ++t) {
      EXPECT_LE(norm(tr.iterates[t], norms[k]), 1.0 + 1e-9);
      if (t > 0) {
        EXPECT_TRUE((tr.accumulators[t].array() >= tr.accumulators[t - 1].array()).all());
      }
    }
  }
}

TEST(Optimizers, Deterministic) {
  const auto p = make_family("dense_optimum_linf_geometry", {{"d", "10"}});
  const auto samples = sample_batch(*p, 500, 3);
  for (Norm q : {Norm::L2, Norm::L1, Norm::Linf}) {
    const Vector a = run_geometry_optimizer(q, *p, 2.0, samples).average_iterate;
    const Vector b = run_geometry_optimizer(q, *p, 2.0, samples).average_iterate;
    EXPECT_EQ(a, b);
  }
}

TEST(Optimizers, RejectNegativeRadius) {
  const LinearProblem p(Vector::Constant(1, 1.0));
  EXPECT_THROW(ada_sgd(p, -1.0, blank_samples(3)), std::invalid_argument);
  EXPECT_THROW(ada_grad(p, -1.0, blank_samples(3)), std::invalid_argument);
}

TEST(Optimizers, TraceCsvHasOneRowPerStep) {
  const LinearProblem p(Vector::Constant(2, 1.0));
  const OptimizerRun run = ada_sgd(p, 1.0, blank_samples(4), true);
  std::ostringstream out;
  write_trace_csv(out, *run.trace);
  const std::string text = out.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
  EXPECT_EQ(text.substr(0, text.find('\n')), "step,x1,x2,grad_norm");
}

namespace {

// Fraction of 500 trials whose suboptimality is within `bound`.
double rate_within(const StochasticProblem& p, Norm q, double radius, std::size_t n, double bound) {
  double hits = 0.0;
  for (std::uint64_t t = 0; t < 500; ++t) {
    const auto samples = sample_batch(p, n, derive_key(77, t));
    const Vector x = run_geometry_optimizer(q, p, radius, samples).average_iterate;
    hits += population_suboptimality(p, x) <= bound ? 1.0 : 0.0;
  }
  return hits / 500.0;
}

}  // namespace

TEST(KnownRadiusRates, AdaSgdOnShiftedAdversarial) {
  const std::size_t n = 3000;
  const AbsLinearAdversarial p(n, 1.0);
  const double bound = 10.0 * 1.0 * 1.0 * std::sqrt(std::log(2.0 / 0.1)) / std::sqrt(3000.0);
  EXPECT_GE(rate_within(p, Norm::L2, 1.0, n, bound), 0.9);
}

TEST(KnownRadiusRates, AdaEmdOnSparseOptimum) {
  const auto p = make_family("sparse_optimum_l1_geometry");
  const std::size_t n = 2000;
  const double linf = p->lipschitz_coord()->maxCoeff();
  const double r = p->population()->d_star(Norm::L1);
  const double bound = 10.0 * linf * r * std::sqrt(std::log(2.0 * 50 / 0.1)) / std::sqrt(double(n));
  EXPECT_GE(rate_within(*p, Norm::L1, r, n, bound), 0.9);
}

TEST(KnownRadiusRates, AdaGradOnDenseOptimum) {
  const auto p = make_family("dense_optimum_linf_geometry");
  const std::size_t n = 2000;
  const double l1 = p->lipschitz_coord()->sum();
  const double bound = 10.0 * l1 * 1.0 * std::sqrt(std::log(2.0 / 0.1)) / std::sqrt(double(n));
  EXPECT_GE(rate_within(*p, Norm::Linf, 1.0, n, bound), 0.9);
}

TEST(StrongConvexSgd, ErrorShrinksWithN) {
  const StronglyConvex1D p(1.0, 1.0, 0.5, 1.5);
  std::vector<double> small;
  std::vector<double> large;
  for (std::uint64_t t = 0; t < 200; ++t) {
    small.push_back(population_suboptimality(
        p, sgd_strongly_convex(p, 1.0, sample_batch(p, 100, derive_key(1, t))).average_iterate));
    large.push_back(population_suboptimality(
        p, sgd_strongly_convex(p, 1.0, sample_batch(p, 1600, derive_key(2, t))).average_iterate));
  }
  EXPECT_LT(median(large), median(small) / 4.0);
}
