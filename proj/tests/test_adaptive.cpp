#include "adaptopt/adaptive.hpp"
#include "adaptopt/families.hpp"
#include "adaptopt/rng.hpp"
#include "adaptopt/stats.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace adaptopt;

namespace {

LipschitzEstimates unit_lipschitz(int d) { return {1.0, Vector::Ones(d)}; }

bool disjoint(std::vector<std::uint64_t> a, std::vector<std::uint64_t> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::uint64_t> both;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
  return both.empty();
}

}  // namespace

TEST(Lambda, EuclideanRowWithoutDispersion) {
  const double lambda = lambda_from_dispersion(Norm::L2, {}, unit_lipschitz(1), 1, 101, 0.06);
  EXPECT_NEAR(lambda, 20.0 * std::log(100.0) / 100.0, 1e-14);
  EXPECT_NEAR(lambda, 0.92103, 5e-6);
}

TEST(Lambda, TableRowsAtGivenDispersion) {
  const DispersionSup sup{0.7, 0.3, 2.0};
  LipschitzEstimates lip{1.5, Vector::Constant(4, 0.5)};
  lip.coord[2] = 2.0;
  const double n = 400.0;
  const double delta = 0.1;
  EXPECT_NEAR(lambda_from_dispersion(Norm::L2, sup, lip, 4, 400, delta),
              4 * std::sqrt(std::log(6 / delta)) / std::sqrt(n) * 0.7 +
                  20 * 1.5 * std::log(6 / delta) / (n - 1),
              1e-14);
  EXPECT_NEAR(lambda_from_dispersion(Norm::L1, sup, lip, 4, 400, delta),
              4 * std::sqrt(2 * std::log(16 / delta)) / std::sqrt(n - 1) * 0.3 +
                  28 * 2.0 * std::log(16 / delta) / (3 * (n - 1)),
              1e-14);
  EXPECT_NEAR(lambda_from_dispersion(Norm::Linf, sup, lip, 4, 400, delta),
              9 * std::sqrt(2 * std::log(30 / delta)) / (2 * std::sqrt(n - 1)) * 2.0 +
                  50 * 3.5 * std::log(30 / delta) / (n - 1),
              1e-13);
}

TEST(Lambda, GridSizeAndBase) {
  EXPECT_EQ(lambda_grid_size(std::exp(3.0)), 3u);
  EXPECT_EQ(lambda_grid_size(0.5), 1u);
  EXPECT_EQ(lambda_grid_size(1.0), 1u);
  EXPECT_EQ(lambda_grid_size(std::exp(3.2)), 4u);
  const double c = std::log(30.0 / 0.1);
  EXPECT_NEAR(lambda_grid_base(1001, 0.1), 7 * std::sqrt(c / 1000) + 50 * c / 1000, 1e-14);
}

TEST(Dispersion, EnvelopeDominatesGrid) {
  for (const char* family : {"sparse_optimum_l1_geometry", "dense_optimum_linf_geometry",
                             "euclidean_hinge_like", "abs_linear_adversarial"}) {
    const auto p = make_family(family);
    const auto samples = sample_batch(*p, 500, 3);
    const LipschitzEstimates lip = lipschitz_from_problem(*p);
    const DispersionSup env = dispersion_sup(*p, samples, LambdaStrategy::Envelope, lip);
    const DispersionSup grid = dispersion_sup(*p, samples, LambdaStrategy::GridSup, lip);
    EXPECT_GE(env.l2, grid.l2) << family;
    EXPECT_GE(env.max_coord, grid.max_coord) << family;
    EXPECT_GE(env.sum_coord, grid.sum_coord) << family;
    for (Norm q : {Norm::L2, Norm::L1, Norm::Linf}) {
      EXPECT_GE(compute_lambda(*p, samples, q, 0.1, LambdaStrategy::Envelope),
                compute_lambda(*p, samples, q, 0.1, LambdaStrategy::GridSup));
    }
  }
}

TEST(Dispersion, ExactOneDimensionalMatchesFineScan) {
  const AbsLinearAdversarial p(3000, 1.0);
  const auto samples = sample_batch(p, 300, 4);
  const LipschitzEstimates lip = lipschitz_from_problem(p);
  const DispersionSup exact = dispersion_sup(p, samples, LambdaStrategy::Exact1D, lip);
  double scan = 0.0;
  for (int i = -400; i <= 400; ++i) {
    scan = std::max(scan, dispersion_at(p, samples, Vector::Constant(1, 0.0137 * i)).l2);
  }
  EXPECT_NEAR(exact.l2, scan, 1e-12);
}

TEST(Dispersion, GridShape) {
  const auto one = make_family("abs_linear_adversarial");
  EXPECT_EQ(dispersion_grid(*one, 2.0).size(), 21u);
  const auto many = make_family("sparse_optimum_l1_geometry", {{"d", "10"}});
  const auto grid = dispersion_grid(*many, 2.0);
  EXPECT_EQ(grid.size(), 5u + 8u);
  for (const Vector& x : grid) EXPECT_LE(norm(x, Norm::Linf), 2.0);
}

TEST(TwoStage, ZeroRadiusReturnsOrigin) {
  const auto p = make_family("sparse_optimum_l1_geometry", {{"d", "5"}});
  const auto samples = sample_batch(*p, 200, 1);
  for (Norm q : {Norm::L2, Norm::L1, Norm::Linf}) {
    const AdaptiveResult r = optimal_adaptive_with_lambda(*p, samples, q, 100.0);
    EXPECT_EQ(r.radius, 0.0);
    EXPECT_EQ(r.output, Vector::Zero(5));
  }
}

TEST(TwoStage, HygieneAndBallFeasibility) {
  for (const char* family : {"sparse_optimum_l1_geometry", "dense_optimum_linf_geometry",
                             "euclidean_hinge_like"}) {
    const auto p = make_family(family, {{"d", "8"}});
    for (std::uint64_t t = 0; t < 5; ++t) {
      const auto samples = sample_batch(*p, 800, derive_key(5, t));
      for (Norm q : {Norm::L2, Norm::L1, Norm::Linf}) {
        AdaptiveOptions opt;
        opt.strategy = LambdaStrategy::GridSup;
        const AdaptiveResult r = optimal_adaptive(*p, samples, q, 0.1, opt);
        EXPECT_EQ(r.first_ids.size(), 400u);
        EXPECT_EQ(r.second_ids.size(), 400u);
        EXPECT_TRUE(disjoint(r.first_ids, r.second_ids));
        EXPECT_LE(norm(r.output, q), r.radius + 1e-9);
        EXPECT_NEAR(r.radius, 3.0 * norm(r.erm.minimizer, q), 1e-12);
      }
    }
  }
}

TEST(TwoStage, RejectsOddOrTinySamples) {
  const auto p = make_family("abs_linear_adversarial");
  EXPECT_THROW(optimal_adaptive(*p, sample_batch(*p, 7, 1), Norm::L2, 0.1), std::invalid_argument);
  EXPECT_THROW(optimal_adaptive(*p, sample_batch(*p, 2, 1), Norm::L2, 0.1), std::invalid_argument);
}

TEST(TwoStage, Deterministic) {
  const auto p = make_family("dense_optimum_linf_geometry", {{"d", "6"}});
  const auto samples = sample_batch(*p, 600, 2);
  const AdaptiveResult a = optimal_adaptive(*p, samples, Norm::Linf, 0.1);
  const AdaptiveResult b = optimal_adaptive(*p, samples, Norm::Linf, 0.1);
  EXPECT_EQ(a.output, b.output);
  EXPECT_EQ(a.lambda, b.lambda);
}

TEST(TwoStage, LocalizationRadiusOnShiftedAdversarial) {
  const std::size_t n = 3000;
  const AbsLinearAdversarial p(n, 1.0);
  int inside = 0;
  for (std::uint64_t t = 0; t < 500; ++t) {
    const auto samples = sample_batch(p, n, derive_key(21, t));
    const double lambda = compute_lambda(p, samples, Norm::L2, 0.1);
    const ErmSolution sol = regularized_erm(p, samples, lambda, Norm::L2);
    inside += std::abs(sol.minimizer[0]) <= 11.0 * p.d_star(Norm::L2) ? 1 : 0;
  }
  EXPECT_GE(inside, 475);
}

TEST(LambdaGrid, WithinThreeTimesOracleBest) {
  const std::size_t n = 1000;
  const AbsLinearAdversarial p(n, 1.0);
  std::vector<double> selected;
  std::vector<double> best;
  for (std::uint64_t t = 0; t < 200; ++t) {
    const auto samples = sample_batch(p, 3 * n, derive_key(31, t));
    const GridAdaptiveResult r = lambda_grid_adaptive(p, samples, Norm::L2, 0.1, 3.0);
    EXPECT_EQ(r.lambdas.size(), lambda_grid_size(1.0));
    double b = population_suboptimality(p, Vector::Zero(1));
    for (const AdaptiveResult& m : r.members) b = std::min(b, population_suboptimality(p, m.output));
    selected.push_back(population_suboptimality(p, r.output));
    best.push_back(b);
    EXPECT_TRUE(r.selection.in_safe_set(r.selection.chosen));
  }
  EXPECT_LE(mean(selected), 3.0 * mean(best));
}

namespace {

struct GeometryStats {
  double best_rate[3] = {0, 0, 0};
  double lemma_rate = 0.0;
};

GeometryStats geometry_run(const StochasticProblem& p, std::size_t n, int trials) {
  GeometryStats out;
  AdaptiveOptions opt;
  opt.strategy = LambdaStrategy::GridSup;
  for (int t = 0; t < trials; ++t) {
    const auto samples = sample_batch(p, 3 * n, derive_key(41, static_cast<std::uint64_t>(t)));
    const MultiGeometryResult r = multi_geometry(p, samples, 0.1, 3.0, opt);
    double sub[4];
    sub[0] = population_suboptimality(p, Vector::Zero(p.dimension()));
    for (int k = 0; k < 3; ++k) sub[k + 1] = population_suboptimality(p, r.candidates[k].output);
    const int best = static_cast<int>(std::min_element(sub + 1, sub + 4) - (sub + 1));
    out.best_rate[best] += 1.0 / trials;
    const double chosen = sub[r.selection.chosen];
    out.lemma_rate += chosen <= sub[best + 1] + 4.0 * r.widths.tau[best + 1] + 1e-12 ? 1.0 / trials : 0.0;
    EXPECT_TRUE(disjoint(r.validation_ids, r.candidates[0].first_ids));
    EXPECT_TRUE(disjoint(r.validation_ids, r.candidates[0].second_ids));
  }
  return out;
}

}  // namespace

TEST(MultiGeometry, SparseOptimumFavoursL1) {
  const auto p = make_family("sparse_optimum_l1_geometry");
  const GeometryStats s = geometry_run(*p, 2000, 200);
  EXPECT_GE(s.best_rate[1], 0.7);
  EXPECT_GE(s.lemma_rate, 0.9 - 3.0 * std::sqrt(0.09 / 200));
}

TEST(MultiGeometry, DenseOptimumFavoursLinf) {
  const auto p = make_family("dense_optimum_linf_geometry");
  const GeometryStats s = geometry_run(*p, 2000, 200);
  EXPECT_GE(s.best_rate[2], 0.7);
  EXPECT_GE(s.lemma_rate, 0.9 - 3.0 * std::sqrt(0.09 / 200));
}

TEST(MultiGeometry, WidthsUseTheSmallestNormProduct) {
  const auto p = make_family("sparse_optimum_l1_geometry", {{"d", "10"}});
  const auto samples = sample_batch(*p, 1500, 8);
  AdaptiveOptions opt;
  opt.strategy = LambdaStrategy::GridSup;
  const MultiGeometryResult r = multi_geometry(*p, samples, 0.1, 3.0, opt);
  const LipschitzEstimates lip = lipschitz_from_problem(*p);
  std::vector<Vector> points{Vector::Zero(10)};
  for (const AdaptiveResult& c : r.candidates) points.push_back(c.output);
  const std::span<const Sample> validation(samples.data() + 1000, 500);
  const LossMatrix losses = loss_matrix(*p, validation, points);
  const Vector var = difference_variances(losses);
  const double c = std::log(12.0 / 0.1);
  EXPECT_EQ(r.widths.tau[0], 0.0);
  for (int k = 1; k <= 3; ++k) {
    const Vector& x = points[static_cast<std::size_t>(k)];
    const double q = std::min({lip.l2 * x.norm(), lip.coord.maxCoeff() * x.lpNorm<1>(),
                               lip.coord.sum() * x.lpNorm<Eigen::Infinity>()});
    const double tau = std::sqrt(2.0 * var[k] * c / 500.0) + 14.0 / 3.0 * c / 499.0 * q;
    EXPECT_NEAR(r.widths.tau[k], tau, 1e-12 * (1 + tau));
  }
}
