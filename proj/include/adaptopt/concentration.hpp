#pragma once

#include "adaptopt/norms.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <span>

namespace adaptopt {

/// Scalar bounds come in a one-sided form (upper deviation of the mean only)
/// and a two-sided form (absolute deviation). All logs are natural.
enum class Sides { One, Two };

/// (b-a) sqrt(ln(k/delta) / (2n)), k = 2 two-sided, 1 one-sided.
double hoeffding_width(double range, std::size_t n, double delta, Sides sides = Sides::Two);

/// sigma sqrt(2 ln(k/delta) / n) + (b-a) ln(k/delta) / (3n), k as above.
double bennett_width(double sigma, double range, std::size_t n, double delta,
                     Sides sides = Sides::Two);

/// Empirical Bennett (Maurer-Pontil):
///   sqrt(2 s^2 ln(k/delta) / n) + 7 (b-a) ln(k/delta) / (3(n-1)),
/// s^2 the unbiased sample variance, k = 2 one-sided, 4 two-sided. Rejects n < 2.
double empirical_bennett_width(std::span<const double> values, double range, double delta,
                               Sides sides = Sides::Two);
double empirical_bennett_width_from_variance(double sample_variance, std::size_t n, double range,
                                             double delta, Sides sides = Sides::Two);

/// Rows of `samples` are the vectors V_1..V_n.

/// 2 sqrt(sum_i ||V_i - Vbar||_2^2 ln(6/delta)) / n + 10 C ln(6/delta) / (n-1).
/// Throws std::invalid_argument if some ||V_i||_2 > C.
double vec_l2_width(const Eigen::MatrixXd& samples, double envelope, double delta);
double vec_l2_width_from_stats(double sum_sq_dev, std::size_t n, double envelope, double delta);

/// max_j sqrt(2 sum_i (V_ij - Vbar_j)^2 ln(4d/delta)) / (n-1) + 14 C_j ln(4d/delta) / (3(n-1)).
double vec_inf_width(const Eigen::MatrixXd& samples, const Vector& envelopes, double delta);
double vec_inf_width_from_stats(const Vector& sum_sq_dev, std::size_t n, const Vector& envelopes,
                                double delta);

/// sum_j (9/4) sqrt(2 sum_i (V_ij - Vbar_j)^2 ln(30/delta)) / (n-1) + 25 C_j ln(30/delta) / (n-1).
double vec_l1_width(const Eigen::MatrixXd& samples, const Vector& envelopes, double delta);
double vec_l1_width_from_stats(const Vector& sum_sq_dev, std::size_t n, const Vector& envelopes,
                               double delta);

/// Tail profile P(X >= a sqrt(ln 1/d') + b ln(1/d')) <= d' for all d' in (0,1).
struct SubGammaTail {
  double a = 0.0;
  double b = 0.0;
};

/// (9/4) sum_j (a_j sqrt(ln(6/delta)) + b_j ln(6/delta)). Bounds sum_j X_j with failure
/// probability at most delta for arbitrarily dependent X_j with the given tail profiles.
double dependent_sum_bound(std::span<const SubGammaTail> tails, double delta);

/// Column-wise sum of squared deviations from the column mean.
Vector column_sum_sq_dev(const Eigen::MatrixXd& samples);

}  // namespace adaptopt
