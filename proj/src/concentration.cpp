#include "adaptopt/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace adaptopt {

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
}

void check_nonneg(double v, const char* what) {
  if (!(v >= 0.0)) throw std::invalid_argument(std::string(what) + " must be nonnegative");
}

void check_n(std::size_t n, std::size_t minimum) {
  if (n < minimum) {
    throw std::invalid_argument("need at least " + std::to_string(minimum) + " samples");
  }
}

void check_envelopes(const Eigen::MatrixXd& samples, const Vector& envelopes) {
  if (envelopes.size() != samples.cols()) {
    throw std::invalid_argument("envelope count does not match the vector dimension");
  }
  for (Eigen::Index j = 0; j < envelopes.size(); ++j) {
    check_nonneg(envelopes[j], "envelope");
    const double peak = samples.col(j).cwiseAbs().maxCoeff();
    if (peak > envelopes[j] * (1.0 + 1e-12)) {
      throw std::invalid_argument("coordinate " + std::to_string(j) + " exceeds its envelope");
    }
  }
}

double log_term(double numerator, double delta) { return std::log(numerator / delta); }

}  // namespace

double hoeffding_width(double range, std::size_t n, double delta, Sides sides) {
  check_nonneg(range, "range");
  check_n(n, 1);
  check_delta(delta);
  const double c = log_term(sides == Sides::Two ? 2.0 : 1.0, delta);
  return range * std::sqrt(c / (2.0 * static_cast<double>(n)));
}

double bennett_width(double sigma, double range, std::size_t n, double delta, Sides sides) {
  check_nonneg(sigma, "sigma");
  check_nonneg(range, "range");
  check_n(n, 1);
  check_delta(delta);
  const double c = log_term(sides == Sides::Two ? 2.0 : 1.0, delta);
  const double dn = static_cast<double>(n);
  return sigma * std::sqrt(2.0 * c / dn) + range * c / (3.0 * dn);
}

double empirical_bennett_width_from_variance(double sample_variance, std::size_t n, double range,
                                             double delta, Sides sides) {
  check_nonneg(sample_variance, "sample variance");
  check_nonneg(range, "range");
  check_n(n, 2);
  check_delta(delta);
  const double c = log_term(sides == Sides::Two ? 4.0 : 2.0, delta);
  const double dn = static_cast<double>(n);
  return std::sqrt(2.0 * sample_variance * c / dn) + 7.0 * range * c / (3.0 * (dn - 1.0));
}

double empirical_bennett_width(std::span<const double> values, double range, double delta,
                               Sides sides) {
  check_n(values.size(), 2);
  const Eigen::Map<const Vector> v(values.data(), static_cast<Eigen::Index>(values.size()));
  const double s2 = (v.array() - v.mean()).square().sum() / static_cast<double>(values.size() - 1);
  return empirical_bennett_width_from_variance(s2, values.size(), range, delta, sides);
}

Vector column_sum_sq_dev(const Eigen::MatrixXd& samples) {
  if (samples.rows() == 0) return Vector::Zero(samples.cols());
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  return (samples.rowwise() - mean).array().square().colwise().sum().transpose();
}

double vec_l2_width_from_stats(double sum_sq_dev, std::size_t n, double envelope, double delta) {
  check_nonneg(sum_sq_dev, "sum of squared deviations");
  check_nonneg(envelope, "envelope");
  check_n(n, 2);
  check_delta(delta);
  const double c = log_term(6.0, delta);
  const double dn = static_cast<double>(n);
  return 2.0 * std::sqrt(sum_sq_dev * c) / dn + 10.0 * envelope * c / (dn - 1.0);
}

double vec_l2_width(const Eigen::MatrixXd& samples, double envelope, double delta) {
  check_n(static_cast<std::size_t>(samples.rows()), 2);
  if (samples.rowwise().norm().maxCoeff() > envelope * (1.0 + 1e-12)) {
    throw std::invalid_argument("a sample vector exceeds the l2 envelope");
  }
  return vec_l2_width_from_stats(column_sum_sq_dev(samples).sum(),
                                 static_cast<std::size_t>(samples.rows()), envelope, delta);
}

double vec_inf_width_from_stats(const Vector& sum_sq_dev, std::size_t n, const Vector& envelopes,
                                double delta) {
  check_n(n, 2);
  check_delta(delta);
  if (sum_sq_dev.size() != envelopes.size() || envelopes.size() == 0) {
    throw std::invalid_argument("statistics and envelopes must have equal positive length");
  }
  const double c = log_term(4.0 * static_cast<double>(envelopes.size()), delta);
  const double m = static_cast<double>(n) - 1.0;
  double width = 0.0;
  for (Eigen::Index j = 0; j < envelopes.size(); ++j) {
    check_nonneg(envelopes[j], "envelope");
    const double wj = std::sqrt(2.0 * sum_sq_dev[j] * c) / m + 14.0 * envelopes[j] * c / (3.0 * m);
    width = std::max(width, wj);
  }
  return width;
}

double vec_inf_width(const Eigen::MatrixXd& samples, const Vector& envelopes, double delta) {
  check_n(static_cast<std::size_t>(samples.rows()), 2);
  check_envelopes(samples, envelopes);
  return vec_inf_width_from_stats(column_sum_sq_dev(samples),
                                  static_cast<std::size_t>(samples.rows()), envelopes, delta);
}

double vec_l1_width_from_stats(const Vector& sum_sq_dev, std::size_t n, const Vector& envelopes,
                               double delta) {
  check_n(n, 2);
  check_delta(delta);
  if (sum_sq_dev.size() != envelopes.size()) {
    throw std::invalid_argument("statistics and envelopes must have equal length");
  }
  const double c = log_term(30.0, delta);
  const double m = static_cast<double>(n) - 1.0;
  double width = 0.0;
  for (Eigen::Index j = 0; j < envelopes.size(); ++j) {
    check_nonneg(envelopes[j], "envelope");
    width += 2.25 * std::sqrt(2.0 * sum_sq_dev[j] * c) / m + 25.0 * envelopes[j] * c / m;
  }
  return width;
}

double vec_l1_width(const Eigen::MatrixXd& samples, const Vector& envelopes, double delta) {
  check_n(static_cast<std::size_t>(samples.rows()), 2);
  check_envelopes(samples, envelopes);
  return vec_l1_width_from_stats(column_sum_sq_dev(samples),
                                 static_cast<std::size_t>(samples.rows()), envelopes, delta);
}

double dependent_sum_bound(std::span<const SubGammaTail> tails, double delta) {
  check_delta(delta);
  const double c = log_term(6.0, delta);
  const double root = std::sqrt(c);
  double total = 0.0;
  for (const SubGammaTail& t : tails) {
    if (!(t.a >= 0.0) || !(t.b >= 0.0)) {
      throw std::invalid_argument("sub-gamma coefficients must be nonnegative");
    }
    total += t.a * root + t.b * c;
  }
  return 2.25 * total;
}

}  // namespace adaptopt
