#include "adaptopt/selection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adaptopt {

std::string_view to_string(WidthRule rule) {
  switch (rule) {
    case WidthRule::Theory: return "theory";
    case WidthRule::Practical: return "practical";
    case WidthRule::Custom: return "custom";
  }
  return "?";
}

bool SelectionOutcome::in_safe_set(std::size_t k) const {
  return std::binary_search(safe_set.begin(), safe_set.end(), k);
}

namespace {

void require_nonempty(const LossMatrix& losses) {
  if (losses.rows() == 0 || losses.cols() == 0) {
    throw std::invalid_argument("loss matrix is empty");
  }
}

std::size_t argmin_lowest(const Vector& v) {
  std::size_t best = 0;
  for (Eigen::Index k = 1; k < v.size(); ++k) {
    if (v[k] < v[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(k);
  }
  return best;
}

}  // namespace

Vector mean_losses(const LossMatrix& losses) {
  require_nonempty(losses);
  return losses.colwise().mean().transpose();
}

Vector difference_variances(const LossMatrix& losses) {
  require_nonempty(losses);
  if (losses.rows() < 2) throw std::invalid_argument("sample variances need n >= 2");
  const Eigen::MatrixXd diff = losses.colwise() - losses.col(0);
  const Eigen::RowVectorXd mean = diff.colwise().mean();
  Vector var = ((diff.rowwise() - mean).array().square().colwise().sum() /
                static_cast<double>(losses.rows() - 1))
                   .transpose();
  var[0] = 0.0;
  return var;
}

SelectionOutcome standard_select(const LossMatrix& losses) {
  SelectionOutcome out;
  out.method = SelectionMethod::Greedy;
  out.mean_losses = mean_losses(losses);
  out.chosen = argmin_lowest(out.mean_losses);
  return out;
}

ConfidenceWidths widths_theory(const LossMatrix& losses, const Vector& envelopes, double delta) {
  require_nonempty(losses);
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (envelopes.size() != losses.cols()) {
    throw std::invalid_argument("one envelope per candidate is required");
  }
  if (envelopes.size() > 0 && envelopes.minCoeff() < 0.0) {
    throw std::invalid_argument("envelopes must be nonnegative");
  }
  ConfidenceWidths w;
  w.rule = WidthRule::Theory;
  w.delta = delta;
  w.tau = Vector::Zero(losses.cols());
  const Eigen::Index k_count = losses.cols() - 1;
  if (k_count == 0) return w;

  const Vector var = difference_variances(losses);
  const double n = static_cast<double>(losses.rows());
  const double c = std::log(4.0 * static_cast<double>(k_count) / delta);
  for (Eigen::Index k = 1; k <= k_count; ++k) {
    w.tau[k] = std::sqrt(2.0 * c * var[k] / n) + c * 14.0 * envelopes[k] / (3.0 * (n - 1.0));
  }
  return w;
}

ConfidenceWidths widths_theory(const LossMatrix& losses, double lipschitz_hat,
                               const Vector& x_norms, double delta) {
  if (!(lipschitz_hat >= 0.0)) throw std::invalid_argument("Lipschitz estimate must be >= 0");
  return widths_theory(losses, Vector(lipschitz_hat * x_norms), delta);
}

ConfidenceWidths widths_practical(const LossMatrix& losses, const Vector& m_values) {
  require_nonempty(losses);
  if (m_values.size() != losses.cols()) {
    throw std::invalid_argument("one M value per candidate is required");
  }
  if (m_values.minCoeff() < 0.0) throw std::invalid_argument("M values must be nonnegative");
  const Vector var = difference_variances(losses);
  const double n = static_cast<double>(losses.rows());
  ConfidenceWidths w;
  w.rule = WidthRule::Practical;
  w.tau = Vector::Zero(losses.cols());
  for (Eigen::Index k = 1; k < losses.cols(); ++k) {
    w.tau[k] = std::sqrt(var[k]) / (2.0 * std::sqrt(n)) + m_values[k] / (2.0 * n);
  }
  return w;
}

ConfidenceWidths widths_custom(Vector tau) {
  if (tau.size() == 0 || tau[0] != 0.0) throw std::invalid_argument("tau[0] must be exactly 0");
  if (tau.minCoeff() < 0.0) throw std::invalid_argument("widths must be nonnegative");
  ConfidenceWidths w;
  w.rule = WidthRule::Custom;
  w.tau = std::move(tau);
  return w;
}

SelectionOutcome reliable_select(const Vector& means, const Vector& tau, double gamma) {
  if (!(gamma >= 1.0)) throw std::invalid_argument("gamma must be >= 1");
  if (means.size() == 0) throw std::invalid_argument("no candidates");
  if (tau.size() != means.size()) throw std::invalid_argument("one width per candidate is required");
  if (tau[0] != 0.0) throw std::invalid_argument("tau[0] must be exactly 0");
  if (tau.minCoeff() < 0.0) throw std::invalid_argument("widths must be nonnegative");

  SelectionOutcome out;
  out.method = SelectionMethod::Reliable;
  out.gamma = gamma;
  out.mean_losses = means;
  out.tau = tau;
  out.theta = (means + gamma * tau).minCoeff();
  for (Eigen::Index k = 0; k < means.size(); ++k) {
    if (means[k] + tau[k] <= out.theta) out.safe_set.push_back(static_cast<std::size_t>(k));
  }
  // Nonempty: the theta-attaining index satisfies F + tau <= F + gamma tau.
  out.chosen = out.safe_set.front();
  for (std::size_t k : out.safe_set) {
    if (means[static_cast<Eigen::Index>(k)] < means[static_cast<Eigen::Index>(out.chosen)]) {
      out.chosen = k;
    }
  }
  return out;
}

SelectionOutcome reliable_select(const LossMatrix& losses, const ConfidenceWidths& widths,
                                 double gamma) {
  return reliable_select(mean_losses(losses), widths.tau, gamma);
}

}  // namespace adaptopt
