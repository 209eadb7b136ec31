#pragma once

#include "adaptopt/norms.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <string_view>
#include <vector>

namespace adaptopt {

/// n x (K+1) validation losses; entry (i, k) = f_i(x_k). Column 0 is the reference x_0.
using LossMatrix = Eigen::MatrixXd;

enum class WidthRule { Theory, Practical, Custom };
std::string_view to_string(WidthRule rule);

struct ConfidenceWidths {
  Vector tau;  // tau[0] == 0
  WidthRule rule = WidthRule::Custom;
  double delta = 0.0;  // Theory only
};

enum class SelectionMethod { Greedy, Reliable };

struct SelectionOutcome {
  std::size_t chosen = 0;
  SelectionMethod method = SelectionMethod::Greedy;
  double theta = 0.0;                  // reliable only
  double gamma = 0.0;                  // reliable only
  std::vector<std::size_t> safe_set;   // reliable only, ascending
  Vector mean_losses;
  Vector tau;                          // empty for greedy

  bool in_safe_set(std::size_t k) const;
};

/// Column means F_k.
Vector mean_losses(const LossMatrix& losses);
/// Unbiased variance of f_i(x_k) - f_i(x_0) per column (entry 0 is 0). Needs n >= 2.
Vector difference_variances(const LossMatrix& losses);

/// argmin_k F_k, lowest index on ties. Throws std::invalid_argument on an empty matrix.
SelectionOutcome standard_select(const LossMatrix& losses);

/// tau_k = sqrt(2 c s_k^2 / n) + c 14 M_k / (3(n-1)), c = ln(4K/delta), where s_k^2 is the
/// variance of the differences to column 0 and M_k bounds |f(x_k; S) - f(x_0; S)|.
/// With K = 0 only tau_0 = 0 is returned.
ConfidenceWidths widths_theory(const LossMatrix& losses, const Vector& envelopes, double delta);
/// Envelope M_k = L_hat * x_norms[k].
ConfidenceWidths widths_theory(const LossMatrix& losses, double lipschitz_hat,
                               const Vector& x_norms, double delta);

/// tau_k = s_k / (2 sqrt(n)) + M_k / (2n). Throws on negative M.
ConfidenceWidths widths_practical(const LossMatrix& losses, const Vector& m_values);

/// Wraps user-supplied widths, checking tau[0] == 0 and tau >= 0.
ConfidenceWidths widths_custom(Vector tau);

/// Reliable model selection:
///   theta = min_k F_k + gamma tau_k,  safe = {k : F_k + tau_k <= theta},  chosen = argmin_safe F_k.
/// Throws std::invalid_argument for gamma < 1, tau[0] != 0, negative tau or size mismatch.
SelectionOutcome reliable_select(const Vector& means, const Vector& tau, double gamma);
SelectionOutcome reliable_select(const LossMatrix& losses, const ConfidenceWidths& widths,
                                 double gamma);

}  // namespace adaptopt
