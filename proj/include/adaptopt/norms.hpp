#pragma once

#include <Eigen/Core>

#include <string>
#include <string_view>

namespace adaptopt {

using Vector = Eigen::VectorXd;

/// The three geometries used throughout: l2, l1 and l-infinity.
enum class Norm { L2, L1, Linf };

std::string_view to_string(Norm p);
/// Accepts "2", "l2", "1", "l1", "inf", "linf". Throws std::invalid_argument otherwise.
Norm parse_norm(std::string_view text);

/// The norm whose unit ball is polar to that of `p`.
Norm dual(Norm p);

double norm(const Vector& x, Norm p);
inline double dual_norm(const Vector& x, Norm p) { return norm(x, dual(p)); }

/// Writes the minimum-norm element of the subdifferential of ||.||_p at x into g.
/// At x = 0 that element is 0; on l1 kinks zero coordinates get 0; for linf the
/// weight is shared equally among coordinates attaining the maximum.
void norm_subgradient(const Vector& x, Norm p, Vector& g);

/// Euclidean projections onto {x : ||x||_p <= radius} (radius >= 0), in place.
void project_l2_ball(Vector& x, double radius);
void project_linf_ball(Vector& x, double radius);
/// Sort-based l1-ball projection.
void project_l1_ball(Vector& x, double radius);
void project_ball(Vector& x, Norm p, double radius);

}  // namespace adaptopt
