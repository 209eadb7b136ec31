#include "adaptopt/norms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace adaptopt {

std::string_view to_string(Norm p) {
  switch (p) {
    case Norm::L2: return "l2";
    case Norm::L1: return "l1";
    case Norm::Linf: return "linf";
  }
  return "?";
}

Norm parse_norm(std::string_view text) {
  if (text == "2" || text == "l2") return Norm::L2;
  if (text == "1" || text == "l1") return Norm::L1;
  if (text == "inf" || text == "linf") return Norm::Linf;
  throw std::invalid_argument("unknown norm '" + std::string(text) + "'");
}

Norm dual(Norm p) {
  switch (p) {
    case Norm::L2: return Norm::L2;
    case Norm::L1: return Norm::Linf;
    case Norm::Linf: return Norm::L1;
  }
  return Norm::L2;
}

double norm(const Vector& x, Norm p) {
  if (x.size() == 0) return 0.0;
  switch (p) {
    case Norm::L2: return x.norm();
    case Norm::L1: return x.lpNorm<1>();
    case Norm::Linf: return x.lpNorm<Eigen::Infinity>();
  }
  return 0.0;
}

void norm_subgradient(const Vector& x, Norm p, Vector& g) {
  g.setZero(x.size());
  switch (p) {
    case Norm::L2: {
      const double nx = x.norm();
      if (nx > 0.0) g = x / nx;
      return;
    }
    case Norm::L1:
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        g[j] = x[j] > 0.0 ? 1.0 : (x[j] < 0.0 ? -1.0 : 0.0);
      }
      return;
    case Norm::Linf: {
      const double m = x.lpNorm<Eigen::Infinity>();
      if (m == 0.0) return;
      int count = 0;
      for (Eigen::Index j = 0; j < x.size(); ++j) count += std::abs(x[j]) == m ? 1 : 0;
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        if (std::abs(x[j]) == m) g[j] = (x[j] > 0.0 ? 1.0 : -1.0) / count;
      }
      return;
    }
  }
}

void project_l2_ball(Vector& x, double radius) {
  const double nx = x.norm();
  if (nx > radius) {
    if (radius <= 0.0) {
      x.setZero();
    } else {
      x *= radius / nx;
    }
  }
}

void project_linf_ball(Vector& x, double radius) {
  x = x.cwiseMax(-radius).cwiseMin(radius);
}

void project_l1_ball(Vector& x, double radius) {
  if (x.lpNorm<1>() <= radius) return;
  if (radius <= 0.0) {
    x.setZero();
    return;
  }
  std::vector<double> mags(static_cast<std::size_t>(x.size()));
  for (Eigen::Index j = 0; j < x.size(); ++j) mags[static_cast<std::size_t>(j)] = std::abs(x[j]);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (std::size_t k = 0; k < mags.size(); ++k) {
    cumulative += mags[k];
    const double candidate = (cumulative - radius) / static_cast<double>(k + 1);
    if (mags[k] > candidate) threshold = candidate;
  }
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double shrunk = std::max(std::abs(x[j]) - threshold, 0.0);
    x[j] = x[j] >= 0.0 ? shrunk : -shrunk;
  }
}

void project_ball(Vector& x, Norm p, double radius) {
  switch (p) {
    case Norm::L2: project_l2_ball(x, radius); return;
    case Norm::L1: project_l1_ball(x, radius); return;
    case Norm::Linf: project_linf_ball(x, radius); return;
  }
}

}  // namespace adaptopt
