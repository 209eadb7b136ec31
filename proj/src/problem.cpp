#include "adaptopt/problem.hpp"

#include <algorithm>
#include <cmath>

namespace adaptopt {

void Domain::project(Vector& x) const {
  switch (kind) {
    case Kind::Unconstrained: return;
    case Kind::Ball: project_ball(x, norm, radius); return;
    case Kind::NonNegative: x = x.cwiseMax(0.0); return;
  }
}

bool Domain::contains(const Vector& x, double tol) const {
  switch (kind) {
    case Kind::Unconstrained: return true;
    case Kind::Ball: return adaptopt::norm(x, norm) <= radius + tol;
    case Kind::NonNegative: return x.size() == 0 || x.minCoeff() >= -tol;
  }
  return false;
}

void project_feasible(Vector& x, const Domain& domain, Norm p, double radius) {
  switch (domain.kind) {
    case Domain::Kind::Unconstrained:
      project_ball(x, p, radius);
      return;
    case Domain::Kind::NonNegative:
      // The cone and the centered ball commute under projection.
      x = x.cwiseMax(0.0);
      project_ball(x, p, radius);
      return;
    case Domain::Kind::Ball:
      if (domain.norm == p || x.size() == 1) {
        project_ball(x, p, std::min(radius, domain.radius));
        return;
      }
      throw std::invalid_argument("projection onto a " + std::string(to_string(p)) +
                                  " ball intersected with a " +
                                  std::string(to_string(domain.norm)) +
                                  " domain ball is not supported");
  }
}

namespace {

class SampleAverageRisk final : public EmpiricalRisk {
 public:
  SampleAverageRisk(const StochasticProblem& problem, std::span<const Sample> samples)
      : problem_(problem), samples_(samples) {}

  int dimension() const override { return problem_.dimension(); }

  double value(const Vector& x) const override { return empirical_loss(problem_, samples_, x); }

  void subgradient(const Vector& x, Vector& g) const override {
    g.setZero(problem_.dimension());
    Vector gi(problem_.dimension());
    for (const Sample& s : samples_) {
      problem_.subgradient(x, s, gi);
      g += gi;
    }
    if (!samples_.empty()) g /= static_cast<double>(samples_.size());
  }

 private:
  const StochasticProblem& problem_;
  std::span<const Sample> samples_;
};

}  // namespace

std::unique_ptr<EmpiricalRisk> StochasticProblem::empirical_risk(
    std::span<const Sample> samples) const {
  return std::make_unique<SampleAverageRisk>(*this, samples);
}

std::vector<Sample> sample_batch(const StochasticProblem& problem, std::size_t n,
                                 std::uint64_t seed, std::uint64_t first_id) {
  std::vector<Sample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(problem.draw(seed, first_id + i));
  return out;
}

double population_suboptimality(const StochasticProblem& problem, const Vector& x) {
  const PopulationOracle* oracle = problem.population();
  if (oracle == nullptr) {
    throw OracleUnavailable("family '" + problem.name() + "' has no population oracle");
  }
  return std::max(0.0, oracle->pop_loss(x) - oracle->f_star());
}

double empirical_loss(const StochasticProblem& problem, std::span<const Sample> samples,
                      const Vector& x) {
  if (samples.empty()) return 0.0;
  double total = 0.0;
  for (const Sample& s : samples) total += problem.loss(x, s);
  return total / static_cast<double>(samples.size());
}

}  // namespace adaptopt
