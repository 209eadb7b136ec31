#include "adaptopt/families.hpp"

#include "adaptopt/rng.hpp"

#include <algorithm>
#include <charconv>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

namespace adaptopt {

namespace {

double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// ---------------------------------------------------------------------------
// Aggregated empirical risks. Both families only depend on the samples through
// a low-dimensional mean, so the ERM solvers run in O(d) per evaluation.

class AbsLinearRisk final : public EmpiricalRisk {
 public:
  AbsLinearRisk(double shift, double success_fraction)
      : shift_(shift), p_hat_(success_fraction) {}

  int dimension() const override { return 1; }
  double value(const Vector& x) const override {
    const double v = x[0] - shift_;
    return (1.0 - p_hat_) * std::abs(v) - p_hat_ * v;
  }
  void subgradient(const Vector& x, Vector& g) const override {
    g.resize(1);
    g[0] = (1.0 - p_hat_) * sign0(x[0] - shift_) - p_hat_;
  }

 private:
  double shift_;
  double p_hat_;
};

class SeparableSharpRisk final : public EmpiricalRisk {
 public:
  SeparableSharpRisk(Vector optimum, Vector scales, Vector mean_noise)
      : optimum_(std::move(optimum)), scales_(std::move(scales)), xi_bar_(std::move(mean_noise)) {}

  int dimension() const override { return static_cast<int>(optimum_.size()); }
  double value(const Vector& x) const override {
    const Vector v = x - optimum_;
    return (scales_.array() * (v.array().abs() + xi_bar_.array() * v.array())).sum();
  }
  void subgradient(const Vector& x, Vector& g) const override {
    g.resize(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      g[j] = scales_[j] * (sign0(x[j] - optimum_[j]) + xi_bar_[j]);
    }
  }

 private:
  Vector optimum_;
  Vector scales_;
  Vector xi_bar_;
};

// ---------------------------------------------------------------------------
// Parameter parsing

double parse_double(std::string_view key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("parameter '" + std::string(key) + "': cannot parse '" + text +
                                "' as a number");
  }
}

class Params {
 public:
  Params(std::string_view family, const ParamMap& map, std::set<std::string, std::less<>> known)
      : family_(family), map_(map) {
    for (const auto& [key, value] : map_) {
      if (!known.contains(key)) {
        throw std::invalid_argument("family '" + std::string(family) + "' has no parameter '" +
                                    key + "'");
      }
    }
  }

  double number(std::string_view key, double fallback) const {
    const auto it = map_.find(key);
    return it == map_.end() ? fallback : parse_double(key, it->second);
  }

  std::size_t count(std::string_view key, std::size_t fallback) const {
    const double v = number(key, static_cast<double>(fallback));
    if (v < 1.0 || v != std::floor(v)) {
      throw std::invalid_argument("parameter '" + std::string(key) + "' must be a positive integer");
    }
    return static_cast<std::size_t>(v);
  }

  /// A comma list of d numbers, or a single number v meaning v * e_1.
  std::optional<Vector> vector(std::string_view key, std::size_t d) const {
    const auto it = map_.find(key);
    if (it == map_.end()) return std::nullopt;
    std::vector<double> values;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) values.push_back(parse_double(key, item));
    Vector out = Vector::Zero(static_cast<Eigen::Index>(d));
    if (values.size() == 1) {
      out[0] = values[0];
    } else if (values.size() == d) {
      for (std::size_t j = 0; j < d; ++j) out[static_cast<Eigen::Index>(j)] = values[j];
    } else {
      throw std::invalid_argument("parameter '" + std::string(key) + "' needs 1 or " +
                                  std::to_string(d) + " values");
    }
    return out;
  }

 private:
  std::string_view family_;
  const ParamMap& map_;
};

}  // namespace

// ---------------------------------------------------------------------------
// AbsLinearAdversarial

AbsLinearAdversarial::AbsLinearAdversarial(std::size_t n_design, double shift)
    : n_design_(n_design),
      shift_(shift),
      q_(0.5 - 1.0 / (16.0 * std::sqrt(static_cast<double>(n_design)))) {
  if (n_design == 0) throw std::invalid_argument("abs_linear_adversarial: n must be >= 1");
}

Sample AbsLinearAdversarial::draw(std::uint64_t seed, std::uint64_t id) const {
  CounterRng rng(seed, id);
  Sample s;
  s.id = id;
  s.label = rng.bernoulli(q_) ? 1 : 0;
  return s;
}

double AbsLinearAdversarial::loss(const Vector& x, const Sample& s) const {
  const double v = x[0] - shift_;
  return s.label == 0 ? std::abs(v) : -v;
}

void AbsLinearAdversarial::subgradient(const Vector& x, const Sample& s, Vector& g) const {
  g.resize(1);
  g[0] = s.label == 0 ? sign0(x[0] - shift_) : -1.0;
}

std::optional<std::vector<double>> AbsLinearAdversarial::breakpoints(const Sample& s) const {
  if (s.label == 0) return std::vector<double>{shift_};
  return std::vector<double>{};
}

std::unique_ptr<EmpiricalRisk> AbsLinearAdversarial::empirical_risk(
    std::span<const Sample> samples) const {
  std::size_t ones = 0;
  for (const Sample& s : samples) ones += s.label == 1 ? 1 : 0;
  const double p_hat =
      samples.empty() ? 0.0 : static_cast<double>(ones) / static_cast<double>(samples.size());
  return std::make_unique<AbsLinearRisk>(shift_, p_hat);
}

double AbsLinearAdversarial::pop_loss(const Vector& x) const {
  const double v = x[0] - shift_;
  return (1.0 - q_) * std::abs(v) - q_ * v;
}

// ---------------------------------------------------------------------------
// StronglyConvex1D

StronglyConvex1D::StronglyConvex1D(double mu, double optimum, double noise, double radius)
    : mu_(mu), optimum_(optimum), noise_(noise), radius_(radius) {
  if (!(mu > 0.0)) throw std::invalid_argument("strongly_convex_1d: mu must be positive");
  if (noise < 0.0) throw std::invalid_argument("strongly_convex_1d: noise must be nonnegative");
  if (std::abs(optimum) > radius) {
    throw std::invalid_argument("strongly_convex_1d: optimum must lie in [-radius, radius]");
  }
}

Sample StronglyConvex1D::draw(std::uint64_t seed, std::uint64_t id) const {
  CounterRng rng(seed, id);
  Sample s;
  s.id = id;
  s.value = rng.uniform(-1.0, 1.0);
  return s;
}

double StronglyConvex1D::loss(const Vector& x, const Sample& s) const {
  const double r = x[0] - optimum_ - noise_ * s.value;
  return 0.5 * mu_ * r * r;
}

void StronglyConvex1D::subgradient(const Vector& x, const Sample& s, Vector& g) const {
  g.resize(1);
  g[0] = mu_ * (x[0] - optimum_ - noise_ * s.value);
}

std::optional<double> StronglyConvex1D::lipschitz_l2() const {
  return mu_ * (radius_ + std::abs(optimum_) + noise_);
}

std::optional<Vector> StronglyConvex1D::lipschitz_coord() const {
  return Vector::Constant(1, *lipschitz_l2());
}

double StronglyConvex1D::pop_loss(const Vector& x) const {
  const double r = x[0] - optimum_;
  return 0.5 * mu_ * r * r + f_star();
}

double StronglyConvex1D::f_star() const { return mu_ * noise_ * noise_ / 6.0; }

// ---------------------------------------------------------------------------
// EuclideanHingeLike

EuclideanHingeLike::EuclideanHingeLike(Vector optimum) : optimum_(std::move(optimum)) {
  if (optimum_.size() < 1) throw std::invalid_argument("euclidean_hinge_like: d must be >= 1");
  const double d = static_cast<double>(optimum_.size());
  c_d_ = std::exp(std::lgamma(d / 2.0) - std::lgamma((d + 1.0) / 2.0)) / std::sqrt(std::numbers::pi);
}

Sample EuclideanHingeLike::draw(std::uint64_t seed, std::uint64_t id) const {
  CounterRng rng(seed, id);
  Sample s;
  s.id = id;
  s.features.resize(optimum_.size());
  double nrm = 0.0;
  while (nrm == 0.0) {
    for (Eigen::Index j = 0; j < s.features.size(); ++j) s.features[j] = rng.normal();
    nrm = s.features.norm();
  }
  s.features /= nrm;
  return s;
}

double EuclideanHingeLike::loss(const Vector& x, const Sample& s) const {
  return std::abs(s.features.dot(x - optimum_));
}

void EuclideanHingeLike::subgradient(const Vector& x, const Sample& s, Vector& g) const {
  g = sign0(s.features.dot(x - optimum_)) * s.features;
}

double EuclideanHingeLike::pop_loss(const Vector& x) const { return c_d_ * (x - optimum_).norm(); }

// ---------------------------------------------------------------------------
// SeparableSharpFamily

SeparableSharpFamily::SeparableSharpFamily(std::string name, Vector optimum, Vector scales,
                                           double noise)
    : name_(std::move(name)), optimum_(std::move(optimum)), scales_(std::move(scales)), noise_(noise) {
  if (optimum_.size() < 1 || optimum_.size() != scales_.size()) {
    throw std::invalid_argument(name_ + ": optimum and scales must have equal positive length");
  }
  if (scales_.minCoeff() < 0.0) throw std::invalid_argument(name_ + ": scales must be nonnegative");
  if (noise < 0.0 || noise >= 1.0) throw std::invalid_argument(name_ + ": noise must be in [0, 1)");
}

Sample SeparableSharpFamily::draw(std::uint64_t seed, std::uint64_t id) const {
  CounterRng rng(seed, id);
  Sample s;
  s.id = id;
  s.features.resize(optimum_.size());
  for (Eigen::Index j = 0; j < s.features.size(); ++j) s.features[j] = noise_ * rng.rademacher();
  return s;
}

double SeparableSharpFamily::loss(const Vector& x, const Sample& s) const {
  const Vector v = x - optimum_;
  return (scales_.array() * (v.array().abs() + s.features.array() * v.array())).sum();
}

void SeparableSharpFamily::subgradient(const Vector& x, const Sample& s, Vector& g) const {
  g.resize(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    g[j] = scales_[j] * (sign0(x[j] - optimum_[j]) + s.features[j]);
  }
}

std::optional<double> SeparableSharpFamily::lipschitz_l2() const {
  return (1.0 + noise_) * scales_.norm();
}

std::optional<Vector> SeparableSharpFamily::lipschitz_coord() const {
  return Vector((1.0 + noise_) * scales_);
}

std::unique_ptr<EmpiricalRisk> SeparableSharpFamily::empirical_risk(
    std::span<const Sample> samples) const {
  Vector xi_bar = Vector::Zero(optimum_.size());
  for (const Sample& s : samples) xi_bar += s.features;
  if (!samples.empty()) xi_bar /= static_cast<double>(samples.size());
  return std::make_unique<SeparableSharpRisk>(optimum_, scales_, std::move(xi_bar));
}

double SeparableSharpFamily::pop_loss(const Vector& x) const {
  return (scales_.array() * (x - optimum_).array().abs()).sum();
}

// ---------------------------------------------------------------------------
// MulticlassLogistic

MulticlassLogistic::MulticlassLogistic(int classes, int features, double teacher_scale)
    : classes_(classes), features_(features), teacher_scale_(teacher_scale) {
  if (classes < 2 || features < 1) {
    throw std::invalid_argument("multiclass_logistic: need classes >= 2 and features >= 1");
  }
}

Sample MulticlassLogistic::draw(std::uint64_t seed, std::uint64_t id) const {
  CounterRng rng(seed, id);
  Sample s;
  s.id = id;
  s.features.resize(features_);
  double nrm = 0.0;
  while (nrm == 0.0) {
    for (int j = 0; j < features_; ++j) s.features[j] = rng.normal();
    nrm = s.features.norm();
  }
  s.features /= nrm;
  // Teacher scores: class c looks at feature c mod m.
  Vector scores(classes_);
  for (int c = 0; c < classes_; ++c) scores[c] = teacher_scale_ * s.features[c % features_];
  const Vector p = (scores.array() - scores.maxCoeff()).exp();
  const double u = rng.uniform() * p.sum();
  double cumulative = 0.0;
  s.label = classes_ - 1;
  for (int c = 0; c < classes_; ++c) {
    cumulative += p[c];
    if (u < cumulative) {
      s.label = c;
      break;
    }
  }
  return s;
}

double MulticlassLogistic::loss(const Vector& x, const Sample& s) const {
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      weights(x.data(), classes_, features_);
  const Vector z = weights * s.features;
  const double zmax = z.maxCoeff();
  return zmax + std::log((z.array() - zmax).exp().sum()) - z[s.label];
}

void MulticlassLogistic::subgradient(const Vector& x, const Sample& s, Vector& g) const {
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      weights(x.data(), classes_, features_);
  const Vector z = weights * s.features;
  Vector p = (z.array() - z.maxCoeff()).exp();
  p /= p.sum();
  p[s.label] -= 1.0;
  g.resize(dimension());
  for (int c = 0; c < classes_; ++c) {
    g.segment(c * features_, features_) = p[c] * s.features;
  }
}

double logistic_width_helper(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x0) {
  if (x.rows() != x0.rows() || x.cols() != x0.cols()) {
    throw std::invalid_argument("logistic_width_helper: shape mismatch");
  }
  if (x.size() == 0) return 0.0;
  return 2.0 * (x - x0).rowwise().norm().maxCoeff();
}

// ---------------------------------------------------------------------------

std::shared_ptr<const StochasticProblem> make_family(std::string_view name, const ParamMap& params) {
  if (name == "abs_linear_adversarial") {
    const Params p(name, params, {"n", "shift"});
    return std::make_shared<AbsLinearAdversarial>(p.count("n", 3000), p.number("shift", 0.0));
  }
  if (name == "strongly_convex_1d") {
    const Params p(name, params, {"mu", "optimum", "noise", "radius"});
    return std::make_shared<StronglyConvex1D>(p.number("mu", 1.0), p.number("optimum", 1.0),
                                              p.number("noise", 1.0), p.number("radius", 4.0));
  }
  if (name == "euclidean_hinge_like") {
    const Params p(name, params, {"d", "optimum"});
    const std::size_t d = p.count("d", 10);
    Vector optimum = p.vector("optimum", d).value_or(Vector::Unit(static_cast<Eigen::Index>(d), 0));
    return std::make_shared<EuclideanHingeLike>(std::move(optimum));
  }
  if (name == "sparse_optimum_l1_geometry") {
    const Params p(name, params, {"d", "noise", "scale", "optimum"});
    const std::size_t d = p.count("d", 50);
    const auto dim = static_cast<Eigen::Index>(d);
    Vector optimum = p.vector("optimum", d).value_or(Vector::Unit(dim, 0));
    return std::make_shared<SeparableSharpFamily>(std::string(name), std::move(optimum),
                                                  Vector::Constant(dim, p.number("scale", 1.0)),
                                                  p.number("noise", 0.5));
  }
  if (name == "dense_optimum_linf_geometry") {
    const Params p(name, params, {"d", "noise", "decay", "optimum"});
    const std::size_t d = p.count("d", 50);
    const auto dim = static_cast<Eigen::Index>(d);
    const double decay = p.number("decay", 1.0);
    Vector scales(dim);
    for (Eigen::Index j = 0; j < dim; ++j) scales[j] = std::pow(static_cast<double>(j + 1), -decay);
    Vector optimum = Vector::Ones(dim);
    if (auto given = p.vector("optimum", d)) optimum = *given;
    return std::make_shared<SeparableSharpFamily>(std::string(name), std::move(optimum),
                                                  std::move(scales), p.number("noise", 0.5));
  }
  if (name == "multiclass_logistic") {
    const Params p(name, params, {"classes", "features", "teacher_scale"});
    return std::make_shared<MulticlassLogistic>(static_cast<int>(p.count("classes", 3)),
                                                static_cast<int>(p.count("features", 4)),
                                                p.number("teacher_scale", 2.0));
  }
  throw std::invalid_argument("unknown family '" + std::string(name) + "'");
}

}  // namespace adaptopt
