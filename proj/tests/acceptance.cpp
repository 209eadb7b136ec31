// Acceptance checks. Usage: acceptance [criterion ...]; no arguments runs all nine.
// Prints one PASS/FAIL line per criterion; the exit status is nonzero if any failed.

#include "adaptopt/concentration.hpp"
#include "adaptopt/experiments.hpp"
#include "adaptopt/selection.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace adaptopt;
namespace fs = std::filesystem;

namespace {

// Tolerances, frozen.
constexpr double kTraceBudgetMs = 1.0;
constexpr double kCoverageBudgetSeconds = 300.0;
constexpr double kLowerboundMinRate = 0.001;
constexpr double kLowerboundBudgetSeconds = 600.0;
constexpr double kKnownRadiusConstant = 10.0;
constexpr double kRadiusFactor = 33.0;
constexpr double kSqrtSlopeLo = -0.65;
constexpr double kSqrtSlopeHi = -0.35;
constexpr double kLinearSlopeLo = -1.3;
constexpr double kLinearSlopeHi = -0.7;
constexpr double kDelta = 0.1;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome selection_trace() {
  Vector means(3);
  means << 0.43, 0.37, 0.33;
  Vector tau(3);
  tau << 0.0, 0.04, 0.30;
  LossMatrix losses(1, 3);
  losses.row(0) = means.transpose();

  std::vector<double> ms;
  SelectionOutcome reliable;
  SelectionOutcome greedy;
  for (int rep = 0; rep < 101; ++rep) {
    const auto start = std::chrono::steady_clock::now();
    reliable = reliable_select(means, tau, 3.0);
    greedy = standard_select(losses);
    ms.push_back(1e3 * seconds_since(start));
  }
  std::nth_element(ms.begin(), ms.begin() + 50, ms.end());
  const double median_ms = ms[50];
  const bool exact = reliable.theta == 0.43 && reliable.safe_set == std::vector<std::size_t>{0, 1} &&
                     reliable.chosen == 1 && greedy.chosen == 2;
  std::ostringstream d;
  d << "theta=" << format_double(reliable.theta) << " safe={";
  for (std::size_t i = 0; i < reliable.safe_set.size(); ++i) d << (i ? "," : "") << reliable.safe_set[i];
  d << "} reliable=" << reliable.chosen << " greedy=" << greedy.chosen
    << fmt(" median_ms=%.4g", median_ms);
  return {exact && median_ms < kTraceBudgetMs, d.str()};
}

Outcome coverage() {
  const auto start = std::chrono::steady_clock::now();
  ConcentrationParams p;
  p.delta = kDelta;
  const std::vector<CoverageRow> rows = run_concentration(p);
  const double elapsed = seconds_since(start);
  bool pass = elapsed <= kCoverageBudgetSeconds;
  std::ostringstream d;
  for (const CoverageRow& r : rows) {
    const double slack = kDelta + 3.0 * std::sqrt(kDelta * (1 - kDelta) / static_cast<double>(r.trials));
    const bool ok = r.trials >= 10000 && r.rate <= slack;
    pass = pass && ok;
    d << r.bound << "=" << fmt("%.4f", r.rate) << "/" << fmt("%.4f", slack) << " ";
  }
  d << fmt("seconds=%.1f", elapsed);
  return {pass, d.str()};
}

// Per-coordinate union construction: each of d coordinates at confidence delta/d with the
// same sqrt-log tail, giving d sqrt(2 ln(d/delta)).
double union_aggregate(double d, double delta) { return d * std::sqrt(2.0 * std::log(d / delta)); }

Outcome dependent_vs_union() {
  const double delta = 0.05;
  std::vector<SubGammaTail> tails(1000, SubGammaTail{1.0, 0.0});
  const double bound = dependent_sum_bound(tails, delta);
  const double closed_form = 2250.0 * std::sqrt(std::log(120.0));
  bool pass = std::abs(bound - closed_form) <= 1e-9 * closed_form;
  const double union_1000 = union_aggregate(1000, delta);
  pass = pass && bound < union_1000;
  std::ostringstream d;
  d << fmt("bound=%.2f", bound) << fmt(" union(d=1000)=%.2f", union_1000);
  double worst = 0.0;
  double worst_d = 0.0;
  for (double dim : {100.0, 300.0, 1000.0, 3000.0, 10000.0, 100000.0}) {
    const std::vector<SubGammaTail> t(static_cast<std::size_t>(dim), SubGammaTail{1.0, 0.0});
    const double ratio = dependent_sum_bound(t, delta) / union_aggregate(dim, delta);
    if (ratio > worst) {
      worst = ratio;
      worst_d = dim;
    }
    pass = pass && ratio <= 1.0;
  }
  d << fmt(" max_ratio=%.4f", worst) << fmt(" at_d=%.0f", worst_d);
  return {pass, d.str()};
}

Outcome lowerbound() {
  const auto start = std::chrono::steady_clock::now();
  LowerboundParams p;
  p.n = 3000;
  p.trials = 20000;
  p.delta = kDelta;
  const LowerboundResult r = run_lowerbound(p);
  const double elapsed = seconds_since(start);
  const bool pass = r.indicator_rate >= kLowerboundMinRate && r.reliable_mean <= r.greedy_mean &&
                    elapsed <= kLowerboundBudgetSeconds;
  return {pass, fmt("indicator_rate=%.4f", r.indicator_rate) +
                    fmt(" greedy_mean=%.5g", r.greedy_mean) +
                    fmt(" reliable_mean=%.5g", r.reliable_mean) + fmt(" seconds=%.1f", elapsed)};
}

Outcome known_radius() {
  ScalingParams p;
  p.family_params = {{"shift", "1"}};
  p.method = ScalingMethod::AdaSgd;
  p.n_grid = {250, 1000, 4000};
  p.trials = 500;
  p.delta = kDelta;
  const ScalingResult r = run_scaling(p);
  bool pass = r.d_star == 1.0;
  std::ostringstream d;
  for (const ScalingPoint& pt : r.points) {
    const double envelope =
        kKnownRadiusConstant * std::sqrt(std::log(2.0 / kDelta)) / std::sqrt(static_cast<double>(pt.n));
    pass = pass && pt.q90 <= envelope;
    d << "n=" << pt.n << fmt(" q90=%.4g", pt.q90) << fmt("/%.4g ", envelope);
  }
  return {pass, d.str()};
}

Outcome two_stage() {
  AdaptiveParams a;
  a.family_params = {{"shift", "1"}};
  a.n = 3000;
  a.trials = 500;
  a.delta = kDelta;
  a.strategy = LambdaStrategy::Exact1D;
  const AdaptiveRunResult ar = run_adaptive(a);
  std::size_t inside = 0;
  for (const AdaptiveTrial& t : ar.trials) inside += t.output_norm <= kRadiusFactor * ar.d_star ? 1 : 0;

  ScalingParams s;
  s.family_params = {{"shift", "1"}};
  s.method = ScalingMethod::TwoStage;
  s.n_grid = {250, 500, 1000, 2000, 4000};
  s.trials = 500;
  s.delta = kDelta;
  s.strategy = LambdaStrategy::Exact1D;
  const ScalingResult sr = run_scaling(s);
  const double slope = sr.fit.slope;
  const bool pass = inside == ar.trials.size() && slope >= kSqrtSlopeLo && slope <= kSqrtSlopeHi;
  return {pass, "inside=" + std::to_string(inside) + "/" + std::to_string(ar.trials.size()) +
                    fmt(" max_norm=%.4g", ar.summary.max_output_norm) + fmt(" slope=%.4f", slope)};
}

Outcome strong_convexity() {
  StrongConvexParams p;
  p.gamma = 3.0;
  p.delta = kDelta;
  const StrongConvexResult r = run_strong_convexity(p);
  const auto in = [](double s) { return s >= kLinearSlopeLo && s <= kLinearSlopeHi; };
  return {in(r.greedy_fit.slope) && in(r.reliable_fit.slope),
          fmt("greedy_slope=%.4f", r.greedy_fit.slope) +
              fmt(" reliable_slope=%.4f", r.reliable_fit.slope)};
}

Outcome geometry_selection() {
  const double floor = 1.0 - kDelta - 3.0 * std::sqrt(kDelta * (1 - kDelta) / 200.0);
  bool pass = true;
  std::ostringstream d;
  for (const char* family : {"sparse_optimum_l1_geometry", "dense_optimum_linf_geometry"}) {
    AdaptiveParams p;
    p.family = family;
    p.family_params = {{"d", "50"}};
    p.mode = AdaptiveMode::AllGeometries;
    p.n = 2000;
    p.trials = 200;
    p.delta = kDelta;
    p.gamma = 3.0;
    p.strategy = LambdaStrategy::GridSup;
    const AdaptiveRunResult r = run_adaptive(p);
    pass = pass && r.summary.key_lemma_rate >= floor;
    d << family << fmt("=%.3f ", r.summary.key_lemma_rate);
  }
  d << fmt("floor=%.4f", floor);
  return {pass, d.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Outcome reproducibility() {
  const fs::path dir = fs::temp_directory_path() / "adaptopt_acceptance_repro";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "losses.csv");
    f << "sample_id,model_0,model_1,model_2\n";
    for (int i = 0; i < 50; ++i) f << i << "," << 0.4 + 0.01 * (i % 7) << "," << 0.3 + 0.02 * (i % 5)
                                   << "," << 0.35 + 0.03 * (i % 3) << "\n";
  }
  const std::vector<std::string> commands{
      "lowerbound --trials 200 --seed 3",
      "scaling --trials 20 --set n_grid=250,500,1000 --set family.shift=1",
      "scaling --trials 10 --family dense_optimum_linf_geometry --set method=multi_geometry "
      "--set n_grid=300,600 --lambda-strategy grid_sup",
      "concentration --trials 2000",
      "select --input " + (dir / "losses.csv").string() + " --m-all 1",
      "adaptive --trials 20 --n 1000 --set family.shift=1 --lambda-strategy exact_1d",
      "adaptive --trials 10 --n 600 --p all --family sparse_optimum_l1_geometry "
      "--lambda-strategy grid_sup",
      "adaptive --trials 10 --n 600 --set mode=lambda_grid --set family.shift=1",
      "strongconvex --trials 20",
  };
  bool pass = true;
  std::ostringstream d;
  std::size_t files = 0;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    std::string outputs[2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = dir / ("run" + std::to_string(c) + "_" + std::to_string(rep) + ".csv");
      const std::string cmd = std::string(ADAPTOPT_CLI) + " " + commands[c] + " --out " +
                              out.string() + " >/dev/null 2>&1";
      if (std::system(cmd.c_str()) != 0) {
        pass = false;
        d << "failed: " << commands[c] << " ";
      }
      outputs[rep] = slurp(out) + slurp(out.string() + ".summary.csv");
    }
    files += 2;
    if (outputs[0].empty() || outputs[0] != outputs[1]) {
      pass = false;
      d << "differs: " << commands[c] << " ";
    }
  }
  fs::remove_all(dir);
  d << "commands=" << commands.size() << " reports=" << files;
  return {pass, d.str()};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {"selection_trace", selection_trace},
      {"concentration_coverage", coverage},
      {"dependent_sum_vs_union", dependent_vs_union},
      {"greedy_lower_bound", lowerbound},
      {"known_radius_rate", known_radius},
      {"two_stage_guarantees", two_stage},
      {"strong_convexity_slopes", strong_convexity},
      {"geometry_key_lemma", geometry_selection},
      {"reproducibility", reproducibility},
  };
  std::vector<int> chosen;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "acceptance: unknown criterion '%s'\n", argv[i]);
      return 2;
    }
    chosen.push_back(k);
  }
  if (chosen.empty()) {
    for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) chosen.push_back(k);
  }
  int failures = 0;
  for (int k : chosen) {
    const Criterion& c = criteria[static_cast<std::size_t>(k - 1)];
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d %s: %s %s\n", k, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
