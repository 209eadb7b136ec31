#pragma once

#include "adaptopt/adaptive.hpp"
#include "adaptopt/families.hpp"
#include "adaptopt/report.hpp"
#include "adaptopt/selection.hpp"
#include "adaptopt/stats.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace adaptopt {

// Every runner is a pure function of its parameters: trial t of a run with seed s
// draws from the stream derive_key(s, t) (scaling runs key by n first), so reports
// are identical for any thread count.

// ---------------------------------------------------------------------------
// lowerbound

struct LowerboundParams {
  std::size_t n = 3000;
  std::size_t trials = 20000;
  std::uint64_t seed = 1;
  double delta = 0.1;
  double gamma = 3.0;
  int rate_min_exp = 0;
  int rate_max_exp = 6;
  std::size_t threads = 0;
};

struct LowerboundTrial {
  std::size_t greedy = 0;    // index into the rate grid
  std::size_t reliable = 0;  // 0 is the origin, k >= 1 is rate k-1
  double greedy_suboptimality = 0.0;
  double reliable_suboptimality = 0.0;
  bool indicator = false;
};

struct LowerboundResult {
  LowerboundParams params;
  std::vector<double> rates;
  double threshold = 0.0;  // eta_max / (288 sqrt n)
  std::vector<LowerboundTrial> trials;
  double indicator_rate = 0.0;
  double greedy_mean = 0.0;
  double reliable_mean = 0.0;
};

/// Adversarial instance (shift 0): AdaSGD at radii e^k on n training samples, then
/// greedy selection over the AdaSGD outputs and reliable selection over the origin
/// plus the outputs on n validation samples. Rejects n < 3000.
LowerboundResult run_lowerbound(const LowerboundParams& params);

// ---------------------------------------------------------------------------
// scaling

enum class ScalingMethod { AdaSgd, AdaEmd, AdaGrad, TwoStage, LambdaGrid, MultiGeometry };
ScalingMethod parse_scaling_method(std::string_view text);
std::string_view to_string(ScalingMethod m);

struct ScalingParams {
  std::string family = "abs_linear_adversarial";
  ParamMap family_params;
  bool tie_design_n = true;  // abs_linear_adversarial: family n follows the sample n
  ScalingMethod method = ScalingMethod::AdaSgd;
  Norm p = Norm::L2;
  std::vector<std::size_t> n_grid{250, 500, 1000, 2000, 4000};
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  double delta = 0.1;
  double gamma = 3.0;
  double radius = 0.0;  // known-radius methods; 0 means D*
  LambdaStrategy strategy = LambdaStrategy::Envelope;
  double grid_radius = 2.0;
  bool lipschitz_inflation = false;  // L_hat = L sqrt(n / ln(1/delta))
  std::size_t threads = 0;
};

struct ScalingTrial {
  std::size_t n = 0;
  std::size_t trial = 0;
  double suboptimality = 0.0;
  double output_norm = 0.0;
  double radius = 0.0;
  double lambda = 0.0;
  bool erm_flagged = false;
};

struct ScalingPoint {
  std::size_t n = 0;
  double median = 0.0;
  double mean = 0.0;
  double q10 = 0.0;
  double q90 = 0.0;
  double max_output_norm = 0.0;
};

struct ScalingResult {
  ScalingParams params;
  double d_star = 0.0;
  std::vector<ScalingTrial> trials;
  std::vector<ScalingPoint> points;
  LineFit fit;  // log median suboptimality against log n
};

ScalingResult run_scaling(const ScalingParams& params);

// ---------------------------------------------------------------------------
// adaptive

enum class AdaptiveMode { TwoStage, LambdaGrid, AllGeometries };

struct AdaptiveParams {
  std::string family = "abs_linear_adversarial";
  ParamMap family_params;
  bool tie_design_n = true;
  AdaptiveMode mode = AdaptiveMode::TwoStage;
  Norm p = Norm::L2;
  std::size_t n = 3000;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  double delta = 0.1;
  double gamma = 3.0;
  LambdaStrategy strategy = LambdaStrategy::Envelope;
  double grid_radius = 2.0;
  std::size_t threads = 0;
};

struct AdaptiveTrial {
  double suboptimality = 0.0;  // of the returned point
  double output_norm = 0.0;    // in the geometry's norm (l2 for all-geometries)
  double radius = 0.0;
  double lambda = 0.0;
  double erm_residual = 0.0;
  bool erm_flagged = false;
  std::size_t chosen = 0;
  // Candidates (grid members or the l2, l1, linf branches); empty for two-stage.
  std::vector<double> candidate_suboptimality;
  std::vector<double> candidate_tau;
  std::vector<double> candidate_lambda;
  std::vector<double> candidate_radius;
  std::size_t best = 0;        // index of the candidate with least suboptimality
  bool key_lemma_ok = true;    // selected <= best + (1 + gamma) tau_best
};

struct AdaptiveSummary {
  double median = 0.0;
  double mean = 0.0;
  double q90 = 0.0;
  double max_output_norm = 0.0;
  double radius_bound_rate = 0.0;  // fraction with ||output|| <= 33 D*
  double key_lemma_rate = 0.0;
  std::vector<double> best_rate;   // per candidate
  double oracle_best_mean = 0.0;   // mean of the best candidate's suboptimality
};

struct AdaptiveRunResult {
  AdaptiveParams params;
  double d_star = 0.0;
  std::size_t candidate_count = 0;
  std::vector<AdaptiveTrial> trials;
  AdaptiveSummary summary;
};

AdaptiveRunResult run_adaptive(const AdaptiveParams& params);

// ---------------------------------------------------------------------------
// strong convexity

struct StrongConvexParams {
  ParamMap family_params{{"mu", "1"}, {"optimum", "1"}, {"noise", "0.5"}, {"radius", "1.5"}};
  std::vector<std::size_t> n_grid{200, 800, 3200, 12800};
  std::vector<double> mu_exps{-2, -1, 0, 1, 2};
  std::size_t trials = 200;
  std::uint64_t seed = 1;
  double delta = 0.1;
  double gamma = 3.0;
  std::size_t threads = 0;
};

struct StrongConvexTrial {
  std::size_t n = 0;
  std::size_t trial = 0;
  std::size_t greedy = 0;
  std::size_t reliable = 0;
  double greedy_suboptimality = 0.0;
  double reliable_suboptimality = 0.0;
};

struct StrongConvexPoint {
  std::size_t n = 0;
  double greedy_median = 0.0;
  double reliable_median = 0.0;
  double greedy_mean = 0.0;
  double reliable_mean = 0.0;
};

struct StrongConvexResult {
  StrongConvexParams params;
  std::vector<StrongConvexTrial> trials;
  std::vector<StrongConvexPoint> points;
  LineFit greedy_fit;
  LineFit reliable_fit;
};

/// Candidates are the origin and projected SGD with step 1/(mu_k t) for mu_k = e^{mu_exps};
/// each trial trains on n samples and validates on n more. Reliable widths use the
/// family's Lipschitz constant.
StrongConvexResult run_strong_convexity(const StrongConvexParams& params);

// ---------------------------------------------------------------------------
// concentration

struct CoverageRow {
  std::string bound;
  std::size_t n = 0;
  std::size_t d = 0;
  double delta = 0.0;
  std::size_t trials = 0;
  std::size_t violations = 0;
  double rate = 0.0;
  double threshold = 0.0;  // delta + 3 sqrt(delta (1 - delta) / trials)
  bool pass = false;
};

inline const std::vector<std::string> kCoverageBounds{
    "hoeffding", "empirical_bennett", "vec_l2", "vec_inf", "vec_l1", "dependent_sum"};

struct ConcentrationParams {
  std::vector<std::string> bounds = kCoverageBounds;
  std::uint64_t seed = 1;
  double delta = 0.1;
  std::size_t trials = 0;  // 0: per-bound defaults (1e5 scalar, 1e4 vector)
  std::size_t threads = 0;
};

/// Monte-Carlo coverage of one bound:
///   hoeffding          Bernoulli(1/2), n = 100, two-sided
///   empirical_bennett  Uniform[0, 1], n = 200, two-sided
///   vec_l2             uniform on the unit sphere of R^5, n = 200, C = 1
///   vec_inf, vec_l1    Rademacher coordinates in R^10, n = 200, C_j = 1
///   dependent_sum      X_j = |Z| / sqrt 2 with one shared standard normal Z, d = 10, a_j = 1
CoverageRow run_coverage(const std::string& bound, std::uint64_t seed, double delta,
                         std::size_t trials, std::size_t threads = 0);
std::vector<CoverageRow> run_concentration(const ConcentrationParams& params);

// ---------------------------------------------------------------------------
// select

/// Reads `sample_id,model_0,...,model_K`. Throws std::invalid_argument on malformed input.
LossMatrix read_loss_matrix_csv(std::istream& in);
/// One width per line, either `tau` or `k,tau`; an optional header line is skipped.
Vector read_tau_csv(std::istream& in);

struct SelectResult {
  SelectionOutcome greedy;
  SelectionOutcome reliable;
  ConfidenceWidths widths;
};

SelectResult run_select(const LossMatrix& losses, const ConfidenceWidths& widths, double gamma);

// ---------------------------------------------------------------------------
// config and report glue

LowerboundParams lowerbound_params(const Config& cfg);
ScalingParams scaling_params(const Config& cfg);
AdaptiveParams adaptive_params(const Config& cfg);
StrongConvexParams strong_convexity_params(const Config& cfg);
ConcentrationParams concentration_params(const Config& cfg);

Report lowerbound_report(const LowerboundResult& r);
Report scaling_report(const ScalingResult& r);
Report adaptive_report(const AdaptiveRunResult& r);
Report strong_convexity_report(const StrongConvexResult& r);
Report concentration_report(const std::vector<CoverageRow>& rows);
Report select_report(const SelectResult& r);

/// Parses the configuration for `experiment` (lowerbound, scaling, concentration, select,
/// adaptive, strongconvex), rejects unknown keys, runs it and returns the report with
/// the resolved configuration attached.
Report run_experiment(std::string_view experiment, const Config& cfg);

}  // namespace adaptopt
