// Command-line front end for the experiment runners.

#include "adaptopt/experiments.hpp"

#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> threads;
  std::string out;
  std::vector<std::string> overrides;
  // Subcommand-specific shortcuts; each maps onto one config key.
  std::vector<std::pair<std::string, std::optional<std::string>>> shortcuts;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool seeded) {
  cmd->add_option("--config", o.config_path, "key=value configuration file");
  if (seeded) {
    cmd->add_option("--seed", o.seed, "base seed");
    cmd->add_option("--trials", o.trials, "number of trials");
    cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  }
  cmd->add_option("--out", o.out, "output CSV path; the summary goes to <out>.summary.csv");
  cmd->add_option("--set", o.overrides, "config override key=value (repeatable)");
}

void add_shortcut(CLI::App* cmd, CommonOptions& o, const std::string& flag, const std::string& key,
                  const std::string& help) {
  o.shortcuts.emplace_back(key, std::nullopt);
  cmd->add_option(flag, o.shortcuts.back().second, help);
}

adaptopt::Config build_config(const CommonOptions& o) {
  adaptopt::Config cfg = o.config_path.empty() ? adaptopt::Config{} : adaptopt::Config::load(o.config_path);
  for (const auto& [key, value] : o.shortcuts) {
    if (value) cfg.set(key, *value);
  }
  if (o.seed) cfg.set("seed", std::to_string(*o.seed));
  if (o.trials) cfg.set("trials", std::to_string(*o.trials));
  if (o.threads) cfg.set("threads", std::to_string(*o.threads));
  for (const std::string& a : o.overrides) cfg.set_assignment(a);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parameter-free stochastic convex optimization experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(adaptopt::kVersion));

  struct Sub {
    std::string name;
    std::string help;
    bool seeded;
    CommonOptions options;
    CLI::App* cmd = nullptr;
  };
  std::vector<Sub> subs;
  subs.reserve(6);
  subs.push_back({"lowerbound", "greedy vs reliable selection on the adversarial instance", true, {}});
  subs.push_back({"scaling", "suboptimality against n with a log-log slope fit", true, {}});
  subs.push_back({"concentration", "Monte-Carlo coverage of the width formulas", true, {}});
  subs.push_back({"select", "greedy and reliable selection on a loss-matrix CSV", false, {}});
  subs.push_back({"adaptive", "two-stage, lambda-grid and all-geometry runs", true, {}});
  subs.push_back({"strongconvex", "selection over a strong-convexity grid", true, {}});

  for (Sub& s : subs) {
    s.cmd = app.add_subcommand(s.name, s.help);
    CommonOptions& o = s.options;
    o.shortcuts.reserve(8);
    add_common(s.cmd, o, s.seeded);
    if (s.name == "select") {
      add_shortcut(s.cmd, o, "--input", "input", "loss matrix CSV (sample_id,model_0,...)");
      add_shortcut(s.cmd, o, "--m-values", "m_values", "comma list of M(x_k), one per model");
      add_shortcut(s.cmd, o, "--m-all", "m_all", "one M value for every model");
      add_shortcut(s.cmd, o, "--tau-file", "tau_file", "precomputed widths, one per model");
      add_shortcut(s.cmd, o, "--gamma", "gamma", "reliable selection gamma (>= 1)");
    }
    if (s.name == "adaptive" || s.name == "scaling") {
      add_shortcut(s.cmd, o, "--family", "family", "problem family");
      add_shortcut(s.cmd, o, "--p", "p", s.name == "adaptive" ? "geometry: l2, l1, linf or all" : "geometry");
      add_shortcut(s.cmd, o, "--delta", "delta", "failure probability");
      add_shortcut(s.cmd, o, "--gamma", "gamma", "reliable selection gamma");
      add_shortcut(s.cmd, o, "--lambda-strategy", "lambda_strategy", "envelope, grid_sup or exact_1d");
    }
    if (s.name == "adaptive") add_shortcut(s.cmd, o, "--n", "n", "samples per stage");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (Sub& s : subs) {
      if (!s.cmd->parsed()) continue;
      const adaptopt::Config cfg = build_config(s.options);
      const adaptopt::Report report = adaptopt::run_experiment(s.name, cfg);
      if (s.options.out.empty()) {
        report.write_trials(std::cout);
      } else {
        report.save(s.options.out);
        report.write_summary(std::cout);
      }
    }
  } catch (const adaptopt::InvariantError& e) {
    std::cerr << "adaptopt: error=invariant_violation invariant=" << e.name() << " detail=\""
              << e.what() << "\"\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "adaptopt: error=invalid_argument detail=\"" << e.what() << "\"\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "adaptopt: error=runtime detail=\"" << e.what() << "\"\n";
    return 1;
  }
  return 0;
}
