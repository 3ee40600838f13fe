// fxts: command-line runner for saddle-point dynamics experiments.
//
//   fxts run <config.json>          trajectories + summary.json
//   fxts compare <config.json>      same, plus comparison.csv / comparison.json
//   fxts estimate-pl <config.json>  pl_estimate.json only
//   fxts bound <params.json>        bound.json from given constants
//
// Exit codes: 0 ok, 2 config error, 3 divergence, 4 I/O error.

#include "fxts/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

struct Options {
  std::string config;
  std::string out_dir;
  std::optional<std::uint64_t> seed_override;
  bool quiet = false;
};

std::filesystem::path resolve_out_dir(const Options& opt, const fxts::ExperimentConfig* cfg) {
  if (!opt.out_dir.empty()) return opt.out_dir;
  if (cfg && !cfg->out_dir.empty()) return cfg->out_dir;
  if (const char* env = std::getenv(fxts::kOutDirEnv); env && *env) return env;
  return "fxts_out";
}

fxts::ExperimentConfig load(const Options& opt) {
  auto cfg = fxts::load_config(opt.config);
  if (opt.seed_override) fxts::apply_seed_override(cfg, *opt.seed_override);
  return cfg;
}

void print_runs(const fxts::ExperimentReport& report) {
  for (const auto& r : report.runs) {
    std::printf("%-10s init %zu: %s after %zu iterations", r.dynamics.c_str(), r.init_id,
                fxts::to_string(r.trajectory.reason), r.trajectory.iterations);
    if (!r.trajectory.steps.empty() && r.trajectory.steps.back().dist_sq) {
      std::printf(", dist_sq %.3e", *r.trajectory.steps.back().dist_sq);
    }
    if (r.iterations_to_tol) std::printf(", to tol in %zu", *r.iterations_to_tol);
    std::printf("\n");
  }
}

int cmd_run(const Options& opt, bool compare) {
  const auto cfg = load(opt);
  const auto dir = resolve_out_dir(opt, &cfg);
  const auto report = compare ? fxts::compare_solvers(cfg, dir) : fxts::run_experiment(cfg, dir);
  if (!opt.quiet) {
    print_runs(report);
    for (const auto& b : report.bounds) {
      if (b.rate_constants) {
        std::printf("settling bound (%s): %.6g\n", b.dynamics.c_str(),
                    b.rate_constants->settling_bound());
      } else {
        std::printf("settling bound (%s): unavailable, %s\n", b.dynamics.c_str(), b.note.c_str());
      }
    }
    std::printf("wrote %zu files to %s\n", report.files.size(), dir.string().c_str());
  }
  return report.diverged ? kExitDivergence : kExitOk;
}

int cmd_estimate_pl(const Options& opt) {
  auto cfg = load(opt);
  if (!cfg.estimate_pl) {
    throw fxts::ConfigError("analysis.estimate_pl: estimate-pl needs this block");
  }
  const auto mp = fxts::materialize_problem(cfg.problem);
  const auto est = fxts::estimate_pl_constants(mp.problem, cfg.estimate_pl->region,
                                               cfg.estimate_pl->n_samples, cfg.estimate_pl->seed);
  fxts::Json j;
  j["raw"] = fxts::to_json(est);
  j["margined"] = fxts::to_json(fxts::with_safety_margin(est));
  const auto dir = resolve_out_dir(opt, &cfg);
  fxts::write_text_file(dir / "pl_estimate.json", j.dump(2) + "\n");
  if (!opt.quiet) std::printf("%s\n", j.dump(2).c_str());
  return kExitOk;
}

int cmd_bound(const Options& opt) {
  std::ifstream in(opt.config, std::ios::binary);
  if (!in) throw fxts::ConfigError(opt.config + ": cannot open params file");
  std::stringstream ss;
  ss << in.rdbuf();
  fxts::Json req;
  try {
    req = fxts::Json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw fxts::ConfigError(opt.config + ": " + e.what());
  }
  const auto j = fxts::bound_report(req);
  const auto dir = resolve_out_dir(opt, nullptr);
  fxts::write_text_file(dir / "bound.json", j.dump(2) + "\n");
  if (!opt.quiet) std::printf("%s\n", j.dump(2).c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed-time saddle-point dynamics experiments"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed = 0;

  const auto add_common = [&](CLI::App* sub, const char* what) {
    sub->add_option("config", opt.config, what)->required();
    sub->add_option("--out-dir", opt.out_dir, "Output directory (default: config, then $FXTS_OUT_DIR, then ./fxts_out)");
    sub->add_flag("--quiet,-q", opt.quiet, "Print nothing on success");
  };
  auto* run = app.add_subcommand("run", "Run every dynamics from every initial point");
  auto* compare = app.add_subcommand("compare", "Run and write comparison tables");
  auto* est = app.add_subcommand("estimate-pl", "Estimate PL moduli and the cross-derivative bound");
  auto* bound = app.add_subcommand("bound", "Rate constants and settling-time bound from given constants");
  for (auto* sub : {run, compare, est}) {
    add_common(sub, "Experiment config (JSON)");
    sub->add_option("--seed-override", seed, "Replace every seed in the config");
  }
  add_common(bound, "Parameters (JSON): fxts, mu1, mu2, c, margin");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }
  for (auto* sub : {run, compare, est}) {
    if (sub->parsed() && sub->count("--seed-override")) opt.seed_override = seed;
  }

  try {
    if (run->parsed()) return cmd_run(opt, false);
    if (compare->parsed()) return cmd_run(opt, true);
    if (est->parsed()) return cmd_estimate_pl(opt);
    return cmd_bound(opt);
  } catch (const fxts::IoError& e) {
    std::fprintf(stderr, "fxts: I/O error: %s\n", e.what());
    return kExitIo;
  } catch (const fxts::DatasetError& e) {
    std::fprintf(stderr, "fxts: dataset error: %s\n", e.what());
    return e.kind() == fxts::DatasetError::Kind::missing_file ? kExitIo : kExitConfig;
  } catch (const fxts::ConfigError& e) {
    std::fprintf(stderr, "fxts: config error: %s\n", e.what());
    return kExitConfig;
  } catch (const fxts::DivergenceError& e) {
    std::fprintf(stderr, "fxts: %s\n", e.what());
    return kExitDivergence;
  } catch (const fxts::Error& e) {
    std::fprintf(stderr, "fxts: %s\n", e.what());
    return kExitConfig;
  }
}
