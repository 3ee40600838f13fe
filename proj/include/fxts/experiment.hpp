#pragma once

#include "fxts/analysis.hpp"
#include "fxts/core.hpp"
#include "fxts/dynamics.hpp"
#include "fxts/integrators.hpp"
#include "fxts/problems.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fxts {

/// Insertion-ordered JSON, so emitted files keep a stable, readable key order.
using Json = nlohmann::ordered_json;

inline constexpr const char* kLibraryVersion = "0.1.0";

/// Environment variable consulted for the output directory when neither the
/// command line nor the config names one.
inline constexpr const char* kOutDirEnv = "FXTS_OUT_DIR";

/// Malformed or inconsistent experiment configuration. The message starts
/// with the offending field path (e.g. "problem.kind: ...") or, for syntax
/// errors, the line and column.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Output file could not be written.
class IoError : public Error {
 public:
  using Error::Error;
};

struct ProblemSpec {
  std::string kind = "toy";  // toy | rls_synthetic | rls_csv | fixture
  // rls_synthetic
  int n = 0;
  int m = 0;
  double noise_std = 0.1;
  std::uint64_t seed = 0;
  // rls_synthetic, rls_csv
  double lambda = 3.0;
  // rls_csv
  std::string path;
  ColumnRef target = std::size_t{0};
  bool target_is_last = true;  // target omitted: use the last column
  // fixture
  std::string fixture;
};

struct DynamicsSpec {
  std::string kind = "fxts";  // nominal | fxts
  FxtsParams params;          // fxts only
  std::string label;          // file-name tag, defaults to kind
};

struct RandomInit {
  std::size_t count = 0;
  Box box;
  std::uint64_t seed = 0;
};

struct PlSpec {
  Box region{-3.0, 3.0};
  std::size_t n_samples = 500;
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  std::string defaults_profile;
  ProblemSpec problem;
  std::vector<DynamicsSpec> dynamics;
  IntegratorConfig integrator;
  std::vector<Point> initial_points;
  std::optional<RandomInit> random_init;
  std::string out_dir;  // empty: resolved at run time
  bool write_csv = true;
  bool write_json = true;
  std::optional<PlSpec> estimate_pl;
  bool settling_bound = false;
  bool lyapunov_trace = false;
  double compare_dist_tol = 1e-4;
};

/// Builds a config from JSON. Missing hyperparameters come from the named
/// defaults profile (chosen from the problem kind when "defaults" is absent).
/// Unknown keys are rejected.
ExperimentConfig parse_config(const Json& j);

/// Reads and parses a config file. Syntax errors report line and column.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Fully resolved echo; parse_config(to_json(cfg)) reproduces cfg.
Json to_json(const ExperimentConfig& cfg);

/// Replaces every seed in the config (problem, random starts, PL sampling).
void apply_seed_override(ExperimentConfig& cfg, std::uint64_t seed);

struct MaterializedProblem {
  MinMaxProblem problem;
  std::optional<RlsInstance> rls;
};

MaterializedProblem materialize_problem(const ProblemSpec& spec);

/// Explicit points first, then the random ones, in order.
std::vector<Point> resolve_initial_points(const ExperimentConfig& cfg, const MinMaxProblem& problem);

TangentField make_field(const DynamicsSpec& spec, const MinMaxProblem& problem);

struct RunResult {
  std::string dynamics;
  std::size_t init_id = 0;
  Point start;
  Trajectory trajectory;
  std::optional<std::string> error;  // divergence message
  std::optional<std::size_t> divergence_step;
  /// First recorded iteration with dist_sq < compare_dist_tol.
  std::optional<std::size_t> iterations_to_tol;
};

/// Settling bound for one fxts dynamics entry, from the margined PL estimate.
struct BoundEntry {
  std::string dynamics;
  std::optional<RateConstants> rate_constants;  // empty when inadmissible
  std::string note;
};

struct ExperimentReport {
  std::vector<RunResult> runs;
  std::optional<PlEstimate> pl_estimate;  // raw, before the safety margin
  std::vector<BoundEntry> bounds;
  std::vector<std::filesystem::path> files;
  bool diverged = false;
};

/// Runs every (dynamics, initial point) pair without touching the filesystem.
ExperimentReport execute(const ExperimentConfig& cfg);

/// execute() plus files in out_dir: traj_<label>_<init>.csv per run,
/// summary.json, and pl_estimate.json / bound.json when requested.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// run_experiment() plus comparison.csv (long format) and comparison.json.
/// Needs at least two dynamics entries.
ExperimentReport compare_solvers(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Per-run trajectory CSV: iter,t,x0..x{n-1},y0..y{m-1},grad_norm,value,dist_sq,lyapunov.
/// Unavailable cells are left empty.
std::string trajectory_csv(const Trajectory& traj, Eigen::Index n, Eigen::Index m);

/// Long-format comparison table: dynamics,init_id,iter,dist_sq,grad_norm,lyapunov.
std::string comparison_csv(const ExperimentReport& report);

Json to_json(const PlEstimate& est);
Json to_json(const RateConstants& rc);

/// Bound request: {"fxts": {...}, "mu1": .., "mu2": .., "c": .., "margin": ..}.
/// The margin (default 0) is applied to mu1, mu2 before the rate constants.
Json bound_report(const Json& request);

/// Formats a double with 17 significant digits ("%.17g").
std::string format_double(double v);

/// Writes text to path, creating parent directories; throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace fxts
