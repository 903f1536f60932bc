// Config-driven experiment runner: reproducible sweeps over (kind, n, p)
// grids, incremental CSV + witness files, JSON and plot-ready reports,
// growth-fit summaries, and witness replay verification.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ncmlab/constants.hpp"
#include "ncmlab/exponent.hpp"
#include "ncmlab/solver_options.hpp"

namespace ncm {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class RunMode { Witness, Search };

// One sweep.  `kind` is an inequality tag (BG_LOWER, ...), or one of the
// structural tags: TRIPROJ (triangular-projection norm estimator) and
// THNORM (exact p-norm of the triangular truncation of the Hilbert-type
// matrix).  Witness mode evaluates the closed-form Hilbert witness
// (restarts pinned to zero for TRIPROJ); search mode runs the adversarial
// search.
struct ExperimentConfig {
  std::string name;
  std::string kind;
  std::vector<std::size_t> n_grid;  // nonempty, strictly ascending
  std::vector<ExponentP> p_grid;    // nonempty
  SolverOptions solver;
  std::uint64_t seed = 1;
  std::string out_dir = "results";
  RunMode mode = RunMode::Witness;
  bool timings = false;  // off keeps the seconds column at 0 => byte-identical reruns
};

// Plain-text sections:  experiment <name> { key values... }  with keys
// kind / n / p / mode / seed / out / max_iterations / restarts / tolerance /
// timings.  '#' starts a comment.  Throws ConfigError on any problem.
std::vector<ExperimentConfig> parse_config_text(const std::string& text);
std::vector<ExperimentConfig> parse_config_file(const std::string& path);
void validate_config(const ExperimentConfig& config);
void write_config(std::ostream& os, std::span<const ExperimentConfig> configs);

struct ResultRow {
  std::string kind;
  std::size_t n = 0;
  ExponentP p = ExponentP(2.0);
  double bound = 0.0;
  double seconds = 0.0;
  std::size_t iterations = 0;
  std::string witness_ref = "-";  // "<file>#<index>" into the witness file
  bool converged = true;          // carried in JSON and witness records, not CSV
};

struct FitSummary {
  std::string experiment;
  std::string kind;
  ExponentP p = ExponentP(2.0);
  GrowthFit fit;
  std::size_t points = 0;
};

// Runs the grid on a small worker pool (values are independent of `jobs`;
// only wall-times differ), writing <name>.csv and <name>.witness
// incrementally into out_dir, then <name>.json and per-(kind, p) plot files
// <name>_<kind>_p<p>.dat, plus LOG_POWER fits per p with >= 4 n-points.
// A cell whose evaluation throws is recorded as a NaN bound with
// converged = false; the sweep continues.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config, std::size_t jobs = 1);

// CSV with the exact header kind,n,p,bound,seconds,iterations,witness_ref.
std::string rows_to_csv(std::span<const ResultRow> rows);
std::vector<ResultRow> rows_from_csv(const std::string& text);

// JSON mirror of rows plus fits (rows gain a "converged" field).
std::string report_json_string(std::span<const ResultRow> rows,
                               std::span<const FitSummary> fits);
std::vector<ResultRow> rows_from_json_string(const std::string& text);

std::vector<FitSummary> compute_fits(const ExperimentConfig& config,
                                     std::span<const ResultRow> rows);

// Replays every row of every experiment recorded in out_dir/config.resolved:
// inequality bounds are re-evaluated from their stored witnesses, structural
// bounds recomputed from the recipe.  Returns 0, or 2 with one log line per
// mismatch beyond 1e-8 relative.
int verify_results(const std::string& out_dir, std::ostream& log);

}  // namespace ncm
