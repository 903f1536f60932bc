// Experiment runner: config parsing, CSV/JSON round trips, grid execution,
// determinism across reruns and worker counts, and replay verification.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "ncmlab/constants.hpp"
#include "ncmlab/experiment.hpp"
#include "ncmlab/norms.hpp"
#include "ncmlab/rng.hpp"
#include "ncmlab/triproj.hpp"

using namespace ncm;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

// Fresh output directory under the test binary's working directory.
fs::path fresh_dir(const std::string& tag) {
  fs::path d = fs::path("exp_out") / tag;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Mirror of the CLI run verb: execute and snapshot the resolved config so
// verify_results can replay the directory.
std::vector<ResultRow> run_and_snapshot(const ExperimentConfig& config, std::size_t jobs = 1) {
  std::vector<ResultRow> rows = run_experiment(config, jobs);
  std::ofstream os(fs::path(config.out_dir) / "config.resolved");
  REQUIRE(os.good());
  std::vector<ExperimentConfig> list = {config};
  write_config(os, list);
  return rows;
}

ExperimentConfig base_config(const std::string& name, const fs::path& out) {
  ExperimentConfig c;
  c.name = name;
  c.kind = "STEIN";
  c.n_grid = {4, 8};
  c.p_grid = {ExponentP::infinity()};
  c.solver.max_iterations = 10;
  c.solver.restarts = 1;
  c.seed = 7;
  c.out_dir = out.string();
  c.mode = RunMode::Witness;
  return c;
}

}  // namespace

TEST_CASE("config text: parse, validate, and round trip") {
  const std::string text =
      "# comment line\n"
      "experiment alpha {\n"
      "  kind STEIN\n"
      "  n 4 8 16\n"
      "  p 2 inf\n"
      "  mode search\n"
      "  seed 99\n"
      "  out results_alpha\n"
      "  max_iterations 25\n"
      "  restarts 3\n"
      "  tolerance 1e-7\n"
      "  timings off\n"
      "}\n"
      "experiment beta {\n"
      "  kind THNORM\n"
      "  n 8 16\n"
      "  p 4\n"
      "}\n";
  std::vector<ExperimentConfig> cfgs = parse_config_text(text);
  REQUIRE(cfgs.size() == 2);
  CHECK(cfgs[0].name == "alpha");
  CHECK(cfgs[0].kind == "STEIN");
  CHECK(cfgs[0].n_grid == std::vector<std::size_t>{4, 8, 16});
  REQUIRE(cfgs[0].p_grid.size() == 2);
  CHECK(cfgs[0].p_grid[0] == ExponentP(2.0));
  CHECK(cfgs[0].p_grid[1] == ExponentP::infinity());
  CHECK(cfgs[0].mode == RunMode::Search);
  CHECK(cfgs[0].seed == 99);
  CHECK(cfgs[0].out_dir == "results_alpha");
  CHECK(cfgs[0].solver.max_iterations == 25);
  CHECK(cfgs[0].solver.restarts == 3);
  CHECK(cfgs[0].solver.tolerance == 1e-7);
  CHECK(cfgs[0].timings == false);
  CHECK(cfgs[1].mode == RunMode::Witness);  // default
  for (const ExperimentConfig& c : cfgs) validate_config(c);

  // write_config emits text that parses back to the same configs.
  std::ostringstream os;
  write_config(os, cfgs);
  std::vector<ExperimentConfig> back = parse_config_text(os.str());
  REQUIRE(back.size() == cfgs.size());
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    CHECK(back[i].name == cfgs[i].name);
    CHECK(back[i].kind == cfgs[i].kind);
    CHECK(back[i].n_grid == cfgs[i].n_grid);
    CHECK(back[i].p_grid.size() == cfgs[i].p_grid.size());
    for (std::size_t j = 0; j < cfgs[i].p_grid.size(); ++j)
      CHECK(back[i].p_grid[j] == cfgs[i].p_grid[j]);
    CHECK(back[i].mode == cfgs[i].mode);
    CHECK(back[i].seed == cfgs[i].seed);
    CHECK(back[i].out_dir == cfgs[i].out_dir);
    CHECK(back[i].solver.max_iterations == cfgs[i].solver.max_iterations);
    CHECK(back[i].solver.restarts == cfgs[i].solver.restarts);
    CHECK(back[i].solver.tolerance == cfgs[i].solver.tolerance);
    CHECK(back[i].timings == cfgs[i].timings);
  }
}

TEST_CASE("config text: every malformed shape is rejected") {
  // Syntax-level problems surface at parse time.
  CHECK_THROWS_AS((void)parse_config_text(""), ConfigError);
  CHECK_THROWS_AS((void)parse_config_text("experiment a {\n  kind STEIN\n  n 4\n"),
                  ConfigError);  // unterminated
  CHECK_THROWS_AS((void)parse_config_text("experiment a {\n  n 4\n  p 2\n}\n"),
                  ConfigError);  // missing kind
  CHECK_THROWS_AS(
      (void)parse_config_text("experiment a {\n  kind STEIN\n  n 4\n  p\n}\n"),
      ConfigError);  // empty p grid
  CHECK_THROWS_AS(
      (void)parse_config_text("experiment a {\n  kind STEIN\n  n 4\n  p 2\n  mode maybe\n}\n"),
      ConfigError);
  CHECK_THROWS_AS(
      (void)parse_config_text("experiment a {\n  kind STEIN\n  n 4\n  p 2\n  widgets 3\n}\n"),
      ConfigError);  // unknown key
  CHECK_THROWS_AS(
      (void)parse_config_text("experiment a {\n  kind STEIN\n  n 4\n  p 2\n  seed x\n}\n"),
      ConfigError);
  const std::string dup =
      "experiment a {\n  kind STEIN\n  n 4\n  p 2\n}\n"
      "experiment a {\n  kind STEIN\n  n 8\n  p 2\n}\n";
  CHECK_THROWS_AS((void)parse_config_text(dup), ConfigError);
  CHECK_THROWS_AS((void)parse_config_file("no_such_config_file.cfg"), ConfigError);

  // Semantic problems surface in validate_config.
  ExperimentConfig c;
  c.name = "probe";
  c.kind = "STEIN";
  c.n_grid = {4, 8};
  c.p_grid = {ExponentP(2.0)};

  ExperimentConfig bad = c;
  bad.kind = "NOT_A_KIND";
  CHECK_THROWS_AS(validate_config(bad), ConfigError);

  bad = c;
  bad.n_grid = {8, 4};
  CHECK_THROWS_AS(validate_config(bad), ConfigError);

  bad = c;
  bad.n_grid = {4, 4};
  CHECK_THROWS_AS(validate_config(bad), ConfigError);

  bad = c;
  bad.name = "bad name!";
  CHECK_THROWS_AS(validate_config(bad), ConfigError);

  bad = c;
  bad.kind = "TRANSFORM_WEAK";
  bad.mode = RunMode::Search;
  bad.p_grid = {ExponentP(2.0)};
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
  bad.p_grid = {ExponentP(1.0)};
  CHECK_NOTHROW(validate_config(bad));

  // Witness mode exists only where a closed-form witness does.
  bad = c;
  bad.kind = "TRANSFORM";
  bad.mode = RunMode::Witness;
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
  bad.mode = RunMode::Search;
  CHECK_NOTHROW(validate_config(bad));
}

TEST_CASE("result rows survive CSV and JSON round trips") {
  std::vector<ResultRow> rows(3);
  rows[0] = {"STEIN", 8, ExponentP::infinity(), 1.2455378108208465, 0.0, 41, "demo.witness#0",
             true};
  rows[1] = {"THNORM", 16, ExponentP(1.5), 2.7182818284590452, 0.125, 0, "-", true};
  rows[2] = {"DOOB_DUAL", 4, ExponentP(2.0), std::numeric_limits<double>::quiet_NaN(), 0.0, 7,
             "-", false};

  const std::string csv = rows_to_csv(rows);
  CHECK(csv.rfind("kind,n,p,bound,seconds,iterations,witness_ref\n", 0) == 0);
  std::vector<ResultRow> back = rows_from_csv(csv);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].kind == rows[i].kind);
    CHECK(back[i].n == rows[i].n);
    CHECK(back[i].p == rows[i].p);
    if (std::isnan(rows[i].bound))
      CHECK(std::isnan(back[i].bound));
    else
      CHECK(back[i].bound == rows[i].bound);
    CHECK(back[i].seconds == rows[i].seconds);
    CHECK(back[i].iterations == rows[i].iterations);
    CHECK(back[i].witness_ref == rows[i].witness_ref);
  }

  CHECK_THROWS_AS((void)rows_from_csv("best,effort\n1,2\n"), ConfigError);
  CHECK_THROWS_AS((void)rows_from_csv(""), ConfigError);

  // JSON carries the same rows plus the converged flag.
  const std::string json = report_json_string(rows, {});
  std::vector<ResultRow> jback = rows_from_json_string(json);
  REQUIRE(jback.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(jback[i].kind == rows[i].kind);
    CHECK(jback[i].n == rows[i].n);
    CHECK(jback[i].p == rows[i].p);
    if (std::isnan(rows[i].bound))
      CHECK(std::isnan(jback[i].bound));
    else
      CHECK(jback[i].bound == rows[i].bound);
    CHECK(jback[i].witness_ref == rows[i].witness_ref);
    CHECK(jback[i].converged == rows[i].converged);
  }
}

TEST_CASE("witness-mode sweep: monotone bounds, determinism, replay") {
  const fs::path out = fresh_dir("stein_witness");
  ExperimentConfig cfg = base_config("steinw", out);
  std::vector<ResultRow> rows = run_and_snapshot(cfg);

  // One row per (n, p) cell in grid order with live witness references.
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].n == 4);
  CHECK(rows[1].n == 8);
  CHECK(rows[0].witness_ref == "steinw.witness#0");
  CHECK(rows[1].witness_ref == "steinw.witness#1");

  // The kernel embeds across sizes: bounds grow along the n grid.
  const double want4 = schatten_norm(triangular(hilbert_matrix(4)), ExponentP::infinity()) /
                       schatten_norm(hilbert_matrix(4), ExponentP::infinity());
  CHECK(rows[0].bound == doctest::Approx(want4).epsilon(1e-12));
  CHECK(rows[1].bound >= rows[0].bound);

  // Timings stay off by default, so reruns are byte-identical.
  const std::string csv1 = slurp(out / "steinw.csv");
  const std::string wit1 = slurp(out / "steinw.witness");
  const std::string json1 = slurp(out / "steinw.json");

  const fs::path out2 = fresh_dir("stein_witness_rerun");
  ExperimentConfig cfg2 = base_config("steinw", out2);
  run_and_snapshot(cfg2, 3);  // more workers than cells changes nothing
  CHECK(slurp(out2 / "steinw.csv") == csv1);
  CHECK(slurp(out2 / "steinw.witness") == wit1);
  CHECK(slurp(out2 / "steinw.json") == json1);

  // Replay accepts the directory as written.
  std::ostringstream log;
  CHECK(verify_results(out.string(), log) == 0);
  CHECK(log.str().empty());

  // A tampered bound is caught and named.
  std::vector<ResultRow> tampered = rows_from_csv(csv1);
  tampered[1].bound *= 1.01;
  spit(out / "steinw.csv", rows_to_csv(tampered));
  std::ostringstream log2;
  CHECK(verify_results(out.string(), log2) == 2);
  CHECK(log2.str().find("row 1") != std::string::npos);

  // Restoring the file restores the verdict.
  spit(out / "steinw.csv", csv1);
  std::ostringstream log3;
  CHECK(verify_results(out.string(), log3) == 0);

  CHECK_THROWS_AS((void)verify_results("no_such_results_dir", log3), ConfigError);
}

TEST_CASE("search-mode sweep replays exactly") {
  const fs::path out = fresh_dir("stein_search");
  ExperimentConfig cfg = base_config("steins", out);
  cfg.mode = RunMode::Search;
  std::vector<ResultRow> rows = run_and_snapshot(cfg);
  REQUIRE(rows.size() == 2);

  // Search keeps the embedded half-size witness in play: still monotone.
  CHECK(rows[1].bound >= rows[0].bound - 1e-9);
  // Search can only improve on the closed-form witness rows.
  const fs::path wout = fresh_dir("stein_search_ref");
  ExperimentConfig wcfg = base_config("steinw", wout);
  std::vector<ResultRow> wrows = run_and_snapshot(wcfg);
  for (std::size_t i = 0; i < rows.size(); ++i)
    CHECK(rows[i].bound >= wrows[i].bound - 1e-12);

  std::ostringstream log;
  CHECK(verify_results(out.string(), log) == 0);

  // Tampering with the witness file breaks replay even with the CSV intact.
  std::string wit = slurp(out / "steins.witness");
  const std::string needle = "kind STEIN";
  const std::size_t pos = wit.find(needle);
  REQUIRE(pos != std::string::npos);
  spit(out / "steins.witness", wit.replace(pos, needle.size(), "kind DOOB_"));
  std::ostringstream log2;
  const int rc = [&] {
    try {
      return verify_results(out.string(), log2);
    } catch (const std::exception&) {
      return 2;  // unreadable records are as fatal as mismatched ones
    }
  }();
  CHECK(rc == 2);
}

TEST_CASE("structural kinds: exact recompute and plot/fit outputs") {
  const fs::path out = fresh_dir("structural");
  ExperimentConfig cfg;
  cfg.name = "thn";
  cfg.kind = "THNORM";
  cfg.n_grid = {8, 16, 32, 64};
  cfg.p_grid = {ExponentP::infinity(), ExponentP(2.0)};
  cfg.seed = 5;
  cfg.out_dir = out.string();
  std::vector<ResultRow> rows = run_and_snapshot(cfg, 2);
  REQUIRE(rows.size() == 8);

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ResultRow& r = rows[i];
    CHECK(r.witness_ref == "-");
    CHECK(r.iterations == 0);
    // Recipe bound is the exact norm of the truncated kernel.
    const double want = schatten_norm(triangular(hilbert_matrix(r.n)), r.p);
    CHECK(r.bound == want);
  }
  CHECK(!fs::exists(out / "thn.witness"));

  // Per-p plot files carry (n, bound) pairs for their own exponent only.
  const std::string dat = slurp(out / "thn_THNORM_pinf.dat");
  CHECK(std::count(dat.begin(), dat.end(), '\n') == 4);
  CHECK(dat.find("8 ") == 0);
  CHECK(fs::exists(out / "thn_THNORM_p2.dat"));

  // Four n-points per p: a growth fit per exponent, logarithmic in n.
  std::vector<FitSummary> fits = compute_fits(cfg, rows);
  REQUIRE(fits.size() == 2);
  for (const FitSummary& f : fits) {
    CHECK(f.points == 4);
    CHECK(f.kind == "THNORM");
    CHECK(std::isfinite(f.fit.exponent));
    CHECK(f.fit.r_squared > 0.9);
  }
  const std::string json = slurp(out / "thn.json");
  CHECK(json.find("fits") != std::string::npos);

  std::ostringstream log;
  CHECK(verify_results(out.string(), log) == 0);

  // Structural rows are recomputed from the recipe, so tampering is caught.
  const std::string csv = slurp(out / "thn.csv");
  std::vector<ResultRow> tampered = rows_from_csv(csv);
  tampered[0].bound += 1e-3;
  spit(out / "thn.csv", rows_to_csv(tampered));
  std::ostringstream log2;
  CHECK(verify_results(out.string(), log2) == 2);
}

TEST_CASE("estimator kinds reproduce the per-cell seed derivation") {
  const fs::path out = fresh_dir("triproj");
  ExperimentConfig cfg;
  cfg.name = "tp";
  cfg.kind = "TRIPROJ";
  cfg.n_grid = {2, 4};
  cfg.p_grid = {ExponentP(2.0)};
  cfg.solver.max_iterations = 150;
  cfg.solver.restarts = 2;
  cfg.seed = 11;
  cfg.out_dir = out.string();
  std::vector<ResultRow> rows = run_and_snapshot(cfg);
  REQUIRE(rows.size() == 2);

  for (std::size_t i = 0; i < rows.size(); ++i) {
    // Witness mode pins restarts to zero and derives the cell seed from the
    // experiment seed and the grid index.
    SolverOptions opts = cfg.solver;
    opts.seed = derive_seed(cfg.seed, i);
    opts.restarts = 0;
    const TriprojEstimate est = triproj_norm_estimate(rows[i].n, rows[i].p, opts);
    CHECK(rows[i].bound == est.bound);
    CHECK(rows[i].iterations == est.iterations);
    CHECK(rows[i].witness_ref == "-");
    // p = 2: the projection has norm one and the estimator finds it.
    CHECK(std::abs(rows[i].bound - 1.0) < 1e-6);
  }

  std::ostringstream log;
  CHECK(verify_results(out.string(), log) == 0);
}
