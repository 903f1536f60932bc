// Command-line front end: run config-driven sweeps, verify stored results,
// fit growth laws, or print a single Hilbert-witness bound.
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ncmlab/constants.hpp"
#include "ncmlab/experiment.hpp"

namespace {

namespace fs = std::filesystem;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ncm::ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunOverrides {
  CLI::Option* seed = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* max_n = nullptr;
  CLI::Option* restarts = nullptr;
  std::uint64_t seed_value = 0;
  std::string out_value;
  std::size_t max_n_value = 0;
  std::size_t restarts_value = 0;
};

int cmd_run(const std::string& config_path, const RunOverrides& ov, std::size_t jobs) {
  std::vector<ncm::ExperimentConfig> configs = ncm::parse_config_file(config_path);
  for (ncm::ExperimentConfig& c : configs) {
    if (ov.seed->count()) c.seed = ov.seed_value;
    if (ov.out->count()) c.out_dir = ov.out_value;
    if (ov.restarts->count()) c.solver.restarts = ov.restarts_value;
    if (ov.max_n->count()) {
      std::vector<std::size_t> keep;
      for (std::size_t n : c.n_grid)
        if (n <= ov.max_n_value) keep.push_back(n);
      if (keep.empty())
        throw ncm::ConfigError(c.name + ": --max-n leaves the n grid empty");
      c.n_grid = std::move(keep);
    }
    ncm::validate_config(c);
  }

  // The resolved (post-override) config is what `verify` replays against.
  std::map<std::string, std::vector<ncm::ExperimentConfig>> by_dir;
  for (const ncm::ExperimentConfig& c : configs) by_dir[c.out_dir].push_back(c);
  for (const auto& [dir, list] : by_dir) {
    fs::create_directories(dir);
    std::ofstream os(fs::path(dir) / "config.resolved");
    if (!os) throw ncm::ConfigError("cannot write config.resolved into " + dir);
    ncm::write_config(os, list);
  }

  for (const ncm::ExperimentConfig& c : configs) {
    const std::vector<ncm::ResultRow> rows = ncm::run_experiment(c, jobs);
    std::cout << c.name << ": " << rows.size() << " rows -> " << c.out_dir << "/"
              << c.name << ".csv\n";
  }
  return 0;
}

int cmd_fit(const std::string& dir, const std::string& model) {
  const std::vector<ncm::ExperimentConfig> configs =
      ncm::parse_config_file((fs::path(dir) / "config.resolved").string());
  bool any = false;
  for (const ncm::ExperimentConfig& exp : configs) {
    const std::vector<ncm::ResultRow> rows =
        ncm::rows_from_csv(read_text(fs::path(dir) / (exp.name + ".csv")));
    if (model == "log") {
      for (const ncm::ExponentP& p : exp.p_grid) {
        std::vector<std::pair<double, double>> pts;
        for (const ncm::ResultRow& r : rows)
          if (r.p == p && std::isfinite(r.bound) && r.bound > 0.0)
            pts.emplace_back(static_cast<double>(r.n), r.bound);
        if (pts.size() < 4) continue;
        const ncm::GrowthFit fit = ncm::growth_fit(pts, ncm::GrowthModel::LogPower);
        std::cout << exp.name << " " << exp.kind << " p=" << p.str()
                  << " model=LOG_POWER exponent=" << fmt17(fit.exponent)
                  << " prefactor=" << fmt17(fit.prefactor)
                  << " r2=" << fmt17(fit.r_squared) << " points=" << pts.size() << "\n";
        any = true;
      }
    } else {  // model == "p"
      for (std::size_t n : exp.n_grid) {
        std::vector<std::pair<double, double>> pts;
        for (const ncm::ResultRow& r : rows)
          if (r.n == n && !r.p.is_infinity() && std::isfinite(r.bound) && r.bound > 0.0)
            pts.emplace_back(r.p.value(), r.bound);
        if (pts.size() < 4) continue;
        const ncm::GrowthFit fit = ncm::growth_fit(pts, ncm::GrowthModel::PPower);
        std::cout << exp.name << " " << exp.kind << " n=" << n
                  << " model=P_POWER exponent=" << fmt17(fit.exponent)
                  << " prefactor=" << fmt17(fit.prefactor)
                  << " r2=" << fmt17(fit.r_squared) << " points=" << pts.size() << "\n";
        any = true;
      }
    }
  }
  if (!any) std::cerr << "no series with >= 4 usable points\n";
  return 0;
}

int cmd_witness(const std::string& kind_tag, std::size_t n, const std::string& p_str,
                std::uint64_t seed, std::size_t restarts) {
  const ncm::InequalityKind kind = ncm::parse_inequality_kind(kind_tag);
  const ncm::ExponentP p = ncm::ExponentP::parse(p_str);
  ncm::SolverOptions opts;
  opts.seed = seed;
  opts.restarts = restarts;
  const ncm::ConstantEstimate est = ncm::hilbert_witness(kind, n, p, opts);
  std::cout << ncm::to_string(est.kind) << " n=" << est.n << " p=" << est.p.str()
            << " bound=" << fmt17(est.lower_bound) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"martingale inequality laboratory"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "run every experiment in a config file");
  std::string run_config;
  run->add_option("config", run_config, "config file path")->required();
  RunOverrides ov;
  ov.seed = run->add_option("--seed", ov.seed_value, "override the seed of every experiment");
  ov.out = run->add_option("--out", ov.out_value, "override the output directory");
  ov.max_n = run->add_option("--max-n", ov.max_n_value, "drop grid entries above this n");
  ov.restarts = run->add_option("--restarts", ov.restarts_value, "override solver restarts");
  std::size_t jobs = 1;
  run->add_option("--jobs", jobs, "worker threads (values are independent of this)");

  CLI::App* verify = app.add_subcommand("verify", "replay stored witnesses against the CSV");
  std::string verify_dir;
  verify->add_option("results", verify_dir, "output directory of a previous run")->required();

  CLI::App* fit = app.add_subcommand("fit", "fit growth laws to stored results");
  std::string fit_dir;
  fit->add_option("results", fit_dir, "output directory of a previous run")->required();
  std::string fit_model = "log";
  fit->add_option("--model", fit_model, "log: c*log(n+1)^q over n; p: c*p^q over p")
      ->check(CLI::IsMember({"log", "p"}));

  CLI::App* witness = app.add_subcommand("witness", "print one Hilbert witness bound");
  std::string w_kind, w_p;
  std::size_t w_n = 0;
  witness->add_option("kind", w_kind, "inequality tag, e.g. STEIN")->required();
  witness->add_option("n", w_n, "matrix size")->required();
  witness->add_option("p", w_p, "exponent (number or inf)")->required();
  std::uint64_t w_seed = 1;
  std::size_t w_restarts = 8;
  witness->add_option("--seed", w_seed, "solver seed for solver-backed ratios");
  witness->add_option("--restarts", w_restarts, "solver restarts for solver-backed ratios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run->parsed()) return cmd_run(run_config, ov, jobs);
    if (verify->parsed()) return ncm::verify_results(verify_dir, std::cerr);
    if (fit->parsed()) return cmd_fit(fit_dir, fit_model);
    if (witness->parsed()) return cmd_witness(w_kind, w_n, w_p, w_seed, w_restarts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
