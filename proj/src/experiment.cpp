#include "ncmlab/experiment.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "ncmlab/norms.hpp"
#include "ncmlab/rng.hpp"
#include "ncmlab/triproj.hpp"

namespace ncm {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr const char* kCsvHeader = "kind,n,p,bound,seconds,iterations,witness_ref";

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool is_structural_kind(const std::string& kind) {
  return kind == "TRIPROJ" || kind == "THNORM";
}

bool is_known_kind(const std::string& kind) {
  if (is_structural_kind(kind)) return true;
  try {
    parse_inequality_kind(kind);
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

std::string read_file_or_throw(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> tokenize_line(const std::string& line) {
  std::vector<std::string> toks;
  std::string cur;
  for (char c : line) {
    if (c == '#') break;
    if (c == ' ' || c == '\t' || c == '\r') {
      if (!cur.empty()) {
        toks.push_back(cur);
        cur.clear();
      }
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) toks.push_back(cur);
  return toks;
}

std::uint64_t parse_u64(const std::string& tok, const std::string& what) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0') throw ConfigError("bad integer for " + what);
  return v;
}

double parse_double(const std::string& tok, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') throw ConfigError("bad number for " + what);
  return v;
}

struct CellResult {
  ResultRow row;
  std::optional<ConstantEstimate> record;
};

CellResult evaluate_cell(const ExperimentConfig& config, std::size_t index, std::size_t n,
                         ExponentP p) {
  CellResult out;
  ResultRow& row = out.row;
  row.kind = config.kind;
  row.n = n;
  row.p = p;
  SolverOptions opts = config.solver;
  opts.seed = derive_seed(config.seed, index);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (config.kind == "THNORM") {
      row.bound = schatten_norm(triangular(hilbert_matrix(n)), p);
    } else if (config.kind == "TRIPROJ") {
      SolverOptions topts = opts;
      if (config.mode == RunMode::Witness) topts.restarts = 0;
      const TriprojEstimate est = triproj_norm_estimate(n, p, topts);
      row.bound = est.bound;
      row.iterations = est.iterations;
      row.converged = est.converged;
    } else {
      const InequalityKind kind = parse_inequality_kind(config.kind);
      ConstantEstimate est = (config.mode == RunMode::Witness)
                                 ? hilbert_witness(kind, n, p, opts)
                                 : adversarial_search(kind, n, p, opts);
      row.bound = est.lower_bound;
      row.iterations = est.iterations;
      row.converged = est.converged;
      row.witness_ref = config.name + ".witness#" + std::to_string(index);
      out.record = std::move(est);
    }
  } catch (const std::exception&) {
    row.bound = std::numeric_limits<double>::quiet_NaN();
    row.converged = false;
    row.witness_ref = "-";
    out.record.reset();
  }
  if (config.timings) {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    row.seconds = dt.count();
  }
  return out;
}

std::string csv_line(const ResultRow& r) {
  std::ostringstream os;
  os << r.kind << ',' << r.n << ',' << r.p.str() << ',' << fmt17(r.bound) << ','
     << fmt17(r.seconds) << ',' << r.iterations << ',' << r.witness_ref;
  return os.str();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

// Recompute a structural (or failed) cell exactly as the run did.
double recompute_recipe_bound(const ExperimentConfig& config, std::size_t index,
                              const ResultRow& row) {
  return evaluate_cell(config, index, row.n, row.p).row.bound;
}

}  // namespace

std::vector<ExperimentConfig> parse_config_text(const std::string& text) {
  std::vector<ExperimentConfig> configs;
  std::istringstream in(text);
  std::string line;
  std::optional<ExperimentConfig> cur;
  bool saw_n = false, saw_p = false, saw_kind = false;
  while (std::getline(in, line)) {
    const std::vector<std::string> toks = tokenize_line(line);
    if (toks.empty()) continue;
    if (!cur) {
      if (toks.size() != 3 || toks[0] != "experiment" || toks[2] != "{")
        throw ConfigError("expected 'experiment <name> {', got: " + line);
      cur.emplace();
      cur->name = toks[1];
      saw_n = saw_p = saw_kind = false;
      continue;
    }
    if (toks[0] == "}") {
      if (toks.size() != 1) throw ConfigError("unexpected tokens after '}'");
      if (!saw_kind) throw ConfigError("experiment " + cur->name + ": missing kind");
      if (!saw_n) throw ConfigError("experiment " + cur->name + ": missing n grid");
      if (!saw_p) throw ConfigError("experiment " + cur->name + ": missing p grid");
      validate_config(*cur);
      for (const ExperimentConfig& c : configs)
        if (c.name == cur->name) throw ConfigError("duplicate experiment name " + cur->name);
      configs.push_back(std::move(*cur));
      cur.reset();
      continue;
    }
    const std::string& key = toks[0];
    const std::size_t vals = toks.size() - 1;
    if (key == "kind") {
      if (vals != 1) throw ConfigError("kind takes one tag");
      cur->kind = toks[1];
      saw_kind = true;
    } else if (key == "n") {
      if (vals == 0) throw ConfigError("n grid is empty");
      cur->n_grid.clear();
      for (std::size_t i = 1; i < toks.size(); ++i)
        cur->n_grid.push_back(static_cast<std::size_t>(parse_u64(toks[i], "n")));
      saw_n = true;
    } else if (key == "p") {
      if (vals == 0) throw ConfigError("p grid is empty");
      cur->p_grid.clear();
      for (std::size_t i = 1; i < toks.size(); ++i) {
        try {
          cur->p_grid.push_back(ExponentP::parse(toks[i]));
        } catch (const std::exception& e) {
          throw ConfigError(std::string("bad p value: ") + e.what());
        }
      }
      saw_p = true;
    } else if (key == "mode") {
      if (vals != 1 || (toks[1] != "witness" && toks[1] != "search"))
        throw ConfigError("mode must be witness or search");
      cur->mode = toks[1] == "witness" ? RunMode::Witness : RunMode::Search;
    } else if (key == "seed") {
      if (vals != 1) throw ConfigError("seed takes one integer");
      cur->seed = parse_u64(toks[1], "seed");
    } else if (key == "out") {
      if (vals != 1) throw ConfigError("out takes one path");
      cur->out_dir = toks[1];
    } else if (key == "max_iterations") {
      if (vals != 1) throw ConfigError("max_iterations takes one integer");
      cur->solver.max_iterations = static_cast<std::size_t>(parse_u64(toks[1], key));
    } else if (key == "restarts") {
      if (vals != 1) throw ConfigError("restarts takes one integer");
      cur->solver.restarts = static_cast<std::size_t>(parse_u64(toks[1], key));
    } else if (key == "tolerance") {
      if (vals != 1) throw ConfigError("tolerance takes one number");
      cur->solver.tolerance = parse_double(toks[1], key);
    } else if (key == "timings") {
      if (vals != 1 || (toks[1] != "on" && toks[1] != "off"))
        throw ConfigError("timings must be on or off");
      cur->timings = toks[1] == "on";
    } else {
      throw ConfigError("unknown config key: " + key);
    }
  }
  if (cur) throw ConfigError("unterminated experiment section " + cur->name);
  if (configs.empty()) throw ConfigError("config defines no experiments");
  return configs;
}

std::vector<ExperimentConfig> parse_config_file(const std::string& path) {
  return parse_config_text(read_file_or_throw(path));
}

void validate_config(const ExperimentConfig& config) {
  if (config.name.empty()) throw ConfigError("experiment name is empty");
  for (char c : config.name)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
      throw ConfigError("experiment name must be alphanumeric/underscore/dash: " + config.name);
  if (!is_known_kind(config.kind))
    throw ConfigError("unknown kind " + config.kind + " in experiment " + config.name);
  if (config.n_grid.empty()) throw ConfigError(config.name + ": n grid is empty");
  for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
    if (config.n_grid[i] < 1) throw ConfigError(config.name + ": n must be >= 1");
    if (i && config.n_grid[i] <= config.n_grid[i - 1])
      throw ConfigError(config.name + ": n grid must be strictly ascending");
  }
  if (config.p_grid.empty()) throw ConfigError(config.name + ": p grid is empty");
  if (config.solver.max_iterations < 1)
    throw ConfigError(config.name + ": max_iterations must be >= 1");
  if (!(config.solver.tolerance > 0.0))
    throw ConfigError(config.name + ": tolerance must be positive");
  if (!is_structural_kind(config.kind)) {
    const InequalityKind kind = parse_inequality_kind(config.kind);
    if (config.mode == RunMode::Witness) {
      const bool supported = kind == InequalityKind::BgLower ||
                             kind == InequalityKind::Stein ||
                             kind == InequalityKind::DoobDual ||
                             kind == InequalityKind::HmaxGap;
      if (!supported)
        throw ConfigError(config.name + ": kind " + config.kind +
                          " has no closed-form witness; use mode search");
    }
    if (kind == InequalityKind::TransformWeak)
      for (const ExponentP& p : config.p_grid)
        if (!(p == ExponentP(1.0)))
          throw ConfigError(config.name + ": TRANSFORM_WEAK needs p = 1");
  }
}

void write_config(std::ostream& os, std::span<const ExperimentConfig> configs) {
  for (const ExperimentConfig& c : configs) {
    os << "experiment " << c.name << " {\n";
    os << "  kind " << c.kind << "\n";
    os << "  n";
    for (std::size_t n : c.n_grid) os << ' ' << n;
    os << "\n  p";
    for (const ExponentP& p : c.p_grid) os << ' ' << p.str();
    os << "\n";
    os << "  mode " << (c.mode == RunMode::Witness ? "witness" : "search") << "\n";
    os << "  seed " << c.seed << "\n";
    os << "  out " << c.out_dir << "\n";
    os << "  max_iterations " << c.solver.max_iterations << "\n";
    os << "  restarts " << c.solver.restarts << "\n";
    os << "  tolerance " << fmt17(c.solver.tolerance) << "\n";
    os << "  timings " << (c.timings ? "on" : "off") << "\n";
    os << "}\n";
  }
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config, std::size_t jobs) {
  validate_config(config);
  fs::create_directories(config.out_dir);

  struct Cell {
    std::size_t n;
    ExponentP p;
  };
  std::vector<Cell> cells;
  for (std::size_t n : config.n_grid)
    for (const ExponentP& p : config.p_grid) cells.push_back(Cell{n, p});

  std::vector<std::optional<CellResult>> slots(cells.size());
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      CellResult r = evaluate_cell(config, i, cells[i].n, cells[i].p);
      {
        const std::lock_guard<std::mutex> lk(mu);
        slots[i] = std::move(r);
      }
      cv.notify_all();
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(jobs, cells.size()));
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work);

  const fs::path dir(config.out_dir);
  std::ofstream csv(dir / (config.name + ".csv"));
  if (!csv) {
    for (auto& th : pool) th.join();
    throw ConfigError("cannot write results into " + config.out_dir);
  }
  csv << kCsvHeader << "\n";
  csv.flush();
  std::ofstream wit;
  if (!is_structural_kind(config.kind)) {
    wit.open(dir / (config.name + ".witness"));
    if (!wit) {
      for (auto& th : pool) th.join();
      throw ConfigError("cannot write witness file into " + config.out_dir);
    }
  }

  std::vector<ResultRow> rows;
  rows.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    std::unique_lock<std::mutex> lk(mu);
    cv.wait(lk, [&] { return slots[i].has_value(); });
    CellResult r = std::move(*slots[i]);
    slots[i].reset();
    lk.unlock();
    csv << csv_line(r.row) << "\n";
    csv.flush();
    if (wit.is_open()) {
      // One record per row, failed cells included (an empty placeholder
      // keeps witness indices aligned with row indices).
      ConstantEstimate rec;
      if (r.record) {
        rec = std::move(*r.record);
      } else {
        rec.kind = parse_inequality_kind(config.kind);
        rec.n = r.row.n;
        rec.p = r.row.p;
        rec.lower_bound = r.row.bound;
        rec.converged = false;
        rec.seed = derive_seed(config.seed, i);
      }
      write_witness_records(wit, std::span<const ConstantEstimate>(&rec, 1));
      wit.flush();
    }
    rows.push_back(std::move(r.row));
  }
  for (auto& th : pool) th.join();

  const std::vector<FitSummary> fits = compute_fits(config, rows);
  {
    std::ofstream json_out(dir / (config.name + ".json"));
    json_out << report_json_string(rows, fits);
  }
  for (const ExponentP& p : config.p_grid) {
    std::ofstream dat(dir / (config.name + "_" + config.kind + "_p" + p.str() + ".dat"));
    for (const ResultRow& r : rows)
      if (r.p == p) dat << r.n << ' ' << fmt17(r.bound) << "\n";
  }
  return rows;
}

std::string rows_to_csv(std::span<const ResultRow> rows) {
  std::ostringstream os;
  os << kCsvHeader << "\n";
  for (const ResultRow& r : rows) os << csv_line(r) << "\n";
  return os.str();
}

std::vector<ResultRow> rows_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw ConfigError("unexpected CSV header: " + line);
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != 7) throw ConfigError("bad CSV row: " + line);
    ResultRow r;
    r.kind = f[0];
    r.n = static_cast<std::size_t>(parse_u64(f[1], "n"));
    r.p = ExponentP::parse(f[2]);
    r.bound = parse_double(f[3], "bound");
    r.seconds = parse_double(f[4], "seconds");
    r.iterations = static_cast<std::size_t>(parse_u64(f[5], "iterations"));
    r.witness_ref = f[6];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string report_json_string(std::span<const ResultRow> rows,
                               std::span<const FitSummary> fits) {
  ordered_json j;
  j["rows"] = ordered_json::array();
  for (const ResultRow& r : rows) {
    ordered_json o;
    o["kind"] = r.kind;
    o["n"] = r.n;
    o["p"] = r.p.str();
    o["bound"] = r.bound;
    o["seconds"] = r.seconds;
    o["iterations"] = r.iterations;
    o["witness_ref"] = r.witness_ref;
    o["converged"] = r.converged;
    j["rows"].push_back(std::move(o));
  }
  j["fits"] = ordered_json::array();
  for (const FitSummary& f : fits) {
    ordered_json o;
    o["experiment"] = f.experiment;
    o["kind"] = f.kind;
    o["p"] = f.p.str();
    o["model"] = "LOG_POWER";
    o["exponent"] = f.fit.exponent;
    o["prefactor"] = f.fit.prefactor;
    o["r_squared"] = f.fit.r_squared;
    o["points"] = f.points;
    j["fits"].push_back(std::move(o));
  }
  return j.dump(2) + "\n";
}

std::vector<ResultRow> rows_from_json_string(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  std::vector<ResultRow> rows;
  for (const auto& o : j.at("rows")) {
    ResultRow r;
    r.kind = o.at("kind").get<std::string>();
    r.n = o.at("n").get<std::size_t>();
    r.p = ExponentP::parse(o.at("p").get<std::string>());
    r.bound = o.at("bound").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                      : o.at("bound").get<double>();
    r.seconds = o.at("seconds").get<double>();
    r.iterations = o.at("iterations").get<std::size_t>();
    r.witness_ref = o.at("witness_ref").get<std::string>();
    r.converged = o.at("converged").get<bool>();
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<FitSummary> compute_fits(const ExperimentConfig& config,
                                     std::span<const ResultRow> rows) {
  std::vector<FitSummary> fits;
  for (const ExponentP& p : config.p_grid) {
    std::vector<std::pair<double, double>> pts;
    for (const ResultRow& r : rows)
      if (r.p == p && std::isfinite(r.bound) && r.bound > 0.0)
        pts.emplace_back(static_cast<double>(r.n), r.bound);
    if (pts.size() < 4) continue;
    try {
      FitSummary s;
      s.experiment = config.name;
      s.kind = config.kind;
      s.p = p;
      s.fit = growth_fit(pts, GrowthModel::LogPower);
      s.points = pts.size();
      fits.push_back(std::move(s));
    } catch (const std::invalid_argument&) {
      // degenerate series (e.g. a single repeated n); no fit emitted
    }
  }
  return fits;
}

int verify_results(const std::string& out_dir, std::ostream& log) {
  const fs::path dir(out_dir);
  const std::vector<ExperimentConfig> configs =
      parse_config_file((dir / "config.resolved").string());
  int rc = 0;
  for (const ExperimentConfig& exp : configs) {
    const std::vector<ResultRow> rows =
        rows_from_csv(read_file_or_throw(dir / (exp.name + ".csv")));
    std::vector<ConstantEstimate> records;
    const fs::path wit_path = dir / (exp.name + ".witness");
    if (fs::exists(wit_path)) {
      std::ifstream f(wit_path);
      records = read_witness_records(f);
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const ResultRow& row = rows[i];
      double expected = std::numeric_limits<double>::quiet_NaN();
      try {
        if (row.witness_ref == "-") {
          expected = recompute_recipe_bound(exp, i, row);
        } else {
          const std::size_t hash = row.witness_ref.rfind('#');
          if (hash == std::string::npos)
            throw ConfigError("bad witness_ref " + row.witness_ref);
          const std::size_t idx =
              static_cast<std::size_t>(parse_u64(row.witness_ref.substr(hash + 1), "index"));
          if (idx >= records.size())
            throw ConfigError("witness index out of range in " + row.witness_ref);
          const ConstantEstimate& rec = records[idx];
          SolverOptions opts = exp.solver;
          opts.seed = rec.seed;
          expected = ratio(rec.kind, rec.witness, rec.p, opts);
        }
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception&) {
        expected = std::numeric_limits<double>::quiet_NaN();
      }
      const bool both_nan = std::isnan(expected) && std::isnan(row.bound);
      const bool close =
          std::abs(expected - row.bound) <= 1e-8 * std::max(std::abs(row.bound), 1e-300);
      if (!both_nan && !close) {
        log << exp.name << " row " << i << " (" << row.kind << ", n=" << row.n
            << ", p=" << row.p.str() << "): stored " << fmt17(row.bound) << ", replay "
            << fmt17(expected) << "\n";
        rc = 2;
      }
    }
  }
  return rc;
}

}  // namespace ncm
