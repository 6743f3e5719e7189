#include "cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "liptree/enumerate.hpp"
#include "liptree/model.hpp"
#include "liptree/sampling.hpp"
#include "liptree/table_cache.hpp"
#include "liptree/verify.hpp"

namespace liptree::cli {

namespace {

namespace fs = std::filesystem;

// Thrown for flag combinations that parse but make no sense together.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::string subcommand;
  int d = 0;
  int M = 0;
  int k = 0;
  int k_max = 0;
  bool continuous = false;
  bool all_claims = false;
  std::string backend = "log";
  std::uint64_t seed = 0;
  std::uint64_t n = 1;
  int sweeps = 1000;
  int grid_M = 64;
  std::vector<double> xs;
  std::string out = "-";
  std::string format;
  std::string cache_dir;
  std::size_t budget_bits = kDefaultBudgetBits;
};

std::string default_cache_dir() {
  if (const char* env = std::getenv("LIPTREE_CACHE_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return ".liptree-cache";
}

std::string fmt17(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

void require_format(const RunConfig& config, std::initializer_list<const char*> allowed) {
  for (const char* f : allowed) {
    if (config.format == f) return;
  }
  std::string names;
  for (const char* f : allowed) names += names.empty() ? f : std::string(", ") + f;
  throw UsageError("--format for '" + config.subcommand + "' must be one of: " + names);
}

// Single writer for the command's main output.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (path != "-") {
      if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw std::runtime_error("cannot open " + path + " for writing");
      stream_ = &file_;
    }
  }
  std::ostream& stream() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

// Loads matching tables from the cache directory, or builds and stores them.
std::vector<LevelTable> obtain_tables(const RunConfig& config, fs::path* cache_path = nullptr) {
  const ModelParams params(config.d, config.M, config.k);
  const Backend backend = parse_backend(config.backend);
  const fs::path path = fs::path(config.cache_dir) / cache_file_name(params, backend);
  if (cache_path != nullptr) *cache_path = path;
  if (auto cached = load_cached_tables(path, params, backend)) return std::move(*cached);
  auto tables = build_tables(params, backend, config.budget_bits);
  write_tables(path, tables);
  return tables;
}

int cmd_table(const RunConfig& config, std::ostream& out) {
  fs::path path;
  const auto tables = obtain_tables(config, &path);
  if (config.out != "-") {
    write_tables(config.out, tables);
  }
  out << path.string() << '\n';
  return kExitOk;
}

int cmd_dist(const RunConfig& config, std::ostream& out) {
  const auto tables = obtain_tables(config);
  const RootDistribution dist = root_distribution(tables);
  Output output(config.out, out);
  std::ostream& os = output.stream();
  const LevelTable& top = tables.back();
  if (config.format == "json") {
    nlohmann::json rows = nlohmann::json::array();
    for (std::int64_t t = -dist.radius(); t <= dist.radius(); ++t) {
      rows.push_back({{"t", t}, {"log_weight", top.log_weight(t)},
                      {"probability", dist.probability(t)}});
    }
    nlohmann::json doc = {{"d", config.d}, {"M", config.M}, {"k", config.k},
                          {"backend", config.backend},
                          {"total_log_count", dist.total_log_count()},
                          {"rows", std::move(rows)}};
    if (dist.is_exact()) doc["total_count"] = dist.total_count().get_str();
    os << doc.dump(1) << '\n';
    return kExitOk;
  }
  os << "t,log_weight,probability\n";
  for (std::int64_t t = -dist.radius(); t <= dist.radius(); ++t) {
    os << t << ',' << fmt17(top.log_weight(t)) << ',' << fmt17(dist.probability(t)) << '\n';
  }
  return kExitOk;
}

int cmd_sample(const RunConfig& config, std::ostream& out) {
  const auto tables = obtain_tables(config);
  Output output(config.out, out);
  std::ostream& os = output.stream();
  for (std::uint64_t i = 0; i < config.n; ++i) {
    Rng rng(derive_seed(RngSeed{config.seed}, i));
    const DiscreteTreeFunction f = sample_exact(tables, rng);
    nlohmann::json line = {{"seed", config.seed}, {"index", i},   {"d", config.d},
                           {"M", config.M},       {"k", config.k}, {"values", f.values}};
    os << line.dump() << '\n';
  }
  return kExitOk;
}

int cmd_sample_cont(const RunConfig& config, std::ostream& out) {
  if (config.sweeps < 1) throw UsageError("--sweeps must be >= 1");
  Output output(config.out, out);
  std::ostream& os = output.stream();
  for (std::uint64_t i = 0; i < config.n; ++i) {
    Rng rng(derive_seed(RngSeed{config.seed}, i));
    const ContinuousTreeFunction f = sample_continuous_gibbs(config.d, config.k, config.sweeps, rng);
    // Written by hand so every value carries 17 significant digits.
    os << "{\"seed\":" << config.seed << ",\"index\":" << i << ",\"d\":" << config.d
       << ",\"M\":\"continuous\",\"k\":" << config.k << ",\"sweeps\":" << config.sweeps
       << ",\"values\":[";
    for (std::size_t v = 0; v < f.values.size(); ++v) {
      if (v > 0) os << ',';
      os << fmt17(f.values[v]);
    }
    os << "]}\n";
  }
  return kExitOk;
}

int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& err) {
  std::vector<VerificationReport> reports;
  if (config.all_claims) {
    reports = verify_claim_grid(ClaimGrid{});
  } else if (config.continuous) {
    reports.push_back(check_continuous_tail(config.d, config.k, config.grid_M, config.xs));
  } else {
    reports = verify_tables(obtain_tables(config));
  }
  nlohmann::json doc = nlohmann::json::array();
  bool any_failed = false;
  for (const auto& report : reports) {
    doc.push_back(to_json(report));
    if (report.failed()) {
      any_failed = true;
      err << "FAIL " << report.claim << " (" << to_string(report.params) << ", "
          << to_string(report.backend) << ")";
      if (report.witness) {
        err << " witness t=" << report.witness->t << " level=" << report.witness->level;
      }
      err << " margin=" << fmt17(report.worst_margin) << '\n';
    }
  }
  Output output(config.out, out);
  output.stream() << doc.dump(1) << '\n';
  return any_failed ? kExitFailure : kExitOk;
}

int cmd_scan(const RunConfig& config, std::ostream& out) {
  const auto rows = scan_depth_limit(config.d, config.M, config.k_max);
  Output output(config.out, out);
  std::ostream& os = output.stream();
  if (config.format == "json") {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& row : rows) {
      doc.push_back({{"k", row.depth}, {"tv_next", row.tv_next},
                     {"tv_same_parity", row.tv_same_parity}});
    }
    os << doc.dump(1) << '\n';
    return kExitOk;
  }
  os << "k,tv_next,tv_same_parity\n";
  for (const auto& row : rows) {
    os << row.depth << ',' << fmt17(row.tv_next) << ',' << fmt17(row.tv_same_parity) << '\n';
  }
  return kExitOk;
}

int cmd_density(const RunConfig& config, std::ostream& out) {
  const auto points = continuous_root_density(config.d, config.k, config.grid_M);
  Output output(config.out, out);
  std::ostream& os = output.stream();
  if (config.format == "json") {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& p : points) doc.push_back({{"x", p.x}, {"density", p.density}});
    os << doc.dump(1) << '\n';
    return kExitOk;
  }
  os << "x,density\n";
  for (const auto& p : points) os << fmt17(p.x) << ',' << fmt17(p.density) << '\n';
  return kExitOk;
}

void add_common(CLI::App* sub, RunConfig& config, bool with_lipschitz, bool with_depth) {
  sub->add_option("--d", config.d, "branching factor (>= 2)")->required();
  if (with_lipschitz) sub->add_option("--M", config.M, "Lipschitz constant (>= 1)");
  if (with_depth) sub->add_option("--k", config.k, "tree depth (>= 1)");
  sub->add_option("--out", config.out, "output path, '-' for stdout");
  sub->add_option("--format", config.format, "output format: json, csv or jsonl");
}

void add_cache(CLI::App* sub, RunConfig& config) {
  sub->add_option("--backend", config.backend, "exact or log")
      ->check(CLI::IsMember({"exact", "log"}));
  sub->add_option("--cache-dir", config.cache_dir,
                  "table cache directory (default $LIPTREE_CACHE_DIR or .liptree-cache)");
  sub->add_option("--budget-bits", config.budget_bits, "bit-size cap per exact weight");
}

void check_config(RunConfig& config, const CLI::App& app) {
  const std::string& cmd = config.subcommand;
  if (config.cache_dir.empty()) config.cache_dir = default_cache_dir();

  auto need = [&](bool present, const char* flag) {
    if (!present) throw UsageError("'" + cmd + "' requires " + flag);
  };
  const CLI::App* sub = app.get_subcommand(cmd);
  auto given = [&](const char* flag) { return sub->count(flag) > 0; };

  if (cmd == "verify" && config.all_claims) {
    if (given("--d") || given("--M") || given("--k") || config.continuous) {
      throw UsageError("--all-claims runs the full grid and takes no model flags");
    }
    require_format(config, {"json"});
    return;
  }
  if (config.d < 2) throw UsageError("--d must be >= 2 (got " + std::to_string(config.d) + ")");

  if (cmd == "verify" && config.continuous) {
    if (given("--M")) throw UsageError("--M is not allowed with --continuous");
    need(given("--k"), "--k");
    if (config.k < 1) throw UsageError("--k must be >= 1");
    if (config.grid_M < 1) throw UsageError("--grid-M must be >= 1");
    require_format(config, {"json"});
    return;
  }
  if (cmd == "verify" && given("--grid-M")) {
    throw UsageError("--grid-M is only meaningful with --continuous");
  }

  if (cmd == "sample-cont" || cmd == "density") {
    need(given("--k"), "--k");
    if (config.k < 1) throw UsageError("--k must be >= 1");
    if (cmd == "density") {
      if (config.grid_M < 8) throw UsageError("--grid-M must be >= 8");
      require_format(config, {"csv", "json"});
    } else {
      if (config.sweeps < 1) throw UsageError("--sweeps must be >= 1");
      require_format(config, {"jsonl"});
    }
    return;
  }
  if (cmd == "scan") {
    need(given("--M"), "--M");
    if (config.M < 1) throw UsageError("--M must be >= 1 (got " + std::to_string(config.M) + ")");
    if (config.k_max < 3) throw UsageError("--kmax must be >= 3");
    require_format(config, {"csv", "json"});
    return;
  }

  need(given("--M"), "--M");
  need(given("--k"), "--k");
  // Surfaces the violated bound with the model's own message.
  (void)ModelParams(config.d, config.M, config.k);
  if (cmd == "table") require_format(config, {"json"});
  if (cmd == "dist") require_format(config, {"csv", "json"});
  if (cmd == "sample") require_format(config, {"jsonl"});
  if (cmd == "verify") require_format(config, {"json"});
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact counting, sampling and inequality checks for grounded Lipschitz "
               "functions on rooted d-ary trees"};
  app.require_subcommand(1);
  RunConfig config;

  auto* table = app.add_subcommand("table", "build or refresh the cached level tables");
  add_common(table, config, true, true);
  add_cache(table, config);

  auto* dist = app.add_subcommand("dist", "root distribution as CSV (t, log_weight, probability)");
  add_common(dist, config, true, true);
  add_cache(dist, config);

  auto* sample = app.add_subcommand("sample", "exact uniform samples as JSON lines");
  add_common(sample, config, true, true);
  add_cache(sample, config);
  sample->add_option("--n", config.n, "number of samples");
  sample->add_option("--seed", config.seed, "64-bit seed");

  auto* sample_cont =
      app.add_subcommand("sample-cont", "Gibbs samples of continuous Lipschitz functions");
  add_common(sample_cont, config, false, true);
  sample_cont->add_option("--n", config.n, "number of chains");
  sample_cont->add_option("--seed", config.seed, "64-bit seed");
  sample_cont->add_option("--sweeps", config.sweeps, "Gibbs sweeps per chain");

  auto* verify = app.add_subcommand("verify", "check the inequalities, JSON report");
  add_common(verify, config, true, true);
  add_cache(verify, config);
  verify->add_flag("--continuous", config.continuous, "continuous-model tail bound via grid_M");
  verify->add_option("--grid-M", config.grid_M, "discretization used with --continuous");
  verify->add_option("--x", config.xs, "tail points for --continuous")->delimiter(',');
  verify->add_flag("--all-claims", config.all_claims,
                   "d in 2..5, M in 1..20, k in 1..30, log backend");
  // The grid mode takes no model flags.
  verify->get_option("--d")->required(false);

  auto* scan = app.add_subcommand("scan", "total variation between root laws across depths");
  add_common(scan, config, true, false);
  scan->add_option("--kmax", config.k_max, "largest depth k (>= 3)")->required();

  auto* density = app.add_subcommand("density", "rescaled root density at large M as CSV");
  add_common(density, config, false, true);
  density->add_option("--grid-M", config.grid_M, "discretization M");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInvalidParams;
  }

  for (auto* sub : app.get_subcommands()) config.subcommand = sub->get_name();
  if (config.format.empty()) {
    const std::string& cmd = config.subcommand;
    config.format = (cmd == "sample" || cmd == "sample-cont")             ? "jsonl"
                    : (cmd == "table" || cmd == "verify")                 ? "json"
                                                                           : "csv";
  }

  try {
    check_config(config, app);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalidParams;
  }

  try {
    const std::string& cmd = config.subcommand;
    if (cmd == "table") return cmd_table(config, out);
    if (cmd == "dist") return cmd_dist(config, out);
    if (cmd == "sample") return cmd_sample(config, out);
    if (cmd == "sample-cont") return cmd_sample_cont(config, out);
    if (cmd == "verify") return cmd_verify(config, out, err);
    if (cmd == "scan") return cmd_scan(config, out);
    if (cmd == "density") return cmd_density(config, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalidParams;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitInvalidParams;
}

}  // namespace liptree::cli
