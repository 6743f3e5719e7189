// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "liptree/enumerate.hpp"
#include "liptree/model.hpp"
#include "liptree/sampling.hpp"
#include "liptree/verify.hpp"

using namespace liptree;
namespace fs = std::filesystem;

namespace {

// Each criterion returns true on success and writes its measurements to detail.
struct Criterion {
  int id;
  std::string title;
  double limit_seconds;
  std::function<bool(std::ostream& detail)> run;
};

std::vector<LevelTable> with_top_exact(std::vector<LevelTable> tables, std::vector<mpz_class> top) {
  const LevelTable& last = tables.back();
  tables.back() = LevelTable::from_exact(last.params(), last.level(), std::move(top));
  return tables;
}

std::vector<LevelTable> with_top_log(std::vector<LevelTable> tables, std::vector<double> top) {
  const LevelTable& last = tables.back();
  tables.back() = LevelTable::from_log(last.params(), last.level(), std::move(top), last.normalizer());
  return tables;
}

const std::vector<ModelParams>& oracle_instances() {
  static const std::vector<ModelParams> instances{ModelParams(2, 1, 2), ModelParams(2, 2, 2),
                                                  ModelParams(2, 3, 2), ModelParams(3, 1, 2),
                                                  ModelParams(2, 1, 3)};
  return instances;
}

bool oracle_equivalence(std::ostream& detail) {
  bool ok = true;
  for (const auto& params : oracle_instances()) {
    const auto tables = build_tables(params, Backend::Exact);
    const CountProfile profile = enumerate_functions(params);
    const std::int64_t radius = support_bound(params);
    for (std::int64_t t = -radius - 1; t <= radius + 1; ++t) {
      if (tables.back().exact_weight(t) != profile.count(t)) {
        detail << " mismatch " << to_string(params) << " t=" << t;
        ok = false;
      }
    }
  }
  const CountProfile small = enumerate_functions(ModelParams(2, 1, 2));
  const bool profile_ok = small.total == 19 && small.count(0) == 9 && small.count(1) == 4 &&
                          small.count(-1) == 4 && small.count(2) == 1 && small.count(-2) == 1;
  detail << " |L_1(2,2)|=" << small.total.get_str() << " instances=" << oracle_instances().size();
  return ok && profile_ok;
}

bool base_cases(std::ostream& detail) {
  for (int d = 2; d <= 5; ++d) {
    for (int lip = 1; lip <= 20; ++lip) {
      const auto dist = root_distribution(build_tables(ModelParams(d, lip, 1), Backend::Exact));
      if (dist.total_count() != 2 * lip + 1) {
        detail << " d=" << d << " M=" << lip << " total=" << dist.total_count().get_str();
        return false;
      }
    }
  }
  detail << " d=2..5, M=1..20";
  return true;
}

// Exact tables level by level until the next level would exceed the budget.
std::vector<LevelTable> exact_prefix(const ModelParams& params, std::size_t budget_bits) {
  std::vector<LevelTable> tables{base_table(params, Backend::Exact)};
  while (tables.back().level() < params.depth()) {
    try {
      tables.push_back(level_step(tables.back(), params, budget_bits));
    } catch (const ResourceLimitError&) {
      break;
    }
  }
  return tables;
}

bool is_grid_claim(const std::string& claim) {
  return claim == claims::kUnimodality || claim == claims::kShiftDecay ||
         claim == claims::kDoubleExponentialTail || claim == claims::kRootZeroBound;
}

bool inequality_suite(std::ostream& detail) {
  std::size_t log_reports = 0, log_failures = 0;
  for (const auto& report : verify_claim_grid(ClaimGrid{})) {
    if (!is_grid_claim(report.claim)) continue;
    ++log_reports;
    if (report.failed()) {
      ++log_failures;
      detail << " LOG FAIL " << report.claim << " " << to_string(report.params);
    }
  }

  // Exact cross-check on every depth whose weights fit a reduced budget.
  constexpr std::size_t kExactBudget = std::size_t{1} << 18;
  std::size_t exact_reports = 0, exact_failures = 0, disagreements = 0;
  int min_exact_depth = 1000;
  for (int d = 2; d <= 5; ++d) {
    for (int lip = 1; lip <= 20; ++lip) {
      const ModelParams params(d, lip, 30);
      const auto exact = exact_prefix(params, kExactBudget);
      const auto logs = build_tables(params, Backend::Log);
      min_exact_depth = std::min(min_exact_depth, exact.back().level());
      for (std::size_t k = 1; k <= exact.size(); ++k) {
        const auto exact_reports_k = verify_tables(std::span(exact).first(k));
        const auto log_reports_k = verify_tables(std::span(logs).first(k));
        for (std::size_t i = 0; i < exact_reports_k.size(); ++i) {
          if (!is_grid_claim(exact_reports_k[i].claim)) continue;
          ++exact_reports;
          if (exact_reports_k[i].failed()) {
            ++exact_failures;
            detail << " EXACT FAIL " << exact_reports_k[i].claim << " d=" << d << " M=" << lip
                   << " k=" << k;
          }
          if (exact_reports_k[i].status != log_reports_k[i].status) ++disagreements;
        }
      }
    }
  }
  detail << " log_reports=" << log_reports << " log_failures=" << log_failures
         << " exact_reports=" << exact_reports << " exact_failures=" << exact_failures
         << " verdict_disagreements=" << disagreements << " exact_depth>=" << min_exact_depth;
  return log_failures == 0 && exact_failures == 0 && disagreements == 0;
}

bool strengthened_d2(std::ostream& detail) {
  bool ok = true;
  double worst = INFINITY;
  for (int lip = 11; lip <= 20; ++lip) {
    const auto report = check_strengthened_d2(build_tables(ModelParams(2, lip, 30), Backend::Log));
    worst = std::min(worst, report.worst_margin);
    if (report.status != CheckStatus::Pass) {
      ok = false;
      detail << " M=" << lip << " " << to_string(report.status);
    }
  }
  for (int lip = 1; lip <= 10; ++lip) {
    if (!check_alpha_condition(0.9, 2, lip)) {
      ok = false;
      detail << " alpha condition false at M=" << lip;
    }
  }
  detail << " worst_margin=" << worst << " alpha_condition M=1..10";
  return ok;
}

bool continuous_tail(std::ostream& detail) {
  bool ok = true;
  double worst = INFINITY;
  for (int d : {2, 3}) {
    for (int k : {4, 6, 8}) {
      const auto report = check_continuous_tail(d, k, 64);
      if (report.parts.size() != static_cast<std::size_t>(2 * (k - 1))) ok = false;
      for (const auto& part : report.parts) {
        if (part.status == CheckStatus::Fail || part.worst_margin < 0.0) {
          ok = false;
          detail << " d=" << d << " k=" << k << " " << part.name << " margin=" << part.worst_margin;
        }
        if (part.status == CheckStatus::Pass) worst = std::min(worst, part.worst_margin);
      }
    }
  }
  detail << " worst_log_margin=" << worst;
  return ok;
}

bool sampler_uniformity(std::ostream& detail) {
  const ModelParams params(2, 1, 2);
  const auto tables = build_tables(params, Backend::Exact);
  std::map<std::vector<std::int64_t>, std::uint64_t> counts;
  for_each_function(params, kDefaultEnumerationBudget, [&](std::span<const std::int64_t> values) {
    counts.emplace(std::vector<std::int64_t>(values.begin(), values.end()), 0);
  });
  const std::uint64_t n = 100000;
  std::uint64_t root_zero = 0;
  bool valid = true;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto f = sample_exact(tables, RngSeed{derive_seed(RngSeed{20240611}, i)});
    auto it = counts.find(f.values);
    if (it == counts.end()) {
      valid = false;
      continue;
    }
    ++it->second;
    root_zero += f.values[0] == 0;
  }
  const double expected = static_cast<double>(n) / counts.size();
  double chi2 = 0.0;
  for (const auto& [values, count] : counts) chi2 += std::pow(count - expected, 2) / expected;
  const double fraction = static_cast<double>(root_zero) / n;
  detail << " functions=" << counts.size() << " chi2=" << chi2 << " (df=18, limit 42.3)"
         << " p(root=0)=" << fraction << " target=" << 9.0 / 19;
  return valid && counts.size() == 19 && chi2 < 42.3 && std::abs(fraction - 9.0 / 19) <= 0.01;
}

bool gibbs_vs_density(std::ostream& detail) {
  constexpr int kGrid = 128;
  constexpr int kBinSteps = kGrid / 8;  // bins of width 1/8
  constexpr int kDepth = 2;
  const auto points = continuous_root_density(2, kDepth, kGrid);
  const int bins = 2 * kDepth * 8;
  std::vector<double> model(bins, 0.0), empirical(bins, 0.0);
  for (const auto& p : points) {
    const double mass = p.density / kGrid;
    const long t = std::lround(p.x * kGrid) + static_cast<long>(kDepth) * kGrid;
    const long bin = t / kBinSteps;
    if (t % kBinSteps == 0) {
      // A grid point on a bin edge splits its mass between the two neighbours.
      model[std::max(bin - 1, 0L)] += mass / 2;
      model[std::min(bin, static_cast<long>(bins) - 1)] += mass / 2;
    } else {
      model[bin] += mass;
    }
  }
  const std::uint64_t chains = 10000;
  const auto roots = continuous_root_samples(2, kDepth, 1000, chains, RngSeed{7});
  for (double x : roots) {
    int bin = static_cast<int>(std::floor((x + kDepth) * 8));
    bin = std::clamp(bin, 0, bins - 1);
    empirical[bin] += 1.0 / chains;
  }
  double tv = 0.0;
  for (int b = 0; b < bins; ++b) tv += std::abs(model[b] - empirical[b]) / 2;

  const auto coarse = continuous_root_density(2, kDepth, 64);
  double sup = 0.0;
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    sup = std::max(sup, std::abs(points[2 * i].density - coarse[i].density));
  }
  detail << " tv=" << tv << " (limit 0.05, " << bins << " bins) sup_norm_64_vs_128=" << sup
         << " (limit 0.02)";
  return tv <= 0.05 && sup <= 0.02;
}

bool backend_agreement(std::ostream& detail) {
  auto instances = oracle_instances();
  instances.push_back(ModelParams(2, 3, 5));
  double worst = 0.0;
  for (const auto& params : instances) {
    const auto exact = build_tables(params, Backend::Exact);
    const auto logs = build_tables(params, Backend::Log);
    for (std::size_t j = 0; j < exact.size(); ++j) {
      for (std::int64_t t = -exact[j].radius(); t <= exact[j].radius(); ++t) {
        const double truth = log_of(exact[j].exact_weight(t));
        const double rel = std::abs(logs[j].log_weight(t) - truth) / std::max(1.0, std::abs(truth));
        worst = std::max(worst, rel);
      }
    }
  }
  detail << " worst_relative_error=" << worst << " (limit 1e-9)";
  return worst <= 1e-9;
}

bool performance(std::ostream& detail) {
  const auto start = std::chrono::steady_clock::now();
  const auto tables = build_tables(ModelParams(2, 10, 100), Backend::Log);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  detail << " build_tables(d=2, M=10, k=100, log)=" << seconds << "s radius="
         << tables.back().radius();
  return seconds < 1.0 && tables.back().radius() == 1000;
}

int tool_status(const std::string& args, const fs::path& cache) {
  const std::string command = "\"" + std::string(LIPTREE_TOOL_PATH) + "\" " + args +
                              " --cache-dir \"" + cache.string() + "\" >/dev/null 2>&1";
  const int raw = std::system(command.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

bool negative_controls(std::ostream& detail) {
  bool ok = true;
  auto expect_fail = [&](const char* name, const VerificationReport& report) {
    detail << " " << name << "=" << to_string(report.status);
    ok = ok && report.failed();
  };

  const auto d2 = build_tables(ModelParams(2, 1, 3), Backend::Exact);
  expect_fail("unimodality", check_unimodality(with_top_exact(d2, {289, 300, 25, 1})));
  expect_fail("decay", check_decay(with_top_exact(d2, {289, 196, 196, 1})));
  const auto bad_tail = with_top_exact(d2, {289, 196, 289, 1});
  expect_fail("double_exponential", check_double_exponential(root_distribution(bad_tail)));
  const auto bad_zero = with_top_exact(d2, {10000, 196, 25, 1});
  expect_fail("root_zero", check_root_zero_bound(root_distribution(bad_zero), bad_zero.back()));

  const auto d2m12 = build_tables(ModelParams(2, 12, 3), Backend::Exact);
  std::vector<mpz_class> top(d2m12.back().exact_weights().begin(), d2m12.back().exact_weights().end());
  top[15] = top[3];
  expect_fail("strengthened", check_strengthened_d2(with_top_exact(d2m12, top)));

  const auto flat = build_tables(ModelParams(2, 8, 9), Backend::Log);
  const std::vector<double> uniform(flat.back().log_weights().size(), 0.0);
  const std::vector<double> xs{7.0};
  expect_fail("continuous_tail", check_continuous_tail(root_distribution(with_top_log(flat, uniform)), xs));

  // CLI exit-code contract, run through the built binary.
  const fs::path cache = fs::temp_directory_path() / "liptree_acceptance_cache";
  fs::remove_all(cache);
  const int ok_code = tool_status("verify --d 2 --M 1 --k 3 --backend exact", cache);
  const int usage_code = tool_status("table --d 1 --M 1 --k 3", cache);
  const int budget_code =
      tool_status("table --d 2 --M 1 --k 30 --backend exact --budget-bits 4096", cache);

  // A corrupted cache file must make verify exit 1.
  const fs::path cached = cache / "tables_d2_M1_k3_exact_v1.json";
  std::ostringstream doc;
  {
    std::ifstream in(cached);
    doc << in.rdbuf();
  }
  std::string text = doc.str();
  const auto pos = text.find("\"196\"");
  int corrupt_code = -1;
  if (pos != std::string::npos) {
    text.replace(pos, 5, "\"300\"");
    std::ofstream(cached) << text;
    corrupt_code = tool_status("verify --d 2 --M 1 --k 3 --backend exact", cache);
  }
  fs::remove_all(cache);
  detail << " exit codes: ok=" << ok_code << " invalid=" << usage_code << " budget=" << budget_code
         << " corrupted=" << corrupt_code;
  return ok && ok_code == 0 && usage_code == 2 && budget_code == 1 && corrupt_code == 1;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "oracle equivalence", 10.0, oracle_equivalence},
      {2, "base cases |L_M(d,1)| = 2M+1", 1.0, base_cases},
      {3, "inequality suite over d=2..5, M=1..20, k=1..30", 120.0, inequality_suite},
      {4, "strengthened d=2 bound and alpha condition", 30.0, strengthened_d2},
      {5, "continuous tail proxy at grid_M=64", 60.0, continuous_tail},
      {6, "exact sampler uniformity", 30.0, sampler_uniformity},
      {7, "Gibbs sampler vs density oracle", 120.0, gibbs_vs_density},
      {8, "exact and log backends agree", 10.0, backend_agreement},
      {9, "log tables at d=2, M=10, k=100 in under 1 s", 1.0, performance},
      {10, "negative controls and CLI exit codes", 60.0, negative_controls},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    std::ostringstream detail;
    bool passed = false;
    const auto start = std::chrono::steady_clock::now();
    try {
      passed = c.run(detail);
    } catch (const std::exception& e) {
      detail << " exception: " << e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > c.limit_seconds) {
      passed = false;
      detail << " over time limit " << c.limit_seconds << "s";
    }
    failures += !passed;
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.2fs", seconds);
    std::cout << (passed ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.title << " ["
              << timing << "]" << detail.str() << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
