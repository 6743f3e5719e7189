#include "liptree/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "liptree/logmath.hpp"

namespace liptree {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Exponents d^s up to this size are compared exactly; beyond it the powers of
// alpha are compared in log space.
constexpr double kMaxExactExponent = 4096;

// Running worst-case slack over the entries of one inequality.
class MarginTracker {
 public:
  void vacuous() { ++vacuous_; }

  void record(Witness where, double margin, bool violated) {
    ++checked_;
    if (violated) {
      if (!failed_ || margin < fail_margin_) {
        fail_margin_ = margin;
        fail_witness_ = where;
      }
      failed_ = true;
    }
    if (!worst_witness_ || margin < worst_margin_) {
      worst_margin_ = margin;
      worst_witness_ = where;
    }
  }

  CheckStatus status() const {
    if (failed_) return CheckStatus::Fail;
    return checked_ == 0 ? CheckStatus::Vacuous : CheckStatus::Pass;
  }
  double worst_margin() const { return failed_ ? fail_margin_ : worst_margin_; }
  std::optional<Witness> witness() const { return failed_ ? fail_witness_ : worst_witness_; }

  MarginPart part(std::string name) const {
    return {std::move(name), status(), worst_margin(), witness()};
  }

  void merge(const MarginTracker& other) {
    vacuous_ += other.vacuous_;
    checked_ += other.checked_;
    if (other.failed_ && (!failed_ || other.fail_margin_ < fail_margin_)) {
      fail_margin_ = other.fail_margin_;
      fail_witness_ = other.fail_witness_;
      failed_ = true;
    }
    if (other.worst_witness_ && (!worst_witness_ || other.worst_margin_ < worst_margin_)) {
      worst_margin_ = other.worst_margin_;
      worst_witness_ = other.worst_witness_;
    }
  }

 private:
  std::size_t vacuous_ = 0;
  std::size_t checked_ = 0;
  bool failed_ = false;
  double worst_margin_ = kInf;
  std::optional<Witness> worst_witness_;
  double fail_margin_ = kInf;
  std::optional<Witness> fail_witness_;
};

VerificationReport make_report(std::string claim, const ModelParams& params, Backend backend,
                               const MarginTracker& tracker) {
  return {std::move(claim), params,
          backend,          tracker.status(),
          tracker.worst_margin(), tracker.witness(),
          {},               {}};
}

// Records lhs_factor * G(lhs_t) <= rhs_factor * G(rhs_t) at one level.
// Factors are positive rationals; a zero left side is vacuous.
void compare_scaled(const LevelTable& table, std::int64_t lhs_t, const mpq_class& lhs_factor,
                    std::int64_t rhs_t, const mpq_class& rhs_factor, Witness where,
                    MarginTracker& tracker) {
  if (!table.in_support(lhs_t)) {
    tracker.vacuous();
    return;
  }
  const double lhs = table.relative_log_weight(lhs_t) + std::log(lhs_factor.get_d());
  const double rhs = table.relative_log_weight(rhs_t) + std::log(rhs_factor.get_d());
  const double margin = rhs - lhs;
  bool violated = false;
  if (table.backend() == Backend::Exact) {
    // lhs_factor * G(a) <= rhs_factor * G(b), cleared of denominators.
    const mpz_class left = lhs_factor.get_num() * rhs_factor.get_den() * table.exact_weight(lhs_t);
    const mpz_class right = rhs_factor.get_num() * lhs_factor.get_den() * table.exact_weight(rhs_t);
    violated = left > right;
  } else {
    violated = margin < -log_tolerance(lhs, rhs);
  }
  tracker.record(where, margin, violated);
}

}  // namespace

std::string to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass:
      return "pass";
    case CheckStatus::Fail:
      return "fail";
    case CheckStatus::Vacuous:
      return "vacuous";
  }
  return "unknown";
}

double decay_constant(int branching) {
  return branching == 2 ? 0.9 : std::pow(0.75, branching);
}

mpq_class decay_constant_exact(int branching) {
  if (branching == 2) return mpq_class(9, 10);
  mpz_class num;
  mpz_class den;
  mpz_ui_pow_ui(num.get_mpz_t(), 3, static_cast<unsigned long>(branching));
  mpz_ui_pow_ui(den.get_mpz_t(), 4, static_cast<unsigned long>(branching));
  mpq_class alpha(num, den);
  alpha.canonicalize();
  return alpha;
}

// ---------------------------------------------------------------------------

namespace {

void scan_unimodality(const LevelTable& table, MarginTracker& tracker) {
  const mpq_class one(1);
  for (std::int64_t t = 0; t <= table.radius(); ++t) {
    compare_scaled(table, t + 1, one, t, one, {t, table.level()}, tracker);
  }
}

}  // namespace

VerificationReport check_unimodality(const LevelTable& table) {
  MarginTracker tracker;
  scan_unimodality(table, tracker);
  return make_report(claims::kUnimodality, table.params(), table.backend(), tracker);
}

VerificationReport check_unimodality(std::span<const LevelTable> tables) {
  if (tables.empty()) throw std::invalid_argument("no tables to check");
  MarginTracker tracker;
  for (const LevelTable& table : tables) scan_unimodality(table, tracker);
  return make_report(claims::kUnimodality, tables.front().params(), tables.front().backend(),
                     tracker);
}

VerificationReport check_decay(std::span<const LevelTable> tables) {
  if (tables.empty()) throw std::invalid_argument("no tables to check");
  const ModelParams& params = tables.front().params();
  const mpq_class alpha = decay_constant_exact(params.branching());
  const mpq_class one(1);
  const std::int64_t lip = params.lipschitz();
  MarginTracker tracker;
  for (const LevelTable& table : tables) {
    for (std::int64_t t = 1; t <= table.radius(); ++t) {
      compare_scaled(table, t + lip, one, t, alpha, {t, table.level()}, tracker);
    }
  }
  auto report = make_report(claims::kShiftDecay, params, tables.front().backend(), tracker);
  report.note = "alpha=" + alpha.get_str();
  return report;
}

VerificationReport check_strengthened_d2(std::span<const LevelTable> tables) {
  if (tables.empty()) throw std::invalid_argument("no tables to check");
  const ModelParams& params = tables.front().params();
  if (params.branching() != 2) {
    throw std::invalid_argument("strengthened decay check applies to d=2 only (got d=" +
                                std::to_string(params.branching()) + ")");
  }
  const std::int64_t lip = params.lipschitz();
  const std::int64_t m = (lip + 3) / 4;
  const mpq_class alpha(9, 10);
  const mpq_class alpha_sq(81, 100);
  const mpq_class one(1);

  MarginTracker below_m;
  MarginTracker from_m;
  MarginTracker single;
  for (const LevelTable& table : tables) {
    for (std::int64_t t = 1; t <= table.radius(); ++t) {
      const Witness where{t, table.level()};
      compare_scaled(table, t + lip, one, t, t < m ? alpha : alpha_sq, where,
                     t < m ? below_m : from_m);
      compare_scaled(table, t + lip, one, t, alpha, where, single);
    }
  }

  MarginTracker piecewise = below_m;
  piecewise.merge(from_m);
  const bool small_m = lip <= 10;
  auto report = make_report(claims::kStrengthenedDecayD2, params, tables.front().backend(),
                            small_m ? single : piecewise);
  report.parts.push_back(below_m.part("t<m (alpha=9/10)"));
  report.parts.push_back(from_m.part("t>=m (alpha^2=81/100)"));
  report.parts.push_back(single.part("all t (alpha=9/10)"));
  report.note = "m=" + std::to_string(m) +
                (small_m ? "; M<=10: verdict from the single 9/10 bound"
                         : "; verdict from the piecewise bound");
  return report;
}

bool check_alpha_condition(double alpha, int branching, int lipschitz) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1)");
  }
  if (branching < 2 || lipschitz < 1) throw std::invalid_argument("need d >= 2 and M >= 1");
  const double inv_m = 1.0 / lipschitz;
  const double ratio = (1.0 + alpha + (1.0 - alpha + alpha * alpha) * inv_m) / (2.0 + inv_m);
  return std::pow(ratio, branching) <= alpha;
}

VerificationReport check_double_exponential(const RootDistribution& dist) {
  const ModelParams& params = dist.params();
  const std::int64_t lip = params.lipschitz();
  const int d = params.branching();
  const mpq_class alpha = decay_constant_exact(d);
  const double log_alpha = std::log(alpha.get_d());
  MarginTracker tracker;
  if (lip + 1 > dist.radius()) tracker.vacuous();
  for (std::int64_t t = 1; lip + t <= dist.radius(); ++t) {
    const Witness where{lip + t, params.depth()};
    const auto s = static_cast<double>((t - 1) / lip);
    const double exponent = std::pow(static_cast<double>(d), s);
    const double lhs = dist.log_probability(lip + t) - dist.log_probability(0);
    const double rhs = exponent * log_alpha;
    const double margin = rhs - lhs;
    bool violated = false;
    if (dist.is_exact() && exponent <= kMaxExactExponent) {
      const auto e = static_cast<unsigned long>(exponent);
      mpz_class num_pow;
      mpz_class den_pow;
      mpz_pow_ui(num_pow.get_mpz_t(), alpha.get_num_mpz_t(), e);
      mpz_pow_ui(den_pow.get_mpz_t(), alpha.get_den_mpz_t(), e);
      violated = dist.exact_count(lip + t) * den_pow > num_pow * dist.exact_count(0);
    } else {
      violated = margin < -log_tolerance(lhs, rhs);
    }
    tracker.record(where, margin, violated);
  }
  auto report = make_report(claims::kDoubleExponentialTail, params,
                            dist.is_exact() ? Backend::Exact : Backend::Log, tracker);
  report.note = "alpha=" + alpha.get_str();
  return report;
}

VerificationReport check_root_zero_bound(const RootDistribution& dist, const LevelTable& top) {
  const ModelParams& params = dist.params();
  if (top.level() != params.depth() || top.params().branching() != params.branching() ||
      top.params().lipschitz() != params.lipschitz()) {
    throw std::invalid_argument("level table does not match the root distribution");
  }
  const int d = params.branching();
  const std::int64_t lip = params.lipschitz();
  const Witness at_zero{0, params.depth()};

  // p(0) <= 1 / (1 + 2^(1-d) M)  <=>  G(0) (2^(d-1) + M) <= 2^(d-1) |L|.
  MarginTracker mass;
  {
    const double lhs = dist.log_probability(0);
    const double rhs = -std::log1p(std::ldexp(static_cast<double>(lip), 1 - d));
    bool violated = false;
    if (dist.is_exact()) {
      const mpz_class half_pow = mpz_class(1) << static_cast<unsigned long>(d - 1);
      violated = dist.exact_count(0) * (half_pow + lip) > half_pow * dist.total_count();
    } else {
      violated = rhs - lhs < -log_tolerance(lhs, rhs);
    }
    mass.record(at_zero, rhs - lhs, violated);
  }

  // G(0, k) <= 2^d G(M, k).
  MarginTracker shift;
  compare_scaled(top, 0, mpq_class(1), lip,
                 mpq_class(mpz_class(1) << static_cast<unsigned long>(d)), {lip, top.level()},
                 shift);

  MarginTracker combined = mass;
  combined.merge(shift);
  auto report = make_report(claims::kRootZeroBound, params,
                            dist.is_exact() ? Backend::Exact : Backend::Log, combined);
  report.parts.push_back(mass.part("p(0) <= 1/(1+2^(1-d)M)"));
  report.parts.push_back(shift.part("G(M,k) >= 2^-d G(0,k)"));
  return report;
}

VerificationReport check_continuous_tail(int branching, int depth, int grid_M,
                                         std::span<const double> xs) {
  const ModelParams params(branching, grid_M, depth);
  return check_continuous_tail(root_distribution(build_tables(params, Backend::Log)), xs);
}

VerificationReport check_continuous_tail(const RootDistribution& dist,
                                         std::span<const double> xs) {
  const ModelParams& params = dist.params();
  const int branching = params.branching();
  const int depth = params.depth();
  const int grid_M = params.lipschitz();
  std::vector<double> grid(xs.begin(), xs.end());
  if (grid.empty()) {
    grid.push_back(0.5);
    for (double x = 1.0; x <= depth - 1 + 1e-12; x += 0.5) grid.push_back(x);
  }
  for (double x : grid) {
    if (!(x > 0.0)) throw std::invalid_argument("tail points x must be positive");
    if (grid_M * x < 1.0 - 1e-12) {
      throw std::invalid_argument("grid_M must be >= 1/x for every tested x");
    }
  }

  const double log_alpha = std::log(decay_constant(branching));
  const double log_prefactor = (branching + 2) * std::log(2.0);

  MarginTracker overall;
  std::vector<MarginPart> parts;
  for (double x : grid) {
    MarginTracker at_x;
    // Pr(f_M / M >= 1 + x) sums p(M + t) over integers t >= x M.
    const auto first = grid_M + static_cast<std::int64_t>(std::ceil(x * grid_M - 1e-9));
    const Witness where{first, depth};
    if (first > dist.radius()) {
      at_x.vacuous();
    } else {
      std::vector<double> terms;
      for (std::int64_t u = first; u <= dist.radius(); ++u) {
        terms.push_back(dist.log_probability(u));
      }
      const double lhs = log_sum_exp(terms);
      const double rhs =
          log_prefactor + std::pow(static_cast<double>(branching), std::ceil(x) - 1) * log_alpha;
      at_x.record(where, rhs - lhs, rhs - lhs < -log_tolerance(lhs, rhs));
    }
    std::ostringstream name;
    name << "x=" << x;
    parts.push_back(at_x.part(name.str()));
    overall.merge(at_x);
  }

  auto report = make_report(claims::kContinuousTailProxy, params,
                            dist.is_exact() ? Backend::Exact : Backend::Log, overall);
  report.note = "proxy at grid_M=" + std::to_string(grid_M);
  report.parts = std::move(parts);
  return report;
}

std::vector<VerificationReport> verify_tables(std::span<const LevelTable> tables) {
  if (tables.empty()) throw std::invalid_argument("no tables to check");
  std::vector<VerificationReport> reports;
  reports.push_back(check_unimodality(tables));
  reports.push_back(check_decay(tables));
  if (tables.front().params().branching() == 2) reports.push_back(check_strengthened_d2(tables));
  const RootDistribution dist = root_distribution(tables);
  reports.push_back(check_double_exponential(dist));
  reports.push_back(check_root_zero_bound(dist, tables.back()));
  return reports;
}

std::vector<VerificationReport> verify_claim_grid(const ClaimGrid& grid) {
  std::vector<VerificationReport> reports;
  for (int d : grid.branchings) {
    for (int lip = 1; lip <= grid.max_lipschitz; ++lip) {
      const auto tables = build_tables(ModelParams(d, lip, grid.max_depth), Backend::Log);
      reports.push_back(check_unimodality(tables));
      reports.push_back(check_decay(tables));
      if (d == 2) reports.push_back(check_strengthened_d2(tables));
      for (std::size_t k = 1; k <= tables.size(); ++k) {
        const auto prefix = std::span(tables).first(k);
        const RootDistribution dist = root_distribution(prefix);
        reports.push_back(check_double_exponential(dist));
        reports.push_back(check_root_zero_bound(dist, prefix.back()));
      }
    }
  }
  return reports;
}

// ---------------------------------------------------------------------------

double total_variation(const RootDistribution& a, const RootDistribution& b) {
  const std::int64_t radius = std::max(a.radius(), b.radius());
  double sum = 0.0;
  for (std::int64_t t = -radius; t <= radius; ++t) {
    sum += std::abs(a.probability(t) - b.probability(t));
  }
  return 0.5 * sum;
}

std::vector<DepthScanRow> scan_depth_limit(int branching, int lipschitz, int k_max) {
  if (k_max < 3) throw std::invalid_argument("k_max must be >= 3");
  const ModelParams params(branching, lipschitz, k_max + 2);
  const auto tables = build_tables(params, Backend::Log);
  std::vector<RootDistribution> laws;
  laws.reserve(tables.size());
  for (std::size_t j = 1; j <= tables.size(); ++j) {
    laws.push_back(root_distribution(std::span(tables).first(j)));
  }
  std::vector<DepthScanRow> rows;
  for (int k = 1; k <= k_max; ++k) {
    const auto i = static_cast<std::size_t>(k - 1);
    rows.push_back({k, total_variation(laws[i], laws[i + 1]),
                    total_variation(laws[i], laws[i + 2])});
  }
  return rows;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json margin_json(double margin) {
  if (std::isfinite(margin)) return margin;
  return nullptr;
}

nlohmann::json witness_json(const std::optional<Witness>& witness) {
  if (!witness) return nullptr;
  return {{"t", witness->t}, {"level", witness->level}};
}

}  // namespace

nlohmann::json to_json(const VerificationReport& report) {
  nlohmann::json out = {
      {"claim", report.claim},
      {"d", report.params.branching()},
      {"M", report.params.lipschitz()},
      {"k", report.params.depth()},
      {"backend", to_string(report.backend)},
      {"status", to_string(report.status)},
      {"worst_margin", margin_json(report.worst_margin)},
      {"witness", witness_json(report.witness)},
  };
  if (!report.note.empty()) out["note"] = report.note;
  if (!report.parts.empty()) {
    nlohmann::json parts = nlohmann::json::array();
    for (const MarginPart& part : report.parts) {
      parts.push_back({{"name", part.name},
                       {"status", to_string(part.status)},
                       {"worst_margin", margin_json(part.worst_margin)},
                       {"witness", witness_json(part.witness)}});
    }
    out["parts"] = std::move(parts);
  }
  return out;
}

}  // namespace liptree
