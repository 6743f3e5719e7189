// Numerical checks of the inequalities satisfied by the level tables and the
// root law. Each check scans every applicable (t, level) pair and reports the
// smallest log-scale slack it saw.
//
// Exact tables are compared in exact integer arithmetic. Log tables are
// compared in log space and fail only on a violation larger than
// 1e-9 * max(1, |lhs|, |rhs|); the tolerance absorbs rounding, never slack.
// Entries whose left-hand side is zero are counted as vacuous.

#ifndef LIPTREE_VERIFY_HPP
#define LIPTREE_VERIFY_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "liptree/model.hpp"

namespace liptree {

enum class CheckStatus { Pass, Fail, Vacuous };

std::string to_string(CheckStatus status);

struct Witness {
  std::int64_t t;
  int level;
};

struct MarginPart {
  std::string name;
  CheckStatus status;
  double worst_margin;  // +inf when every entry was vacuous
  std::optional<Witness> witness;
};

struct VerificationReport {
  std::string claim;
  ModelParams params;
  Backend backend;
  CheckStatus status;
  double worst_margin;
  std::optional<Witness> witness;
  std::string note;
  std::vector<MarginPart> parts;

  bool failed() const { return status == CheckStatus::Fail; }
};

namespace claims {
inline constexpr const char* kUnimodality = "unimodality";
inline constexpr const char* kShiftDecay = "shift_decay";
inline constexpr const char* kStrengthenedDecayD2 = "strengthened_shift_decay_d2";
inline constexpr const char* kDoubleExponentialTail = "double_exponential_tail";
inline constexpr const char* kRootZeroBound = "root_zero_bound";
inline constexpr const char* kContinuousTailProxy = "continuous_tail_proxy";
}  // namespace claims

/// Decay constant for shifts by M: 9/10 when d = 2, (3/4)^d when d >= 3.
double decay_constant(int branching);
/// Same constant as a reduced fraction.
mpq_class decay_constant_exact(int branching);

/// G(t + 1, j) <= G(t, j) for all t >= 0.
VerificationReport check_unimodality(const LevelTable& table);
/// Unimodality of every table, merged into one report.
VerificationReport check_unimodality(std::span<const LevelTable> tables);

/// G(t + M, j) <= alpha G(t, j) for every level j and t >= 1.
VerificationReport check_decay(std::span<const LevelTable> tables);

/// d = 2 only. With m = ceil(M / 4): G(t + M, j) <= (9/10) G(t, j) for
/// 1 <= t < m and <= (81/100) G(t, j) for t >= m. The piecewise bound decides
/// the verdict for M >= 11; for M <= 10 the verdict is the single 9/10 bound
/// and the piecewise margins are informational. Throws std::invalid_argument
/// for d != 2.
VerificationReport check_strengthened_d2(std::span<const LevelTable> tables);

/// ((1 + a + (1 - a + a^2) / M) / (2 + 1/M))^d <= a, for 0 < a < 1.
bool check_alpha_condition(double alpha, int branching, int lipschitz);

/// p(M + t) <= alpha^(d^floor((t - 1) / M)) p(0) for t >= 1.
VerificationReport check_double_exponential(const RootDistribution& dist);

/// p(0) <= 1 / (1 + 2^(1-d) M) and G(M, k) >= 2^-d G(0, k).
VerificationReport check_root_zero_bound(const RootDistribution& dist, const LevelTable& top);

/// Pr(f(root) >= 1 + x) <= 2^(d+2) alpha^(d^(ceil(x) - 1)) for the continuous
/// model, evaluated on the rescaled law of L_{grid_M}(d, k). The default grid
/// is x = 0.5, 1, ..., k - 1 (just 0.5 when k = 1). Requires grid_M >= 1/x.
VerificationReport check_continuous_tail(int branching, int depth, int grid_M,
                                         std::span<const double> xs = {});
/// Same check on a given discrete root law, with grid_M taken as its M.
VerificationReport check_continuous_tail(const RootDistribution& dist,
                                         std::span<const double> xs = {});

/// Claims that apply to one set of discrete tables (levels 1..k).
std::vector<VerificationReport> verify_tables(std::span<const LevelTable> tables);

struct ClaimGrid {
  std::vector<int> branchings{2, 3, 4, 5};
  int max_lipschitz = 20;
  int max_depth = 30;
};

/// Log-backend sweep over the grid. For each (d, M) the table claims cover
/// levels 1..max_depth in one report each; the root-law claims get one report
/// per depth.
std::vector<VerificationReport> verify_claim_grid(const ClaimGrid& grid);

struct DepthScanRow {
  int depth;
  double tv_next;        // TV(L_k, L_{k+1})
  double tv_same_parity; // TV(L_k, L_{k+2})
};

double total_variation(const RootDistribution& a, const RootDistribution& b);

/// Distances between root laws at consecutive and same-parity depths, for
/// k = 1..k_max. Exploratory output only. Requires k_max >= 3.
std::vector<DepthScanRow> scan_depth_limit(int branching, int lipschitz, int k_max);

nlohmann::json to_json(const VerificationReport& report);

}  // namespace liptree

#endif  // LIPTREE_VERIFY_HPP
