// Counting tables for grounded M-Lipschitz functions on rooted d-ary trees.
//
// A level table holds G(t, j), the number of grounded M-Lipschitz functions on
// the depth-j tree whose root takes the value t. Tables are symmetric in t, so
// only t >= 0 is stored and negative arguments are mirrored on read.

#ifndef LIPTREE_MODEL_HPP
#define LIPTREE_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace liptree {

/// Raised when a computation would exceed a configured resource cap.
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Branching factor d, Lipschitz constant M and depth k of the tree model.
class ModelParams {
 public:
  /// Throws std::invalid_argument naming the violated bound.
  ModelParams(int branching, int lipschitz, int depth);

  int branching() const { return branching_; }
  int lipschitz() const { return lipschitz_; }
  int depth() const { return depth_; }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  int branching_;
  int lipschitz_;
  int depth_;
};

std::string to_string(const ModelParams& params);

/// Largest |f(v)| attainable: k edges, each step at most M.
std::int64_t support_bound(const ModelParams& params);

enum class Backend { Exact, Log };

std::string to_string(Backend backend);
/// Accepts "exact" or "log"; throws std::invalid_argument otherwise.
Backend parse_backend(const std::string& name);

inline constexpr std::size_t kDefaultBudgetBits = std::size_t{1} << 26;

class LevelTable {
 public:
  /// Exact table from G(0..jM, j). Throws if the length is wrong or an
  /// entry inside the support is not positive.
  static LevelTable from_exact(const ModelParams& params, int level,
                               std::vector<mpz_class> weights);
  /// Log table from l(0..jM) = log G(t, j) - normalizer.
  static LevelTable from_log(const ModelParams& params, int level,
                             std::vector<double> log_weights,
                             double normalizer);

  const ModelParams& params() const { return params_; }
  int level() const { return level_; }
  Backend backend() const { return backend_; }
  /// jM; weights vanish beyond it.
  std::int64_t radius() const {
    return static_cast<std::int64_t>(level_) * params_.lipschitz();
  }
  bool in_support(std::int64_t t) const;

  /// G(t, j); zero outside the support. Exact backend only.
  mpz_class exact_weight(std::int64_t t) const;
  /// log G(t, j) - normalizer(); -inf outside the support.
  double relative_log_weight(std::int64_t t) const;
  /// log G(t, j); -inf outside the support.
  double log_weight(std::int64_t t) const;
  /// c_j for the log backend, 0 for the exact backend.
  double normalizer() const { return normalizer_; }

  /// Stored entries for t = 0..jM.
  std::span<const mpz_class> exact_weights() const { return exact_; }
  std::span<const double> log_weights() const { return log_; }

 private:
  LevelTable(const ModelParams& params, int level, Backend backend);

  ModelParams params_;
  int level_;
  Backend backend_;
  std::vector<mpz_class> exact_;
  std::vector<double> log_;
  double normalizer_ = 0.0;
};

/// G(t, 1) = 1 for |t| <= M.
LevelTable base_table(const ModelParams& params, Backend backend);

/// One application of G(t, j) = (sum_{|i| <= M} G(t + i, j - 1))^d.
/// The exact backend throws ResourceLimitError if a weight would need more
/// than budget_bits bits.
LevelTable level_step(const LevelTable& prev, const ModelParams& params,
                      std::size_t budget_bits = kDefaultBudgetBits);

/// Tables for levels 1..k; element j - 1 holds level j.
std::vector<LevelTable> build_tables(const ModelParams& params, Backend backend,
                                     std::size_t budget_bits = kDefaultBudgetBits);

/// Law of the root value for a uniformly random function in L_M(d, k).
class RootDistribution {
 public:
  const ModelParams& params() const { return params_; }
  std::int64_t radius() const { return static_cast<std::int64_t>(logp_.size()) - 1; }

  /// log p(t); -inf outside the support.
  double log_probability(std::int64_t t) const;
  double probability(std::int64_t t) const;
  /// log |L_M(d, k)|.
  double total_log_count() const { return total_log_count_; }

  bool is_exact() const { return total_count_.has_value(); }
  /// |L_M(d, k)|; exact distributions only.
  const mpz_class& total_count() const;
  /// G(t, k); exact distributions only.
  mpz_class exact_count(std::int64_t t) const;
  /// p(t) as a reduced fraction; exact distributions only.
  mpq_class exact_probability(std::int64_t t) const;

  friend RootDistribution root_distribution(std::span<const LevelTable> tables);

 private:
  explicit RootDistribution(const ModelParams& params) : params_(params) {}

  ModelParams params_;
  std::vector<double> logp_;  // t = 0..kM
  double total_log_count_ = 0.0;
  std::optional<mpz_class> total_count_;
  std::vector<mpz_class> counts_;
};

/// Root law from the last table in the sequence.
RootDistribution root_distribution(std::span<const LevelTable> tables);

/// Natural logarithm of a nonnegative big integer; -inf for zero.
double log_of(const mpz_class& value);

}  // namespace liptree

#endif  // LIPTREE_MODEL_HPP
