#include "liptree/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "liptree/logmath.hpp"

namespace liptree {

ModelParams::ModelParams(int branching, int lipschitz, int depth)
    : branching_(branching), lipschitz_(lipschitz), depth_(depth) {
  if (branching < 2) {
    throw std::invalid_argument("branching factor d must be >= 2 (got " +
                                std::to_string(branching) + ")");
  }
  if (lipschitz < 1) {
    throw std::invalid_argument("Lipschitz constant M must be >= 1 (got " +
                                std::to_string(lipschitz) + ")");
  }
  if (depth < 1) {
    throw std::invalid_argument("depth k must be >= 1 (got " + std::to_string(depth) +
                                ")");
  }
}

std::string to_string(const ModelParams& params) {
  std::ostringstream os;
  os << "d=" << params.branching() << " M=" << params.lipschitz()
     << " k=" << params.depth();
  return os.str();
}

std::int64_t support_bound(const ModelParams& params) {
  return static_cast<std::int64_t>(params.depth()) * params.lipschitz();
}

std::string to_string(Backend backend) {
  return backend == Backend::Exact ? "exact" : "log";
}

Backend parse_backend(const std::string& name) {
  if (name == "exact") return Backend::Exact;
  if (name == "log") return Backend::Log;
  throw std::invalid_argument("unknown backend '" + name + "' (expected exact or log)");
}

double log_of(const mpz_class& value) {
  if (sgn(value) <= 0) return kNegInf;
  long exponent = 0;
  const double mantissa = mpz_get_d_2exp(&exponent, value.get_mpz_t());
  return std::log(mantissa) + static_cast<double>(exponent) * std::log(2.0);
}

// ---------------------------------------------------------------------------
// LevelTable

LevelTable::LevelTable(const ModelParams& params, int level, Backend backend)
    : params_(params), level_(level), backend_(backend) {
  if (level < 1 || level > params.depth()) {
    throw std::invalid_argument("table level " + std::to_string(level) +
                                " outside [1, k] for " + to_string(params));
  }
}

LevelTable LevelTable::from_exact(const ModelParams& params, int level,
                                  std::vector<mpz_class> weights) {
  LevelTable table(params, level, Backend::Exact);
  if (static_cast<std::int64_t>(weights.size()) != table.radius() + 1) {
    throw std::invalid_argument("level " + std::to_string(level) + " expects " +
                                std::to_string(table.radius() + 1) + " weights, got " +
                                std::to_string(weights.size()));
  }
  for (std::size_t t = 0; t < weights.size(); ++t) {
    if (sgn(weights[t]) <= 0) {
      throw std::invalid_argument("weight at t=" + std::to_string(t) + " of level " +
                                  std::to_string(level) + " is not positive");
    }
  }
  table.exact_ = std::move(weights);
  return table;
}

LevelTable LevelTable::from_log(const ModelParams& params, int level,
                                std::vector<double> log_weights, double normalizer) {
  LevelTable table(params, level, Backend::Log);
  if (static_cast<std::int64_t>(log_weights.size()) != table.radius() + 1) {
    throw std::invalid_argument("level " + std::to_string(level) + " expects " +
                                std::to_string(table.radius() + 1) +
                                " log-weights, got " + std::to_string(log_weights.size()));
  }
  for (std::size_t t = 0; t < log_weights.size(); ++t) {
    if (!std::isfinite(log_weights[t])) {
      throw std::invalid_argument("log-weight at t=" + std::to_string(t) + " of level " +
                                  std::to_string(level) + " is not finite");
    }
  }
  if (!std::isfinite(normalizer)) {
    throw std::invalid_argument("normalizer of level " + std::to_string(level) +
                                " is not finite");
  }
  table.log_ = std::move(log_weights);
  table.normalizer_ = normalizer;
  return table;
}

bool LevelTable::in_support(std::int64_t t) const {
  return t >= -radius() && t <= radius();
}

mpz_class LevelTable::exact_weight(std::int64_t t) const {
  if (backend_ != Backend::Exact) {
    throw std::logic_error("exact weights requested from a log-backend table");
  }
  if (!in_support(t)) return 0;
  return exact_[static_cast<std::size_t>(t < 0 ? -t : t)];
}

double LevelTable::relative_log_weight(std::int64_t t) const {
  if (!in_support(t)) return kNegInf;
  const auto index = static_cast<std::size_t>(t < 0 ? -t : t);
  return backend_ == Backend::Log ? log_[index] : log_of(exact_[index]);
}

double LevelTable::log_weight(std::int64_t t) const {
  return relative_log_weight(t) + normalizer_;
}

// ---------------------------------------------------------------------------
// Recursion

LevelTable base_table(const ModelParams& params, Backend backend) {
  const auto size = static_cast<std::size_t>(params.lipschitz()) + 1;
  if (backend == Backend::Exact) {
    return LevelTable::from_exact(params, 1, std::vector<mpz_class>(size, 1));
  }
  return LevelTable::from_log(params, 1, std::vector<double>(size, 0.0), 0.0);
}

namespace {

LevelTable exact_step(const LevelTable& prev, const ModelParams& params,
                      std::size_t budget_bits) {
  const std::int64_t lip = params.lipschitz();
  const std::int64_t prev_radius = prev.radius();
  const std::int64_t radius = prev_radius + lip;
  const auto power = static_cast<unsigned long>(params.branching());

  // prefix[i] = sum of prev(s) for s in [-prev_radius, -prev_radius + i).
  std::vector<mpz_class> prefix(static_cast<std::size_t>(2 * prev_radius + 2));
  prefix[0] = 0;
  for (std::int64_t s = -prev_radius; s <= prev_radius; ++s) {
    const auto i = static_cast<std::size_t>(s + prev_radius);
    prefix[i + 1] = prefix[i] + prev.exact_weight(s);
  }
  auto prefix_at = [&](std::int64_t s) -> const mpz_class& {
    const std::int64_t clamped = std::clamp(s, -prev_radius, prev_radius + 1);
    return prefix[static_cast<std::size_t>(clamped + prev_radius)];
  };

  std::vector<mpz_class> weights(static_cast<std::size_t>(radius) + 1);
  for (std::int64_t t = 0; t <= radius; ++t) {
    const mpz_class window = prefix_at(t + lip + 1) - prefix_at(t - lip);
    const std::size_t bits = mpz_sizeinbase(window.get_mpz_t(), 2) * power;
    if (bits > budget_bits) {
      throw ResourceLimitError("exact table for " + to_string(params) + " at level " +
                               std::to_string(prev.level() + 1) + " needs about " +
                               std::to_string(bits) + " bits per weight, over the budget of " +
                               std::to_string(budget_bits) + " bits");
    }
    mpz_pow_ui(weights[static_cast<std::size_t>(t)].get_mpz_t(), window.get_mpz_t(), power);
  }
  return LevelTable::from_exact(params, prev.level() + 1, std::move(weights));
}

LevelTable log_step(const LevelTable& prev, const ModelParams& params) {
  const std::int64_t lip = params.lipschitz();
  const std::int64_t radius = prev.radius() + lip;
  const double power = params.branching();
  const auto prev_weights = prev.log_weights();
  auto prev_at = [&](std::int64_t s) {
    return prev_weights[static_cast<std::size_t>(s < 0 ? -s : s)];
  };

  std::vector<double> weights(static_cast<std::size_t>(radius) + 1);
  double top = kNegInf;
  for (std::int64_t t = 0; t <= radius; ++t) {
    const std::int64_t lo = std::max(t - lip, -prev.radius());
    const std::int64_t hi = std::min(t + lip, prev.radius());
    double anchor = kNegInf;
    for (std::int64_t s = lo; s <= hi; ++s) anchor = std::max(anchor, prev_at(s));
    double sum = 0.0;
    for (std::int64_t s = lo; s <= hi; ++s) sum += std::exp(prev_at(s) - anchor);
    const double value = power * (anchor + std::log(sum));
    weights[static_cast<std::size_t>(t)] = value;
    top = std::max(top, value);
  }
  for (double& w : weights) w -= top;
  return LevelTable::from_log(params, prev.level() + 1, std::move(weights),
                              power * prev.normalizer() + top);
}

}  // namespace

LevelTable level_step(const LevelTable& prev, const ModelParams& params,
                      std::size_t budget_bits) {
  if (!(prev.params() == params)) {
    throw std::invalid_argument("table built for " + to_string(prev.params()) +
                                " stepped with " + to_string(params));
  }
  if (prev.level() >= params.depth()) {
    throw std::invalid_argument("cannot step past depth k=" +
                                std::to_string(params.depth()));
  }
  return prev.backend() == Backend::Exact ? exact_step(prev, params, budget_bits)
                                          : log_step(prev, params);
}

std::vector<LevelTable> build_tables(const ModelParams& params, Backend backend,
                                     std::size_t budget_bits) {
  std::vector<LevelTable> tables;
  tables.reserve(static_cast<std::size_t>(params.depth()));
  tables.push_back(base_table(params, backend));
  while (tables.back().level() < params.depth()) {
    tables.push_back(level_step(tables.back(), params, budget_bits));
  }
  return tables;
}

// ---------------------------------------------------------------------------
// RootDistribution

double RootDistribution::log_probability(std::int64_t t) const {
  if (t < -radius() || t > radius()) return kNegInf;
  return logp_[static_cast<std::size_t>(t < 0 ? -t : t)];
}

double RootDistribution::probability(std::int64_t t) const {
  return std::exp(log_probability(t));
}

const mpz_class& RootDistribution::total_count() const {
  if (!total_count_) throw std::logic_error("root distribution is not exact");
  return *total_count_;
}

mpz_class RootDistribution::exact_count(std::int64_t t) const {
  if (!total_count_) throw std::logic_error("root distribution is not exact");
  if (t < -radius() || t > radius()) return 0;
  return counts_[static_cast<std::size_t>(t < 0 ? -t : t)];
}

mpq_class RootDistribution::exact_probability(std::int64_t t) const {
  mpq_class p(exact_count(t), total_count());
  p.canonicalize();
  return p;
}

RootDistribution root_distribution(std::span<const LevelTable> tables) {
  if (tables.empty()) throw std::invalid_argument("root_distribution needs at least one table");
  const LevelTable& top = tables.back();
  const ModelParams params(top.params().branching(), top.params().lipschitz(), top.level());
  RootDistribution dist(params);
  const auto size = static_cast<std::size_t>(top.radius()) + 1;
  dist.logp_.resize(size);

  if (top.backend() == Backend::Exact) {
    mpz_class total = top.exact_weights()[0];
    for (std::size_t t = 1; t < size; ++t) total += 2 * top.exact_weights()[t];
    const double log_total = log_of(total);
    for (std::size_t t = 0; t < size; ++t) {
      dist.logp_[t] = log_of(top.exact_weights()[t]) - log_total;
    }
    dist.total_log_count_ = log_total;
    dist.counts_.assign(top.exact_weights().begin(), top.exact_weights().end());
    dist.total_count_ = std::move(total);
    return dist;
  }

  const auto rel = top.log_weights();
  // Mass of the symmetric support: w(0) + 2 * sum_{t >= 1} w(t).
  std::vector<double> terms(size);
  terms[0] = rel[0];
  for (std::size_t t = 1; t < size; ++t) terms[t] = rel[t] + std::log(2.0);
  const double log_mass = log_sum_exp(terms);
  for (std::size_t t = 0; t < size; ++t) dist.logp_[t] = rel[t] - log_mass;
  dist.total_log_count_ = top.normalizer() + log_mass;
  return dist;
}

}  // namespace liptree
