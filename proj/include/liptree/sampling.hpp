// Samplers for grounded Lipschitz functions.
//
// Discrete functions are drawn exactly by ancestral sampling: the root value
// from G(., k), then every child of a vertex at height j with value t from
// G(s, j - 1) restricted to s in [t - M, t + M]. Continuous functions are
// approximated by systematic-scan Gibbs sweeps over the polytope L_inf(d, k).
//
// Randomness: each sample i of a run with seed s uses its own mt19937_64
// stream seeded with derive_seed(s, i). Outputs are reproducible within a
// build; no cross-platform bit compatibility is promised.

#ifndef LIPTREE_SAMPLING_HPP
#define LIPTREE_SAMPLING_HPP

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <vector>

#include <gmpxx.h>

#include "liptree/model.hpp"

namespace liptree {

struct RngSeed {
  std::uint64_t value = 0;
};

/// splitmix64 finalizer applied to (seed, stream).
std::uint64_t derive_seed(RngSeed seed, std::uint64_t stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform on [0, bound) for a positive big integer, by rejection.
  mpz_class uniform_below(const mpz_class& bound);

 private:
  std::mt19937_64 engine_;
};

struct DiscreteTreeFunction {
  ModelParams params;
  std::vector<std::int64_t> values;  // breadth-first; values[0] is the root
};

struct ContinuousTreeFunction {
  int branching;
  int depth;
  std::vector<double> values;
};

/// Every edge changes by at most M and every leaf is 0.
bool is_grounded_lipschitz(const DiscreteTreeFunction& f);
/// Every edge changes by at most 1 + tolerance and every leaf is exactly 0.
bool is_grounded_lipschitz(const ContinuousTreeFunction& f, double tolerance = 1e-12);

/// Uniform draw from L_M(d, k); tables must cover levels 1..k.
DiscreteTreeFunction sample_exact(std::span<const LevelTable> tables, RngSeed seed);
DiscreteTreeFunction sample_exact(std::span<const LevelTable> tables, Rng& rng);
/// Uniform draw from the functions in L_M(d, k) with f(root) = root_value.
DiscreteTreeFunction sample_exact_given_root(std::span<const LevelTable> tables,
                                             std::int64_t root_value, Rng& rng);

/// Gibbs chain from the all-zero function; requires sweeps >= 1.
ContinuousTreeFunction sample_continuous_gibbs(int branching, int depth, int sweeps,
                                               RngSeed seed);
ContinuousTreeFunction sample_continuous_gibbs(int branching, int depth, int sweeps, Rng& rng);
/// One systematic sweep over internal vertices in breadth-first order.
void gibbs_sweep(ContinuousTreeFunction& f, Rng& rng);

/// Root values of n exact samples, sample i drawn from stream derive_seed(seed, i).
std::map<std::int64_t, std::uint64_t> empirical_root_distribution(
    std::span<const LevelTable> tables, std::uint64_t n, RngSeed seed);

/// Root values of n independent Gibbs chains, chain i seeded like above.
std::vector<double> continuous_root_samples(int branching, int depth, int sweeps,
                                            std::uint64_t n, RngSeed seed);

}  // namespace liptree

#endif  // LIPTREE_SAMPLING_HPP
