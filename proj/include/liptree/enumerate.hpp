// Ground truth that does not go through the level recursion: brute-force
// enumeration of L_M(d, k), and the rescaled large-M root law used as a
// stand-in for the continuous model.

#ifndef LIPTREE_ENUMERATE_HPP
#define LIPTREE_ENUMERATE_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include <gmpxx.h>

#include "json.hpp"

#include "liptree/model.hpp"

namespace liptree {

inline constexpr std::uint64_t kDefaultEnumerationBudget = 100'000'000;

struct CountProfile {
  ModelParams params;
  std::map<std::int64_t, mpz_class> per_root_value;
  mpz_class total;

  mpz_class count(std::int64_t t) const {
    auto it = per_root_value.find(t);
    return it == per_root_value.end() ? mpz_class(0) : it->second;
  }
};

/// (2kM + 1)^(#internal vertices), the a-priori bound checked against the budget.
mpz_class enumeration_bound(const ModelParams& params);

/// Calls visit once per grounded M-Lipschitz function; values are in
/// breadth-first vertex order, leaves included. Throws ResourceLimitError
/// when enumeration_bound(params) exceeds budget.
void for_each_function(const ModelParams& params, std::uint64_t budget,
                       const std::function<void(std::span<const std::int64_t>)>& visit);

CountProfile enumerate_functions(const ModelParams& params,
                                 std::uint64_t budget = kDefaultEnumerationBudget);

/// {d, M, k, total, per_root_value: [{t, count}]}; counts as decimal strings.
nlohmann::json to_json(const CountProfile& profile);

struct DensityPoint {
  double x;
  double density;
};

/// grid_M * p(t) at x = t / grid_M for t in [-k grid_M, k grid_M], where p is
/// the root law of L_{grid_M}(d, k). Requires grid_M >= 8.
std::vector<DensityPoint> continuous_root_density(int branching, int depth, int grid_M);

}  // namespace liptree

#endif  // LIPTREE_ENUMERATE_HPP
