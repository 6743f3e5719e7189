#include "liptree/enumerate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "liptree/tree.hpp"

namespace liptree {

mpz_class enumeration_bound(const ModelParams& params) {
  const TreeShape shape(params.branching(), params.depth());
  mpz_class bound;
  const mpz_class base = 2 * support_bound(params) + 1;
  mpz_pow_ui(bound.get_mpz_t(), base.get_mpz_t(),
             static_cast<unsigned long>(shape.internal_count()));
  return bound;
}

namespace {

// Depth-first assignment of internal vertices in breadth-first index order.
// Each vertex ranges over [parent - M, parent + M]; the root over [-kM, kM].
// A vertex at height h must satisfy |value| <= hM, otherwise no path of h
// steps reaches a leaf; at h = 1 this is exactly the leaf constraint.
class Enumerator {
 public:
  Enumerator(const ModelParams& params,
             const std::function<void(std::span<const std::int64_t>)>& visit)
      : shape_(params.branching(), params.depth()),
        lip_(params.lipschitz()),
        visit_(visit),
        values_(shape_.vertex_count(), 0),
        heights_(shape_.internal_count()) {
    for (std::size_t v = 0; v < heights_.size(); ++v) heights_[v] = shape_.height_of(v);
  }

  void run() { assign(0); }

 private:
  void assign(std::size_t v) {
    if (v == shape_.internal_count()) {
      visit_(values_);
      return;
    }
    const std::int64_t reach = static_cast<std::int64_t>(heights_[v]) * lip_;
    std::int64_t lo = -reach;
    std::int64_t hi = reach;
    if (v > 0) {
      const std::int64_t parent = values_[shape_.parent(v)];
      lo = std::max(lo, parent - lip_);
      hi = std::min(hi, parent + lip_);
    }
    for (std::int64_t value = lo; value <= hi; ++value) {
      values_[v] = value;
      assign(v + 1);
    }
    values_[v] = 0;
  }

  TreeShape shape_;
  std::int64_t lip_;
  const std::function<void(std::span<const std::int64_t>)>& visit_;
  std::vector<std::int64_t> values_;
  std::vector<int> heights_;
};

}  // namespace

void for_each_function(const ModelParams& params, std::uint64_t budget,
                       const std::function<void(std::span<const std::int64_t>)>& visit) {
  const mpz_class bound = enumeration_bound(params);
  if (bound > mpz_class(std::to_string(budget))) {
    throw ResourceLimitError("enumeration of " + to_string(params) + " bounded by " +
                             bound.get_str() + " assignments, over the budget of " +
                             std::to_string(budget));
  }
  Enumerator(params, visit).run();
}

CountProfile enumerate_functions(const ModelParams& params, std::uint64_t budget) {
  std::map<std::int64_t, std::uint64_t> counts;
  std::uint64_t total = 0;
  for_each_function(params, budget, [&](std::span<const std::int64_t> values) {
    ++counts[values[0]];
    ++total;
  });
  CountProfile profile{params, {}, mpz_class(std::to_string(total))};
  for (const auto& [t, n] : counts) profile.per_root_value[t] = mpz_class(std::to_string(n));
  return profile;
}

nlohmann::json to_json(const CountProfile& profile) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [t, count] : profile.per_root_value) {
    rows.push_back({{"t", t}, {"count", count.get_str()}});
  }
  return {{"d", profile.params.branching()},
          {"M", profile.params.lipschitz()},
          {"k", profile.params.depth()},
          {"total", profile.total.get_str()},
          {"per_root_value", std::move(rows)}};
}

std::vector<DensityPoint> continuous_root_density(int branching, int depth, int grid_M) {
  if (grid_M < 8) {
    throw std::invalid_argument("grid_M must be >= 8 (got " + std::to_string(grid_M) + ")");
  }
  const ModelParams params(branching, grid_M, depth);
  const auto tables = build_tables(params, Backend::Log);
  const RootDistribution dist = root_distribution(tables);
  const std::int64_t radius = dist.radius();
  std::vector<DensityPoint> points;
  points.reserve(static_cast<std::size_t>(2 * radius + 1));
  for (std::int64_t t = -radius; t <= radius; ++t) {
    points.push_back({static_cast<double>(t) / grid_M, grid_M * dist.probability(t)});
  }
  return points;
}

}  // namespace liptree
