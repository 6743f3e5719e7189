#include "liptree/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "liptree/logmath.hpp"
#include "liptree/tree.hpp"

namespace liptree {

std::uint64_t derive_seed(RngSeed seed, std::uint64_t stream) {
  std::uint64_t z = seed.value + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

mpz_class Rng::uniform_below(const mpz_class& bound) {
  if (sgn(bound) <= 0) throw std::invalid_argument("uniform_below needs a positive bound");
  const std::size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
  const std::size_t words = (bits + 63) / 64;
  mpz_class draw;
  for (;;) {
    draw = 0;
    for (std::size_t i = 0; i < words; ++i) {
      mpz_mul_2exp(draw.get_mpz_t(), draw.get_mpz_t(), 64);
      const std::uint64_t word = next();
      mpz_class part(static_cast<unsigned long>(word >> 32));
      mpz_mul_2exp(part.get_mpz_t(), part.get_mpz_t(), 32);
      part += static_cast<unsigned long>(word & 0xffffffffULL);
      draw += part;
    }
    mpz_fdiv_r_2exp(draw.get_mpz_t(), draw.get_mpz_t(), bits);
    if (draw < bound) return draw;
  }
}

// ---------------------------------------------------------------------------
// Validators

bool is_grounded_lipschitz(const DiscreteTreeFunction& f) {
  const ModelParams& params = f.params;
  const TreeShape shape(params.branching(), params.depth());
  if (f.values.size() != shape.vertex_count()) return false;
  for (std::size_t v = shape.internal_count(); v < shape.vertex_count(); ++v) {
    if (f.values[v] != 0) return false;
  }
  for (std::size_t v = 1; v < shape.vertex_count(); ++v) {
    const std::int64_t step = f.values[v] - f.values[shape.parent(v)];
    if (step > params.lipschitz() || step < -params.lipschitz()) return false;
  }
  return true;
}

bool is_grounded_lipschitz(const ContinuousTreeFunction& f, double tolerance) {
  const TreeShape shape(f.branching, f.depth);
  if (f.values.size() != shape.vertex_count()) return false;
  for (std::size_t v = shape.internal_count(); v < shape.vertex_count(); ++v) {
    if (f.values[v] != 0.0) return false;
  }
  for (std::size_t v = 1; v < shape.vertex_count(); ++v) {
    if (!(std::abs(f.values[v] - f.values[shape.parent(v)]) <= 1.0 + tolerance)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Exact ancestral sampler

namespace {

// Draws s in [lo, hi] with probability proportional to G(s, table.level()).
std::int64_t draw_from_window(const LevelTable& table, std::int64_t lo, std::int64_t hi,
                              Rng& rng) {
  lo = std::max(lo, -table.radius());
  hi = std::min(hi, table.radius());
  if (lo > hi) throw std::logic_error("empty sampling window");

  if (table.backend() == Backend::Exact) {
    mpz_class total = 0;
    for (std::int64_t s = lo; s <= hi; ++s) total += table.exact_weight(s);
    mpz_class r = rng.uniform_below(total);
    for (std::int64_t s = lo; s < hi; ++s) {
      const mpz_class w = table.exact_weight(s);
      if (r < w) return s;
      r -= w;
    }
    return hi;
  }

  double anchor = kNegInf;
  for (std::int64_t s = lo; s <= hi; ++s) anchor = std::max(anchor, table.relative_log_weight(s));
  std::vector<double> weights;
  weights.reserve(static_cast<std::size_t>(hi - lo + 1));
  double total = 0.0;
  for (std::int64_t s = lo; s <= hi; ++s) {
    weights.push_back(std::exp(table.relative_log_weight(s) - anchor));
    total += weights.back();
  }
  double r = rng.uniform() * total;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    if (r < weights[i]) return lo + static_cast<std::int64_t>(i);
    r -= weights[i];
  }
  return hi;
}

void check_tables(std::span<const LevelTable> tables) {
  if (tables.empty()) throw std::invalid_argument("sampler needs level tables");
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (tables[i].level() != static_cast<int>(i) + 1) {
      throw std::invalid_argument("sampler needs tables for consecutive levels 1..k");
    }
  }
}

}  // namespace

DiscreteTreeFunction sample_exact_given_root(std::span<const LevelTable> tables,
                                             std::int64_t root_value, Rng& rng) {
  check_tables(tables);
  const LevelTable& top = tables.back();
  const int depth = top.level();
  const std::int64_t lip = top.params().lipschitz();
  if (!top.in_support(root_value)) {
    throw std::invalid_argument("root value " + std::to_string(root_value) +
                                " outside the support");
  }
  DiscreteTreeFunction f{ModelParams(top.params().branching(), top.params().lipschitz(), depth),
                         {}};
  const TreeShape shape(top.params().branching(), depth);
  f.values.assign(shape.vertex_count(), 0);
  f.values[0] = root_value;

  // Vertices at depth i occupy [begin, end) and have height depth - i.
  std::size_t begin = 0;
  std::size_t end = 1;
  for (int i = 0; i + 1 < depth; ++i) {
    const LevelTable& child_table = tables[static_cast<std::size_t>(depth - i - 2)];
    for (std::size_t v = begin; v < end; ++v) {
      const std::int64_t t = f.values[v];
      const std::size_t first = shape.first_child(v);
      for (int c = 0; c < shape.branching(); ++c) {
        f.values[first + static_cast<std::size_t>(c)] =
            draw_from_window(child_table, t - lip, t + lip, rng);
      }
    }
    begin = end;
    end = shape.first_child(end - 1) + static_cast<std::size_t>(shape.branching());
  }
  return f;
}

DiscreteTreeFunction sample_exact(std::span<const LevelTable> tables, Rng& rng) {
  check_tables(tables);
  const LevelTable& top = tables.back();
  const std::int64_t root = draw_from_window(top, -top.radius(), top.radius(), rng);
  return sample_exact_given_root(tables, root, rng);
}

DiscreteTreeFunction sample_exact(std::span<const LevelTable> tables, RngSeed seed) {
  Rng rng(derive_seed(seed, 0));
  return sample_exact(tables, rng);
}

std::map<std::int64_t, std::uint64_t> empirical_root_distribution(
    std::span<const LevelTable> tables, std::uint64_t n, RngSeed seed) {
  if (n < 1) throw std::invalid_argument("sample count n must be >= 1");
  check_tables(tables);
  const LevelTable& top = tables.back();
  std::map<std::int64_t, std::uint64_t> histogram;
  for (std::uint64_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, i));
    // The root marginal is the first draw of the ancestral sampler.
    ++histogram[draw_from_window(top, -top.radius(), top.radius(), rng)];
  }
  return histogram;
}

// ---------------------------------------------------------------------------
// Gibbs sampler on the continuous polytope

void gibbs_sweep(ContinuousTreeFunction& f, Rng& rng) {
  const TreeShape shape(f.branching, f.depth);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < shape.internal_count(); ++v) {
    double lo = -kInf;
    double hi = kInf;
    if (v > 0) {
      const double parent = f.values[shape.parent(v)];
      lo = parent - 1.0;
      hi = parent + 1.0;
    }
    const std::size_t first = shape.first_child(v);
    for (std::size_t c = first; c < first + static_cast<std::size_t>(f.branching); ++c) {
      lo = std::max(lo, f.values[c] - 1.0);
      hi = std::min(hi, f.values[c] + 1.0);
    }
    if (!(lo <= hi)) {
      throw std::logic_error("Gibbs update left the polytope at vertex " + std::to_string(v));
    }
    f.values[v] = std::clamp(lo + rng.uniform() * (hi - lo), lo, hi);
  }
}

ContinuousTreeFunction sample_continuous_gibbs(int branching, int depth, int sweeps,
                                               Rng& rng) {
  if (sweeps < 1) throw std::invalid_argument("sweeps must be >= 1");
  const TreeShape shape(branching, depth);
  ContinuousTreeFunction f{branching, depth, std::vector<double>(shape.vertex_count(), 0.0)};
  for (int s = 0; s < sweeps; ++s) gibbs_sweep(f, rng);
  return f;
}

ContinuousTreeFunction sample_continuous_gibbs(int branching, int depth, int sweeps,
                                               RngSeed seed) {
  Rng rng(derive_seed(seed, 0));
  return sample_continuous_gibbs(branching, depth, sweeps, rng);
}

std::vector<double> continuous_root_samples(int branching, int depth, int sweeps,
                                            std::uint64_t n, RngSeed seed) {
  if (n < 1) throw std::invalid_argument("sample count n must be >= 1");
  std::vector<double> roots;
  roots.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, i));
    roots.push_back(sample_continuous_gibbs(branching, depth, sweeps, rng).values[0]);
  }
  return roots;
}

}  // namespace liptree
