#include "liptree/tree.hpp"

#include <stdexcept>
#include <string>

#include "liptree/model.hpp"

namespace liptree {

TreeShape::TreeShape(int branching, int depth, std::size_t max_vertices)
    : branching_(branching), depth_(depth) {
  if (branching < 2) throw std::invalid_argument("branching factor d must be >= 2");
  if (depth < 1) throw std::invalid_argument("depth k must be >= 1");
  std::size_t level_size = 1;
  std::size_t total = 0;
  for (int i = 0; i <= depth; ++i) {
    if (i == depth) internal_count_ = total;
    total += level_size;
    if (total > max_vertices) {
      throw ResourceLimitError("tree with d=" + std::to_string(branching) + " k=" +
                               std::to_string(depth) + " has more than " +
                               std::to_string(max_vertices) + " vertices");
    }
    level_size *= static_cast<std::size_t>(branching);
  }
  vertex_count_ = total;
}

int TreeShape::depth_of(std::size_t v) const {
  int depth = 0;
  while (v > 0) {
    v = parent(v);
    ++depth;
  }
  return depth;
}

}  // namespace liptree
