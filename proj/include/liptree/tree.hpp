#ifndef LIPTREE_TREE_HPP
#define LIPTREE_TREE_HPP

#include <cstddef>
#include <cstdint>

namespace liptree {

// Breadth-first layout of T(d, k): the root is vertex 0 and the children of
// vertex i are d*i + 1, ..., d*i + d. Leaves sit at depth k.
class TreeShape {
 public:
  /// Throws ResourceLimitError if the tree has more than max_vertices vertices.
  TreeShape(int branching, int depth, std::size_t max_vertices = kDefaultMaxVertices);

  static constexpr std::size_t kDefaultMaxVertices = std::size_t{1} << 26;

  int branching() const { return branching_; }
  int depth() const { return depth_; }
  std::size_t vertex_count() const { return vertex_count_; }
  /// Internal vertices are exactly the indices below this count.
  std::size_t internal_count() const { return internal_count_; }

  bool is_leaf(std::size_t v) const { return v >= internal_count_; }
  std::size_t parent(std::size_t v) const { return (v - 1) / static_cast<std::size_t>(branching_); }
  std::size_t first_child(std::size_t v) const {
    return static_cast<std::size_t>(branching_) * v + 1;
  }
  /// Distance from the root.
  int depth_of(std::size_t v) const;
  /// Distance to the leaves: depth() - depth_of(v).
  int height_of(std::size_t v) const { return depth_ - depth_of(v); }

 private:
  int branching_;
  int depth_;
  std::size_t vertex_count_;
  std::size_t internal_count_;
};

}  // namespace liptree

#endif  // LIPTREE_TREE_HPP
