#pragma once

// Static k-d tree over a flat row-major point table.

#include <cstddef>
#include <cstdint>
#include <vector>

namespace tailcert {

class KdTree {
 public:
  KdTree() = default;
  KdTree(std::vector<double> points, int dim, int leaf_size = 8);

  std::size_t size() const { return dim_ ? points_.size() / dim_ : 0; }
  int dim() const { return dim_; }
  const double* point(std::size_t i) const { return points_.data() + i * dim_; }

  struct Hit {
    std::size_t index = 0;
    double dist2 = 0.0;
  };
  /// Nearest point; the tree must be non-empty.
  Hit nearest(const double* q) const;
  /// True when some point lies within Euclidean distance r (inclusive) of q.
  bool any_within(const double* q, double r) const;

 private:
  struct Node {
    std::uint32_t begin, end;  // range in order_
    std::int32_t left = -1, right = -1;
    int axis = 0;
    double split = 0.0;
  };

  int build(std::uint32_t begin, std::uint32_t end);
  double box_dist2(int node, const double* q) const;
  void nearest_rec(int node, const double* q, Hit& best) const;
  bool within_rec(int node, const double* q, double r2) const;

  std::vector<double> points_;
  int dim_ = 0;
  int leaf_size_ = 8;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::vector<double> boxes_;  // per node: dim lows then dim highs
};

double dist2(const double* a, const double* b, int dim);

}  // namespace tailcert
