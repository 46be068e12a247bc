#include "tailcert/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace tailcert {

double dist2(const double* a, const double* b, int dim) {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

KdTree::KdTree(std::vector<double> points, int dim, int leaf_size)
    : points_(std::move(points)), dim_(dim), leaf_size_(std::max(1, leaf_size)) {
  const std::size_t n = size();
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0u);
  if (n > 0) {
    nodes_.reserve(2 * n / leaf_size_ + 2);
    boxes_.reserve(nodes_.capacity() * 2 * dim_);
    build(0, static_cast<std::uint32_t>(n));
  }
}

int KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  std::vector<double> lo(dim_, std::numeric_limits<double>::infinity());
  std::vector<double> hi(dim_, -std::numeric_limits<double>::infinity());
  for (std::uint32_t i = begin; i < end; ++i) {
    const double* p = point(order_[i]);
    for (int k = 0; k < dim_; ++k) {
      lo[k] = std::min(lo[k], p[k]);
      hi[k] = std::max(hi[k], p[k]);
    }
  }
  int axis = 0;
  double widest = -1.0;
  for (int k = 0; k < dim_; ++k) {
    if (hi[k] - lo[k] > widest) {
      widest = hi[k] - lo[k];
      axis = k;
    }
  }
  boxes_.insert(boxes_.end(), lo.begin(), lo.end());
  boxes_.insert(boxes_.end(), hi.begin(), hi.end());
  if (end - begin <= static_cast<std::uint32_t>(leaf_size_) || widest <= 0) return id;

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) { return point(a)[axis] < point(b)[axis]; });
  const double split = point(order_[mid])[axis];
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

double KdTree::box_dist2(int node, const double* q) const {
  const double* lo = boxes_.data() + static_cast<std::size_t>(node) * 2 * dim_;
  const double* hi = lo + dim_;
  double s = 0.0;
  for (int k = 0; k < dim_; ++k) {
    double d = 0.0;
    if (q[k] < lo[k]) d = lo[k] - q[k];
    else if (q[k] > hi[k]) d = q[k] - hi[k];
    s += d * d;
  }
  return s;
}

void KdTree::nearest_rec(int id, const double* q, Hit& best) const {
  const Node& n = nodes_[id];
  if (box_dist2(id, q) >= best.dist2) return;
  if (n.left < 0) {
    for (std::uint32_t i = n.begin; i < n.end; ++i) {
      const double d = dist2(point(order_[i]), q, dim_);
      if (d < best.dist2) best = Hit{order_[i], d};
    }
    return;
  }
  const bool go_left = q[n.axis] < n.split;
  nearest_rec(go_left ? n.left : n.right, q, best);
  nearest_rec(go_left ? n.right : n.left, q, best);
}

KdTree::Hit KdTree::nearest(const double* q) const {
  Hit best{0, std::numeric_limits<double>::infinity()};
  if (!nodes_.empty()) nearest_rec(0, q, best);
  return best;
}

bool KdTree::within_rec(int id, const double* q, double r2) const {
  const Node& n = nodes_[id];
  if (box_dist2(id, q) > r2) return false;
  if (n.left < 0) {
    for (std::uint32_t i = n.begin; i < n.end; ++i) {
      if (dist2(point(order_[i]), q, dim_) <= r2) return true;
    }
    return false;
  }
  const bool go_left = q[n.axis] < n.split;
  return within_rec(go_left ? n.left : n.right, q, r2) || within_rec(go_left ? n.right : n.left, q, r2);
}

bool KdTree::any_within(const double* q, double r) const {
  if (nodes_.empty()) return false;
  return within_rec(0, q, r * r);
}

}  // namespace tailcert
