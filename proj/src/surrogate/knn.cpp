#include "gridsur/surrogate/knn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "gridsur/surrogate/standardizer.hpp"

namespace gridsur {

using nlohmann::json;

KdTree::KdTree(RowMatrix points, int leaf_size) : points_(std::move(points)) {
  perm_.resize(static_cast<std::size_t>(points_.rows()));
  std::iota(perm_.begin(), perm_.end(), Index{0});
  if (points_.rows() > 0) build(0, static_cast<int>(points_.rows()), std::max(1, leaf_size));
}

int KdTree::build(int begin, int end, int leaf_size) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({-1, 0.0, -1, -1, begin, end});
  if (end - begin <= leaf_size) return id;

  int best_dim = -1;
  double best_spread = 0.0;
  for (Index c = 0; c < points_.cols(); ++c) {
    double lo = points_(perm_[static_cast<std::size_t>(begin)], c), hi = lo;
    for (int i = begin + 1; i < end; ++i) {
      const double v = points_(perm_[static_cast<std::size_t>(i)], c);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      best_dim = static_cast<int>(c);
    }
  }
  if (best_dim < 0) return id;  // all points identical

  const int mid = begin + (end - begin) / 2;
  std::nth_element(perm_.begin() + begin, perm_.begin() + mid, perm_.begin() + end,
                   [&](Index a, Index b) {
                     const double va = points_(a, best_dim), vb = points_(b, best_dim);
                     return va < vb || (va == vb && a < b);
                   });
  const double split = points_(perm_[static_cast<std::size_t>(mid)], best_dim);
  const int left = build(begin, mid, leaf_size);
  const int right = build(mid, end, leaf_size);
  Node& node = nodes_[static_cast<std::size_t>(id)];
  node.dim = best_dim;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

void KdTree::search(int id, const double* q, std::vector<double>& off, double rd, int k,
                    std::vector<Neighbor>& heap) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  const Index d = points_.cols();
  if (node.dim < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      const Index row = perm_[static_cast<std::size_t>(i)];
      const double* p = points_.row(row).data();
      const bool full = static_cast<int>(heap.size()) >= k;
      const double bound = full ? heap.front().dist2 : std::numeric_limits<double>::infinity();
      double s = 0.0;
      Index c = 0;
      // Leading coordinates carry most of the variance, so partial sums
      // cross the bound early for far points.
      for (; c < d; ++c) {
        const double diff = q[c] - p[c];
        s += diff * diff;
        if (s > bound) break;
      }
      if (c < d) continue;
      const Neighbor cand{s, row};
      if (static_cast<int>(heap.size()) < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end());
      } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    return;
  }
  const auto dim = static_cast<std::size_t>(node.dim);
  const double gap = q[dim] - node.split;
  const int near = gap < 0.0 ? node.left : node.right;
  const int far = gap < 0.0 ? node.right : node.left;
  search(near, q, off, rd, k, heap);

  const double old = off[dim];
  const double far_rd = rd - old * old + gap * gap;
  // Small slack so that exact ties on the boundary are still visited.
  if (static_cast<int>(heap.size()) < k || far_rd <= heap.front().dist2 * (1.0 + 1e-12)) {
    off[dim] = gap;
    search(far, q, off, far_rd, k, heap);
    off[dim] = old;
  }
}

void KdTree::query(std::span<const double> q, int k, std::vector<Neighbor>& out) const {
  out.clear();
  if (points_.rows() == 0 || k <= 0) return;
  thread_local std::vector<double> off;
  off.assign(static_cast<std::size_t>(points_.cols()), 0.0);
  search(0, q.data(), off, 0.0, k, out);
  std::sort_heap(out.begin(), out.end());
}

namespace {

class KnnModel final : public SurrogateModel {
 public:
  KnnModel(KnnParams hp, Standardizer sx, Matrix rotation, RowMatrix points, RowMatrix targets)
      : SurrogateModel(sx.dim(), targets.cols()),
        hp_(hp),
        sx_(std::move(sx)),
        rotation_(std::move(rotation)),
        tree_(std::move(points)),
        targets_(std::move(targets)) {}

  Family family() const override { return Family::Knn; }
  HyperParams hyper_params() const override { return hp_; }

  void predict_row(std::span<const double> x, std::span<double> out) const override {
    check_row(x, out);
    thread_local Vector z, r;
    thread_local std::vector<Neighbor> nb;
    z.resize(input_dim());
    sx_.transform_row(x, {z.data(), static_cast<std::size_t>(z.size())});
    r.noalias() = rotation_.transpose() * z;
    tree_.query({r.data(), static_cast<std::size_t>(r.size())}, hp_.k, nb);
    const Index m = output_dim();
    std::fill(out.begin(), out.end(), 0.0);

    std::size_t zero_hits = 0;
    if (hp_.weighting == Weighting::InverseDistance)
      while (zero_hits < nb.size() && nb[zero_hits].dist2 == 0.0) ++zero_hits;
    if (hp_.weighting == Weighting::Uniform || zero_hits > 0) {
      const std::size_t count = zero_hits > 0 ? zero_hits : nb.size();
      for (std::size_t i = 0; i < count; ++i) {
        const double* t = targets_.row(nb[i].row).data();
        for (Index j = 0; j < m; ++j) out[j] += t[j];
      }
      for (Index j = 0; j < m; ++j) out[j] /= static_cast<double>(count);
      return;
    }
    double wsum = 0.0;
    for (const auto& n : nb) {
      const double w = 1.0 / std::sqrt(n.dist2);
      wsum += w;
      const double* t = targets_.row(n.row).data();
      for (Index j = 0; j < m; ++j) out[j] += w * t[j];
    }
    for (Index j = 0; j < m; ++j) out[j] /= wsum;
  }

  json parameters_json() const override {
    const auto& p = tree_.points();
    return {{"standardizer", sx_.to_json()},
            {"rotation", std::vector<double>(rotation_.data(), rotation_.data() + rotation_.size())},
            {"rows", p.rows()},
            {"points", std::vector<double>(p.data(), p.data() + p.size())},
            {"targets", std::vector<double>(targets_.data(), targets_.data() + targets_.size())}};
  }

 private:
  KnnParams hp_;
  Standardizer sx_;
  Matrix rotation_;  // principal axes, descending variance
  KdTree tree_;
  RowMatrix targets_;
};

void check_k(int k, Index rows) {
  if (k < 1 || k > rows)
    throw std::invalid_argument("k must be in [1, " + std::to_string(rows) + "]");
}

}  // namespace

SurrogatePtr fit_knn(const Matrix& x, const Matrix& y, const KnnParams& hp) {
  if (x.rows() != y.rows()) throw std::invalid_argument("X and Y row counts differ");
  if (x.rows() == 0 || y.cols() == 0) throw std::invalid_argument("empty training data");
  check_k(hp.k, x.rows());
  Standardizer sx = Standardizer::fit(x);
  const Matrix z = sx.transform(x);
  // Distances are rotation invariant; principal axes make the tree splits
  // and the partial-distance cutoff effective.
  const Matrix cov = z.transpose() * z;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw FitError("k-NN: eigen decomposition failed");
  Matrix rotation = eig.eigenvectors().rowwise().reverse();
  RowMatrix points = z * rotation;
  RowMatrix targets = y;
  return std::make_unique<KnnModel>(hp, std::move(sx), std::move(rotation), std::move(points),
                                    std::move(targets));
}

SurrogatePtr knn_from_json(const KnnParams& hp, const json& p) {
  Standardizer sx = Standardizer::from_json(p.at("standardizer"));
  const auto rows = p.at("rows").get<Index>();
  const auto pts = p.at("points").get<std::vector<double>>();
  const auto tgt = p.at("targets").get<std::vector<double>>();
  if (rows <= 0 || static_cast<Index>(pts.size()) != rows * sx.dim() ||
      static_cast<Index>(tgt.size()) % rows != 0)
    throw std::invalid_argument("malformed k-NN parameters");
  check_k(hp.k, rows);
  const auto rot = p.at("rotation").get<std::vector<double>>();
  if (static_cast<Index>(rot.size()) != sx.dim() * sx.dim())
    throw std::invalid_argument("malformed k-NN rotation");
  Matrix rotation = Eigen::Map<const Matrix>(rot.data(), sx.dim(), sx.dim());
  RowMatrix points = Eigen::Map<const RowMatrix>(pts.data(), rows, sx.dim());
  RowMatrix targets = Eigen::Map<const RowMatrix>(tgt.data(), rows, static_cast<Index>(tgt.size()) / rows);
  return std::make_unique<KnnModel>(hp, std::move(sx), std::move(rotation), std::move(points),
                                    std::move(targets));
}

}  // namespace gridsur
