#pragma once

#include <vector>

#include "gridsur/surrogate/model.hpp"

namespace gridsur {

struct Neighbor {
  double dist2 = 0.0;
  Index row = 0;
  auto operator<=>(const Neighbor&) const = default;
};

/// Exact k-nearest-neighbour index over the rows of a matrix. Neighbours are
/// ordered by (squared distance, row), so ties go to the lower row.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(RowMatrix points, int leaf_size = 12);

  void query(std::span<const double> q, int k, std::vector<Neighbor>& out) const;
  [[nodiscard]] const RowMatrix& points() const { return points_; }

 private:
  struct Node {
    int dim = -1;  // -1: leaf
    double split = 0.0;
    int left = -1, right = -1;
    int begin = 0, end = 0;
  };
  int build(int begin, int end, int leaf_size);
  void search(int node, const double* q, std::vector<double>& off, double rd, int k,
              std::vector<Neighbor>& heap) const;

  RowMatrix points_;
  std::vector<Index> perm_;
  std::vector<Node> nodes_;
};

/// Stores the standardized training set; predictions average the targets of
/// the k nearest rows (uniformly or by inverse distance).
[[nodiscard]] SurrogatePtr fit_knn(const Matrix& x, const Matrix& y, const KnnParams& hp);

[[nodiscard]] SurrogatePtr knn_from_json(const KnnParams& hp, const nlohmann::json& params);

}  // namespace gridsur
