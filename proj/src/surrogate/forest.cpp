#include "gridsur/surrogate/forest.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "gridsur/parallel.hpp"
#include "gridsur/util.hpp"

namespace gridsur {

using nlohmann::json;

double RegressionTree::predict(std::span<const double> x) const {
  int node = 0;
  while (feature[static_cast<std::size_t>(node)] >= 0) {
    const auto n = static_cast<std::size_t>(node);
    node = x[static_cast<std::size_t>(feature[n])] <= threshold[n] ? left[n] : right[n];
  }
  return value[static_cast<std::size_t>(node)];
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;  // sumL^2/nL + sumR^2/nR
};

int add_node(RegressionTree& t, double value) {
  t.feature.push_back(-1);
  t.threshold.push_back(0.0);
  t.left.push_back(-1);
  t.right.push_back(-1);
  t.value.push_back(value);
  return static_cast<int>(t.feature.size()) - 1;
}

}  // namespace

RegressionTree grow_tree(const Matrix& x, const Eigen::Ref<const Vector>& y,
                         std::vector<Index> rows, int mtry, int nodesize,
                         std::uint64_t seed) {
  const auto d = static_cast<int>(x.cols());
  if (mtry < 1 || mtry > d) throw std::invalid_argument("mtry must be in [1, cols(X)]");
  if (nodesize < 1) throw std::invalid_argument("nodesize must be >= 1");
  if (rows.empty()) throw std::invalid_argument("cannot grow a tree on zero rows");

  std::mt19937_64 rng(seed);
  std::vector<int> features(static_cast<std::size_t>(d));
  std::iota(features.begin(), features.end(), 0);
  std::vector<std::pair<double, double>> buf;

  RegressionTree tree;
  struct Task {
    int node;
    std::size_t begin, end;
  };
  auto mean_of = [&](std::size_t b, std::size_t e) {
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) s += y[rows[i]];
    return s / static_cast<double>(e - b);
  };
  std::vector<Task> stack{{add_node(tree, mean_of(0, rows.size())), 0, rows.size()}};

  while (!stack.empty()) {
    const Task task = stack.back();
    stack.pop_back();
    const std::size_t n = task.end - task.begin;
    if (n < 2 * static_cast<std::size_t>(nodesize)) continue;
    double lo = y[rows[task.begin]], hi = lo, total = 0.0;
    for (std::size_t i = task.begin; i < task.end; ++i) {
      lo = std::min(lo, y[rows[i]]);
      hi = std::max(hi, y[rows[i]]);
      total += y[rows[i]];
    }
    if (lo == hi) {
      tree.value[static_cast<std::size_t>(task.node)] = lo;
      continue;
    }

    const double parent_score = total * total / static_cast<double>(n);
    Split best;
    best.score = parent_score;
    for (int f = 0; f < mtry; ++f) {
      std::uniform_int_distribution<int> pick(f, d - 1);
      std::swap(features[static_cast<std::size_t>(f)], features[static_cast<std::size_t>(pick(rng))]);
      const int feat = features[static_cast<std::size_t>(f)];
      buf.clear();
      for (std::size_t i = task.begin; i < task.end; ++i)
        buf.emplace_back(x(rows[i], feat), y[rows[i]]);
      std::sort(buf.begin(), buf.end());
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_sum += buf[i].second;
        const std::size_t nl = i + 1, nr = n - nl;
        if (buf[i].first == buf[i + 1].first) continue;
        if (nl < static_cast<std::size_t>(nodesize) || nr < static_cast<std::size_t>(nodesize)) continue;
        const double right_sum = total - left_sum;
        const double score = left_sum * left_sum / static_cast<double>(nl) +
                             right_sum * right_sum / static_cast<double>(nr);
        if (score > best.score) {
          best.score = score;
          best.feature = feat;
          double thr = 0.5 * (buf[i].first + buf[i + 1].first);
          if (!(thr < buf[i + 1].first)) thr = buf[i].first;
          best.threshold = thr;
        }
      }
    }
    if (best.feature < 0) continue;

    const auto mid_it = std::partition(
        rows.begin() + static_cast<std::ptrdiff_t>(task.begin),
        rows.begin() + static_cast<std::ptrdiff_t>(task.end),
        [&](Index r) { return x(r, best.feature) <= best.threshold; });
    const auto mid = static_cast<std::size_t>(mid_it - rows.begin());
    const int l = add_node(tree, mean_of(task.begin, mid));
    const int r = add_node(tree, mean_of(mid, task.end));
    const auto t = static_cast<std::size_t>(task.node);
    tree.feature[t] = best.feature;
    tree.threshold[t] = best.threshold;
    tree.left[t] = l;
    tree.right[t] = r;
    stack.push_back({r, mid, task.end});
    stack.push_back({l, task.begin, mid});
  }
  return tree;
}

namespace {

class ForestModel final : public SurrogateModel {
 public:
  ForestModel(ForestParams hp, Index d, std::vector<std::vector<RegressionTree>> forests)
      : SurrogateModel(d, static_cast<Index>(forests.size())),
        hp_(hp),
        forests_(std::move(forests)) {}

  Family family() const override { return Family::ReRf; }
  HyperParams hyper_params() const override { return hp_; }

  void predict_row(std::span<const double> x, std::span<double> out) const override {
    check_row(x, out);
    for (std::size_t j = 0; j < forests_.size(); ++j) {
      // Running mean keeps a unanimous forest exact.
      double mean = 0.0;
      int k = 0;
      for (const auto& t : forests_[j]) mean += (t.predict(x) - mean) / ++k;
      out[j] = mean;
    }
  }

  json parameters_json() const override {
    json targets = json::array();
    for (const auto& forest : forests_) {
      json trees = json::array();
      for (const auto& t : forest)
        trees.push_back({{"feature", t.feature}, {"threshold", t.threshold},
                         {"left", t.left}, {"right", t.right}, {"value", t.value}});
      targets.push_back(trees);
    }
    return {{"input_dim", input_dim()}, {"forests", targets}};
  }

 private:
  ForestParams hp_;
  std::vector<std::vector<RegressionTree>> forests_;
};

}  // namespace

SurrogatePtr fit_random_forest(const Matrix& x, const Matrix& y, const ForestParams& hp,
                               std::uint64_t seed) {
  if (x.rows() != y.rows()) throw std::invalid_argument("X and Y row counts differ");
  if (x.rows() == 0 || y.cols() == 0) throw std::invalid_argument("empty training data");
  if (hp.mtry < 1 || hp.mtry > x.cols()) throw std::invalid_argument("mtry must be in [1, cols(X)]");
  if (hp.nodesize < 1) throw std::invalid_argument("nodesize must be >= 1");
  if (hp.n_trees < 1) throw std::invalid_argument("n_trees must be >= 1");
  if (!(hp.sample_size > 0.0 && hp.sample_size <= 1.0))
    throw std::invalid_argument("sample_size must be in (0, 1]");

  const Index n = x.rows();
  const auto draw = std::max<Index>(1, static_cast<Index>(std::llround(hp.sample_size * static_cast<double>(n))));
  const auto m = static_cast<int>(y.cols());
  std::vector<std::vector<RegressionTree>> forests(static_cast<std::size_t>(m));
  parallel_for(m, [&](int target) {
    auto& forest = forests[static_cast<std::size_t>(target)];
    for (int t = 0; t < hp.n_trees; ++t) {
      const std::uint64_t s = derive_seed(seed, {static_cast<std::uint64_t>(target),
                                                 static_cast<std::uint64_t>(t)});
      std::mt19937_64 rng(s);
      std::vector<Index> rows;
      rows.reserve(static_cast<std::size_t>(draw));
      if (hp.replace) {
        std::uniform_int_distribution<Index> pick(0, n - 1);
        for (Index i = 0; i < draw; ++i) rows.push_back(pick(rng));
      } else {
        std::vector<Index> all(static_cast<std::size_t>(n));
        std::iota(all.begin(), all.end(), Index{0});
        for (Index i = 0; i < draw; ++i) {
          std::uniform_int_distribution<Index> pick(i, n - 1);
          std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
        }
        rows.assign(all.begin(), all.begin() + draw);
      }
      forest.push_back(grow_tree(x, y.col(target), std::move(rows), hp.mtry, hp.nodesize,
                                 splitmix64(s)));
    }
  });
  return std::make_unique<ForestModel>(hp, x.cols(), std::move(forests));
}

SurrogatePtr forest_from_json(const ForestParams& hp, const json& p) {
  std::vector<std::vector<RegressionTree>> forests;
  for (const auto& trees : p.at("forests")) {
    std::vector<RegressionTree> forest;
    for (const auto& tj : trees) {
      RegressionTree t;
      t.feature = tj.at("feature").get<std::vector<int>>();
      t.threshold = tj.at("threshold").get<std::vector<double>>();
      t.left = tj.at("left").get<std::vector<int>>();
      t.right = tj.at("right").get<std::vector<int>>();
      t.value = tj.at("value").get<std::vector<double>>();
      const auto k = t.feature.size();
      if (t.threshold.size() != k || t.left.size() != k || t.right.size() != k || t.value.size() != k)
        throw std::invalid_argument("malformed tree");
      forest.push_back(std::move(t));
    }
    forests.push_back(std::move(forest));
  }
  return std::make_unique<ForestModel>(hp, p.at("input_dim").get<Index>(), std::move(forests));
}

}  // namespace gridsur
