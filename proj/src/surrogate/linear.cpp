#include "gridsur/surrogate/linear.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gridsur/surrogate/standardizer.hpp"

namespace gridsur {

using nlohmann::json;

RankDeficient::RankDeficient(Index column)
    : FitError("input column " + std::to_string(column) +
               " is linearly dependent on the others; use a ridge penalty > 0 "
               "or enable drop_dependent"),
      column_(column) {}

IncrementalQr::IncrementalQr(Index rows, double dependence_tol)
    : rows_(rows), tol_(dependence_tol) {}

bool IncrementalQr::append(const Vector& column) {
  if (column.size() != rows_) throw std::invalid_argument("IncrementalQr: row count mismatch");
  Vector v = column;
  Vector r = Vector::Zero(static_cast<Index>(q_.size()));
  const double norm0 = column.norm();
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < q_.size(); ++i) {
      const double c = q_[i].dot(v);
      r[static_cast<Index>(i)] += c;
      v.noalias() -= c * q_[i];
    }
  }
  const double norm = v.norm();
  const bool independent = norm0 > 0.0 && norm > tol_ * norm0;
  independent_.push_back(independent);
  if (independent) {
    basis_of_column_.push_back(static_cast<Index>(q_.size()));
    r.conservativeResize(r.size() + 1);
    r[r.size() - 1] = norm;
    q_.push_back(v / norm);
  } else {
    basis_of_column_.push_back(-1);
  }
  r_.push_back(std::move(r));
  return independent;
}

Vector IncrementalQr::solve(const Vector& rhs, Index prefix) const {
  if (rhs.size() != rows_) throw std::invalid_argument("IncrementalQr: rhs size mismatch");
  if (prefix > columns()) throw std::invalid_argument("IncrementalQr: prefix too long");
  std::vector<Index> cols;  // basis order == column order
  for (Index c = 0; c < prefix; ++c)
    if (independent_[c]) cols.push_back(c);
  const auto k = static_cast<Index>(cols.size());

  Vector qty(k);
  Vector res = rhs;
  for (Index i = 0; i < k; ++i) {
    qty[i] = q_[i].dot(res);
    res.noalias() -= qty[i] * q_[i];
  }
  Vector sol(k);
  for (Index i = k - 1; i >= 0; --i) {
    double s = qty[i];
    for (Index j = i + 1; j < k; ++j) s -= r_[cols[j]][i] * sol[j];
    sol[i] = s / r_[cols[i]][i];
  }
  Vector coef = Vector::Zero(prefix);
  for (Index i = 0; i < k; ++i) coef[cols[i]] = sol[i];
  return coef;
}

namespace {

class LinearModel final : public SurrogateModel {
 public:
  LinearModel(Family family, LinearParams hp, Standardizer sx, Vector intercept,
              Matrix coef, std::vector<int> order, Matrix chain)
      : SurrogateModel(sx.dim(), intercept.size()),
        family_(family),
        hp_(std::move(hp)),
        sx_(std::move(sx)),
        intercept_(std::move(intercept)),
        coef_(std::move(coef)),
        order_(std::move(order)),
        chain_(std::move(chain)) {}

  Family family() const override { return family_; }
  HyperParams hyper_params() const override { return hp_; }

  void predict_row(std::span<const double> x, std::span<double> out) const override {
    check_row(x, out);
    const Index d = input_dim();
    thread_local Vector z;
    z.resize(d);
    sx_.transform_row(x, {z.data(), static_cast<std::size_t>(d)});
    for (Index j = 0; j < output_dim(); ++j) out[j] = intercept_[j] + coef_.col(j).dot(z);
    if (chain_.size() == 0) return;
    for (std::size_t k = 1; k < order_.size(); ++k)
      for (std::size_t l = 0; l < k; ++l)
        out[order_[k]] += chain_(static_cast<Index>(k), static_cast<Index>(l)) * out[order_[l]];
  }

  json parameters_json() const override {
    json coef = json::array();
    for (Index j = 0; j < coef_.cols(); ++j)
      coef.push_back(std::vector<double>(coef_.col(j).data(), coef_.col(j).data() + coef_.rows()));
    json j = {{"standardizer", sx_.to_json()},
              {"intercept", std::vector<double>(intercept_.data(), intercept_.data() + intercept_.size())},
              {"coef", coef}};
    if (chain_.size() > 0) {
      json rows = json::array();
      for (Index k = 0; k < chain_.rows(); ++k) {
        std::vector<double> r(static_cast<std::size_t>(k));
        for (Index l = 0; l < k; ++l) r[static_cast<std::size_t>(l)] = chain_(k, l);
        rows.push_back(r);
      }
      j["order"] = order_;
      j["chain"] = rows;
    }
    return j;
  }

 protected:
  Matrix predict_batch(const Matrix& x) const override {
    Matrix out = (sx_.transform(x) * coef_).rowwise() + intercept_.transpose();
    if (chain_.size() == 0) return out;
    for (std::size_t k = 1; k < order_.size(); ++k)
      for (std::size_t l = 0; l < k; ++l)
        out.col(order_[k]) += chain_(static_cast<Index>(k), static_cast<Index>(l)) * out.col(order_[l]);
    return out;
  }

 private:
  Family family_;
  LinearParams hp_;
  Standardizer sx_;
  Vector intercept_;
  Matrix coef_;             // d x m, on standardized inputs
  std::vector<int> order_;  // chain order (RC only)
  Matrix chain_;            // chain_(k, l): weight of target order[l] in target order[k]
};

void check_inputs(const Matrix& x, const Matrix& y, const LinearParams& hp) {
  if (x.rows() != y.rows()) throw std::invalid_argument("X and Y row counts differ");
  if (x.rows() == 0 || y.cols() == 0) throw std::invalid_argument("empty training data");
  if (!(hp.ridge >= 0.0) || !std::isfinite(hp.ridge))
    throw std::invalid_argument("ridge penalty must be a finite value >= 0");
  if (hp.ridge == 0.0 && x.rows() < x.cols() + 1)
    throw FitError("need at least " + std::to_string(x.cols() + 1) +
                   " rows for an unpenalized fit; use a ridge penalty > 0");
}

std::vector<int> resolve_order(const LinearParams& hp, Index m) {
  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  if (hp.chain_order.empty()) return order;
  std::vector<int> sorted = hp.chain_order;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != order) throw std::invalid_argument("chain_order must be a permutation of target indices");
  return hp.chain_order;
}

SurrogatePtr fit_linear(Family family, const Matrix& x, const Matrix& y, const LinearParams& hp) {
  check_inputs(x, y, hp);
  const bool chained = family == Family::RcLr;
  const Index n = x.rows(), d = x.cols(), m = y.cols();
  const std::vector<int> order = chained ? resolve_order(hp, m) : std::vector<int>{};

  Standardizer sx = Standardizer::fit(x);
  const Matrix z = sx.transform(x);
  const bool ridge = hp.ridge > 0.0;
  const double root_lambda = std::sqrt(hp.ridge);
  const Index chain_cols = chained ? m - 1 : 0;
  const Index rows = n + (ridge ? d + chain_cols : 0);

  IncrementalQr qr(rows);
  Vector col = Vector::Zero(rows);
  col.head(n).setOnes();
  if (!qr.append(col)) throw FitError("intercept column is degenerate");
  for (Index c = 0; c < d; ++c) {
    col.setZero();
    col.head(n) = z.col(c);
    if (ridge) col[n + c] = root_lambda;
    if (!qr.append(col) && !ridge && !hp.drop_dependent) throw RankDeficient(c);
  }

  Vector intercept(m);
  Matrix coef(d, m);
  Matrix chain = chained ? Matrix::Zero(m, m) : Matrix();
  Vector rhs = Vector::Zero(rows);
  Vector fitted_prev;
  std::vector<Vector> fitted;  // training predictions in chain order
  for (Index k = 0; k < m; ++k) {
    const Index target = chained ? order[static_cast<std::size_t>(k)] : k;
    if (chained && k > 0) {
      // Earlier predictions join the design; exactly dependent for ridge == 0.
      col.setZero();
      col.head(n) = fitted.back();
      if (ridge) col[n + d + k - 1] = root_lambda;
      qr.append(col);
    }
    rhs.head(n) = y.col(target);
    const Index prefix = 1 + d + (chained ? k : 0);
    const Vector beta = qr.solve(rhs, prefix);
    intercept[target] = beta[0];
    coef.col(target) = beta.segment(1, d);
    if (chained) {
      for (Index l = 0; l < k; ++l) chain(k, l) = beta[1 + d + l];
      if (k + 1 < m) {
        Vector f = (z * coef.col(target)).array() + beta[0];
        for (Index l = 0; l < k; ++l) f += chain(k, l) * fitted[static_cast<std::size_t>(l)];
        fitted.push_back(std::move(f));
      }
    }
  }
  return std::make_unique<LinearModel>(family, hp, std::move(sx), std::move(intercept),
                                       std::move(coef), order, std::move(chain));
}

}  // namespace

SurrogatePtr fit_linear_ensemble(const Matrix& x, const Matrix& y, const LinearParams& hp) {
  return fit_linear(Family::ReLr, x, y, hp);
}

SurrogatePtr fit_linear_chain(const Matrix& x, const Matrix& y, const LinearParams& hp) {
  return fit_linear(Family::RcLr, x, y, hp);
}

SurrogatePtr linear_from_json(Family family, const LinearParams& hp, const json& p) {
  Standardizer sx = Standardizer::from_json(p.at("standardizer"));
  const auto b = p.at("intercept").get<std::vector<double>>();
  const auto m = static_cast<Index>(b.size());
  const Index d = sx.dim();
  Vector intercept = Eigen::Map<const Vector>(b.data(), m);
  Matrix coef(d, m);
  const auto& cj = p.at("coef");
  if (static_cast<Index>(cj.size()) != m) throw std::invalid_argument("coef size mismatch");
  for (Index j = 0; j < m; ++j) {
    const auto c = cj[static_cast<std::size_t>(j)].get<std::vector<double>>();
    if (static_cast<Index>(c.size()) != d) throw std::invalid_argument("coef size mismatch");
    coef.col(j) = Eigen::Map<const Vector>(c.data(), d);
  }
  std::vector<int> order;
  Matrix chain;
  if (p.contains("chain")) {
    order = p.at("order").get<std::vector<int>>();
    chain = Matrix::Zero(m, m);
    const auto& rows = p.at("chain");
    for (Index k = 0; k < m; ++k) {
      const auto r = rows.at(static_cast<std::size_t>(k)).get<std::vector<double>>();
      for (Index l = 0; l < k; ++l) chain(k, l) = r.at(static_cast<std::size_t>(l));
    }
  }
  return std::make_unique<LinearModel>(family, hp, std::move(sx), std::move(intercept),
                                       std::move(coef), std::move(order), std::move(chain));
}

}  // namespace gridsur
