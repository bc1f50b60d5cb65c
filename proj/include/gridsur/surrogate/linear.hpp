#pragma once

#include <vector>

#include "gridsur/surrogate/model.hpp"

namespace gridsur {

class RankDeficient : public FitError {
 public:
  explicit RankDeficient(Index column);
  [[nodiscard]] Index column() const { return column_; }

 private:
  Index column_;
};

/// Least squares by modified Gram-Schmidt with one reorthogonalization pass.
/// Columns are appended one at a time so a chain of regressions can reuse
/// the factorization of a shared prefix.
class IncrementalQr {
 public:
  explicit IncrementalQr(Index rows, double dependence_tol = 1e-10);

  /// Returns false (and stores nothing) when the column is numerically in
  /// the span of the columns already added.
  bool append(const Vector& column);

  /// Coefficients for the first `prefix` appended columns; dependent
  /// columns get 0.
  [[nodiscard]] Vector solve(const Vector& rhs, Index prefix) const;

  [[nodiscard]] Index columns() const { return static_cast<Index>(independent_.size()); }
  [[nodiscard]] Index rank() const { return static_cast<Index>(q_.size()); }

 private:
  Index rows_;
  double tol_;
  std::vector<Vector> q_;
  std::vector<bool> independent_;
  std::vector<Index> basis_of_column_;  // -1 for dependent columns
  std::vector<Vector> r_;               // r_[c] = Q^T a_c over the basis so far
};

/// Independent per-target least squares (ridge when hp.ridge > 0), with an
/// unpenalized intercept. Inputs are standardized internally.
[[nodiscard]] SurrogatePtr fit_linear_ensemble(const Matrix& x, const Matrix& y,
                                               const LinearParams& hp);

/// Regressor chain: target order[k] also sees the fitted predictions of
/// order[0..k). Empty hp.chain_order means target index order.
[[nodiscard]] SurrogatePtr fit_linear_chain(const Matrix& x, const Matrix& y,
                                            const LinearParams& hp);

[[nodiscard]] SurrogatePtr linear_from_json(Family family, const LinearParams& hp,
                                            const nlohmann::json& params);

}  // namespace gridsur
