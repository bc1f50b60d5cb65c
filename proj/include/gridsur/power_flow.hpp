#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "gridsur/grid.hpp"

namespace gridsur {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using SparseComplexMatrix = Eigen::SparseMatrix<Complex>;

/// System frequency used for line charging.
inline constexpr double kSystemFrequencyHz = 50.0;

/// Bus admittance matrix in per-unit, plus which bus is the slack.
struct AdmittanceMatrix {
  SparseComplexMatrix y;
  int slack = 0;

  [[nodiscard]] int size() const { return static_cast<int>(y.rows()); }
};

/// Net injected power per bus in per-unit (loads negative, generation
/// positive). Slack entries are ignored by the solvers.
struct InjectionVector {
  Eigen::VectorXd p_pu;
  Eigen::VectorXd q_pu;

  [[nodiscard]] static InjectionVector zeros(int n) {
    return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  }
};

struct PowerFlowResult {
  Eigen::VectorXd vm_pu;
  Eigen::VectorXd va_rad;
  bool converged = false;
  /// Mismatch evaluations performed, including the final converged check.
  int iterations = 0;
  double max_mismatch_pu = 0.0;
};

enum class LinearSolverKind {
  Auto,    // dense below kDenseJacobianLimit unknowns, sparse above
  Dense,   // partial-pivot LU on a dense Jacobian
  Sparse,  // Eigen::SparseLU
};

inline constexpr int kDenseJacobianLimit = 128;

struct SolverOptions {
  double tol_pu = 1e-8;
  int max_iter = 30;
  bool flat_start = true;
  /// Used when flat_start is false; size must match the bus count.
  ComplexVector initial_voltage;
  LinearSolverKind linear_solver = LinearSolverKind::Auto;
  /// Gauss-Seidel over-relaxation factor (1 = plain Gauss-Seidel).
  double acceleration = 1.0;

  [[nodiscard]] static SolverOptions gauss_seidel() {
    SolverOptions o;
    o.max_iter = 200000;
    return o;
  }
};

class PowerFlowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonConvergence : public PowerFlowError {
 public:
  NonConvergence(int iterations, double last_mismatch);
  [[nodiscard]] int iterations() const { return iterations_; }
  [[nodiscard]] double last_mismatch() const { return last_mismatch_; }

 private:
  int iterations_;
  double last_mismatch_;
};

class SingularJacobian : public PowerFlowError {
 public:
  explicit SingularJacobian(int iteration);
};

/// Thrown by build_ybus when a branch has zero series impedance.
class ZeroImpedance : public PowerFlowError {
 public:
  using PowerFlowError::PowerFlowError;
};

[[nodiscard]] AdmittanceMatrix build_ybus(const Grid& grid);

/// Builds an admittance matrix from explicit per-unit branches. Used for
/// hand-built test systems.
struct PuBranch {
  int from = 0;
  int to = 0;
  Complex z;            // series impedance, pu
  double b_total = 0;   // total shunt susceptance, pu (half at each end)
};
[[nodiscard]] AdmittanceMatrix build_ybus(int n_buses, int slack,
                                          std::span<const PuBranch> branches);

/// Assembles injections from per-attachment active/reactive power (MW,
/// Mvar, consumption positive for loads and generation positive for SGens).
[[nodiscard]] InjectionVector build_injections(const Grid& grid,
                                               std::span<const double> p_mw,
                                               std::span<const double> q_mvar);

/// Polar Newton-Raphson. Throws NonConvergence or SingularJacobian.
[[nodiscard]] PowerFlowResult nr_solve(const AdmittanceMatrix& y,
                                       const InjectionVector& inj,
                                       const SolverOptions& opts = {});

/// Gauss-Seidel; converges to the same fixed point as nr_solve, slowly.
[[nodiscard]] PowerFlowResult gs_solve(
    const AdmittanceMatrix& y, const InjectionVector& inj,
    const SolverOptions& opts = SolverOptions::gauss_seidel());

/// max over non-slack buses of |S_specified - V conj(Y V)|.
[[nodiscard]] double check_power_balance(const AdmittanceMatrix& y,
                                         const InjectionVector& inj,
                                         const PowerFlowResult& result);

[[nodiscard]] ComplexVector complex_voltage(const PowerFlowResult& r);

}  // namespace gridsur
