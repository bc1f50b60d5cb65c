#include "gridsur/power_flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SparseLU>

namespace gridsur {

NonConvergence::NonConvergence(int iterations, double last_mismatch)
    : PowerFlowError("power flow did not converge after " +
                     std::to_string(iterations) +
                     " iterations (max mismatch " +
                     std::to_string(last_mismatch) + " pu)"),
      iterations_(iterations),
      last_mismatch_(last_mismatch) {}

SingularJacobian::SingularJacobian(int iteration)
    : PowerFlowError("singular Jacobian at iteration " +
                     std::to_string(iteration)) {}

namespace {

using Triplet = Eigen::Triplet<Complex>;

void stamp_branch(std::vector<Triplet>& t, int from, int to, Complex y_series,
                  Complex y_shunt_half, double tap = 1.0) {
  t.emplace_back(from, from, y_series / (tap * tap) + y_shunt_half);
  t.emplace_back(to, to, y_series + y_shunt_half);
  t.emplace_back(from, to, -y_series / tap);
  t.emplace_back(to, from, -y_series / tap);
}

AdmittanceMatrix assemble(int n, int slack, const std::vector<Triplet>& t) {
  AdmittanceMatrix a;
  a.y.resize(n, n);
  a.y.setFromTriplets(t.begin(), t.end());
  a.y.makeCompressed();
  a.slack = slack;
  return a;
}

}  // namespace

AdmittanceMatrix build_ybus(const Grid& grid) {
  const int n = static_cast<int>(grid.buses.size());
  std::vector<Triplet> t;
  t.reserve(4 * (grid.lines.size() + grid.transformers.size()));
  const double omega = 2.0 * std::numbers::pi * kSystemFrequencyHz;

  for (std::size_t i = 0; i < grid.lines.size(); ++i) {
    const auto& l = grid.lines[i];
    const double vn = grid.buses.at(l.from_bus).vn_kv;
    const double z_base = vn * vn / grid.base_mva;
    const Complex z{l.r_ohm_per_km * l.length_km / z_base,
                    l.x_ohm_per_km * l.length_km / z_base};
    if (std::abs(z) == 0.0)
      throw ZeroImpedance("line " + std::to_string(i) +
                          " has zero series impedance");
    const double b = omega * l.c_nf_per_km * 1e-9 * l.length_km * z_base;
    stamp_branch(t, l.from_bus, l.to_bus, 1.0 / z, Complex{0.0, b / 2.0});
  }
  for (std::size_t i = 0; i < grid.transformers.size(); ++i) {
    const auto& tr = grid.transformers[i];
    const double scale = grid.base_mva / tr.sn_mva;
    const double z_mag = tr.vk_percent / 100.0 * scale;
    const double r = tr.vkr_percent / 100.0 * scale;
    const double x = std::sqrt(std::max(0.0, z_mag * z_mag - r * r));
    const Complex z{r, x};
    if (std::abs(z) == 0.0)
      throw ZeroImpedance("transformer " + std::to_string(i) +
                          " has zero series impedance");
    const double nominal = grid.buses.at(tr.hv_bus).vn_kv /
                           grid.buses.at(tr.lv_bus).vn_kv;
    stamp_branch(t, tr.hv_bus, tr.lv_bus, 1.0 / z, Complex{}, tr.ratio / nominal);
  }
  return assemble(n, grid.slack_bus(), t);
}

AdmittanceMatrix build_ybus(int n_buses, int slack,
                            std::span<const PuBranch> branches) {
  std::vector<Triplet> t;
  for (const auto& br : branches) {
    if (std::abs(br.z) == 0.0)
      throw ZeroImpedance("branch has zero series impedance");
    stamp_branch(t, br.from, br.to, 1.0 / br.z, Complex{0.0, br.b_total / 2.0});
  }
  return assemble(n_buses, slack, t);
}

InjectionVector build_injections(const Grid& grid, std::span<const double> p_mw,
                                 std::span<const double> q_mvar) {
  if (p_mw.size() != grid.attachments.size() ||
      q_mvar.size() != grid.attachments.size())
    throw std::invalid_argument("build_injections: expected one P and Q value "
                                "per attachment");
  auto inj = InjectionVector::zeros(static_cast<int>(grid.buses.size()));
  for (std::size_t i = 0; i < grid.attachments.size(); ++i) {
    const auto& a = grid.attachments[i];
    const double sign = a.kind == AttachmentKind::Load ? -1.0 : 1.0;
    inj.p_pu[a.bus] += sign * p_mw[i] / grid.base_mva;
    inj.q_pu[a.bus] += sign * q_mvar[i] / grid.base_mva;
  }
  return inj;
}

namespace {

struct SolverState {
  Eigen::VectorXd vm, va;
  ComplexVector v;

  void refresh() {
    v.resize(vm.size());
    for (Eigen::Index i = 0; i < vm.size(); ++i) v[i] = std::polar(vm[i], va[i]);
  }
};

SolverState initial_state(const AdmittanceMatrix& y, const SolverOptions& opts) {
  const int n = y.size();
  SolverState s;
  if (opts.flat_start) {
    s.vm = Eigen::VectorXd::Ones(n);
    s.va = Eigen::VectorXd::Zero(n);
  } else {
    if (opts.initial_voltage.size() != n)
      throw std::invalid_argument("initial_voltage has wrong size");
    s.vm = opts.initial_voltage.cwiseAbs();
    s.va = opts.initial_voltage.unaryExpr([](Complex c) { return std::arg(c); })
               .real();
  }
  s.vm[y.slack] = 1.0;
  s.va[y.slack] = 0.0;
  s.refresh();
  return s;
}

void check_inputs(const AdmittanceMatrix& y, const InjectionVector& inj,
                  const SolverOptions& opts) {
  const int n = y.size();
  if (y.y.cols() != n) throw std::invalid_argument("Ybus must be square");
  if (inj.p_pu.size() != n || inj.q_pu.size() != n)
    throw std::invalid_argument("injection vector size does not match Ybus");
  if (y.slack < 0 || y.slack >= n)
    throw std::invalid_argument("slack bus out of range");
  if (!(opts.tol_pu > 0)) throw std::invalid_argument("tol_pu must be > 0");
  if (opts.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
  if (!inj.p_pu.allFinite() || !inj.q_pu.allFinite())
    throw std::invalid_argument("injections must be finite");
}

// Largest |S_calc - S_spec| over non-slack buses. Fills the stacked P/Q
// residual vector when `f` is given.
double mismatch(const InjectionVector& inj,
                const ComplexVector& v, const ComplexVector& current,
                const std::vector<int>& pq, Eigen::VectorXd* f) {
  const auto npq = static_cast<Eigen::Index>(pq.size());
  double worst = 0.0;
  for (Eigen::Index k = 0; k < npq; ++k) {
    const int i = pq[k];
    const Complex s = v[i] * std::conj(current[i]);
    const double dp = s.real() - inj.p_pu[i];
    const double dq = s.imag() - inj.q_pu[i];
    if (f) {
      (*f)[k] = dp;
      (*f)[npq + k] = dq;
    }
    worst = std::max(worst, std::hypot(dp, dq));
    if (!std::isfinite(dp) || !std::isfinite(dq))
      return std::numeric_limits<double>::infinity();
  }
  return worst;
}

std::vector<int> pq_buses(const AdmittanceMatrix& y, std::vector<int>& index) {
  std::vector<int> pq;
  index.assign(static_cast<std::size_t>(y.size()), -1);
  for (int i = 0; i < y.size(); ++i) {
    if (i == y.slack) continue;
    index[i] = static_cast<int>(pq.size());
    pq.push_back(i);
  }
  return pq;
}

PowerFlowResult finish(const SolverState& s, int iterations, double mis) {
  PowerFlowResult r;
  r.vm_pu = s.vm;
  r.va_rad = s.va;
  r.converged = true;
  r.iterations = iterations;
  r.max_mismatch_pu = mis;
  return r;
}

}  // namespace

PowerFlowResult nr_solve(const AdmittanceMatrix& y, const InjectionVector& inj,
                         const SolverOptions& opts) {
  check_inputs(y, inj, opts);
  std::vector<int> index;
  const std::vector<int> pq = pq_buses(y, index);
  const auto npq = static_cast<Eigen::Index>(pq.size());
  const Eigen::Index dim = 2 * npq;

  SolverState s = initial_state(y, opts);
  const bool dense = opts.linear_solver == LinearSolverKind::Dense ||
                     (opts.linear_solver == LinearSolverKind::Auto &&
                      dim <= kDenseJacobianLimit);

  Eigen::VectorXd f(dim);
  Eigen::MatrixXd jac_dense;
  Eigen::SparseMatrix<double> jac_sparse;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> sparse_lu;
  std::vector<Eigen::Triplet<double>> triplets;
  bool pattern_ready = false;

  for (int it = 1;; ++it) {
    const ComplexVector current = y.y * s.v;
    const double mis = mismatch(inj, s.v, current, pq, &f);
    if (mis <= opts.tol_pu) return finish(s, it, mis);
    if (!std::isfinite(mis) || it >= opts.max_iter) throw NonConvergence(it, mis);

    // Jacobian blocks [dP/dVa dP/dVm; dQ/dVa dQ/dVm] from the complex
    // derivatives dS/dVa = jV conj(I - Y V_k), dS/dVm = V conj(Y Vn_k) + ...
    auto put = [&](Eigen::Index r, Eigen::Index c, double val) {
      if (dense)
        jac_dense(r, c) += val;
      else
        triplets.emplace_back(static_cast<int>(r), static_cast<int>(c), val);
    };
    if (dense)
      jac_dense.setZero(dim, dim);
    else
      triplets.clear();

    for (int k = 0; k < y.y.outerSize(); ++k) {
      const int col = index[k];
      if (col < 0) continue;
      const Complex vn_k = s.v[k] / s.vm[k];
      for (SparseComplexMatrix::InnerIterator e(y.y, k); e; ++e) {
        const int i = static_cast<int>(e.row());
        const int row = index[i];
        if (row < 0) continue;
        const Complex dva = Complex{0.0, -1.0} * s.v[i] * std::conj(e.value() * s.v[k]);
        const Complex dvm = s.v[i] * std::conj(e.value() * vn_k);
        put(row, col, dva.real());
        put(row, npq + col, dvm.real());
        put(npq + row, col, dva.imag());
        put(npq + row, npq + col, dvm.imag());
      }
    }
    for (Eigen::Index kk = 0; kk < npq; ++kk) {
      const int i = pq[kk];
      const Complex dva = Complex{0.0, 1.0} * s.v[i] * std::conj(current[i]);
      const Complex dvm = std::conj(current[i]) * s.v[i] / s.vm[i];
      put(kk, kk, dva.real());
      put(kk, npq + kk, dvm.real());
      put(npq + kk, kk, dva.imag());
      put(npq + kk, npq + kk, dvm.imag());
    }

    Eigen::VectorXd dx;
    if (dense) {
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac_dense);
      const auto& u = lu.matrixLU();
      const double scale = u.diagonal().cwiseAbs().maxCoeff();
      if (!(u.diagonal().cwiseAbs().minCoeff() > 1e-14 * scale))
        throw SingularJacobian(it);
      dx = lu.solve(-f);
    } else {
      jac_sparse.resize(dim, dim);
      jac_sparse.setFromTriplets(triplets.begin(), triplets.end());
      jac_sparse.makeCompressed();
      if (!pattern_ready) {
        sparse_lu.analyzePattern(jac_sparse);
        pattern_ready = true;
      }
      sparse_lu.factorize(jac_sparse);
      if (sparse_lu.info() != Eigen::Success) throw SingularJacobian(it);
      dx = sparse_lu.solve(-f);
    }
    if (!dx.allFinite()) throw SingularJacobian(it);

    for (Eigen::Index kk = 0; kk < npq; ++kk) {
      const int i = pq[kk];
      s.va[i] += dx[kk];
      s.vm[i] += dx[npq + kk];
    }
    s.refresh();
  }
}

PowerFlowResult gs_solve(const AdmittanceMatrix& y, const InjectionVector& inj,
                         const SolverOptions& opts) {
  check_inputs(y, inj, opts);
  std::vector<int> index;
  const std::vector<int> pq = pq_buses(y, index);
  const Eigen::SparseMatrix<Complex, Eigen::RowMajor> rows = y.y;

  SolverState s = initial_state(y, opts);
  ComplexVector& v = s.v;
  std::vector<Complex> diag(static_cast<std::size_t>(y.size()));
  for (int i : pq) {
    diag[i] = rows.coeff(i, i);
    if (std::abs(diag[i]) == 0.0) throw SingularJacobian(0);
  }

  for (int it = 1;; ++it) {
    const ComplexVector current = y.y * v;
    const double mis = mismatch(inj, v, current, pq, nullptr);
    if (mis <= opts.tol_pu) {
      s.vm = v.cwiseAbs();
      s.va = v.unaryExpr([](Complex c) { return std::arg(c); }).real();
      s.vm[y.slack] = 1.0;
      s.va[y.slack] = 0.0;
      return finish(s, it, mis);
    }
    if (!std::isfinite(mis) || it >= opts.max_iter) throw NonConvergence(it, mis);

    for (int i : pq) {
      Complex sum{};
      for (decltype(rows)::InnerIterator e(rows, i); e; ++e)
        if (e.col() != i) sum += e.value() * v[e.col()];
      const Complex s_spec{inj.p_pu[i], inj.q_pu[i]};
      const Complex next = (std::conj(s_spec) / std::conj(v[i]) - sum) / diag[i];
      v[i] += opts.acceleration * (next - v[i]);
    }
  }
}

ComplexVector complex_voltage(const PowerFlowResult& r) {
  ComplexVector v(r.vm_pu.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::polar(r.vm_pu[i], r.va_rad[i]);
  return v;
}

double check_power_balance(const AdmittanceMatrix& y, const InjectionVector& inj,
                           const PowerFlowResult& result) {
  const ComplexVector v = complex_voltage(result);
  const ComplexVector current = y.y * v;
  double worst = 0.0;
  for (int i = 0; i < y.size(); ++i) {
    if (i == y.slack) continue;
    const Complex spec{inj.p_pu[i], inj.q_pu[i]};
    worst = std::max(worst, std::abs(spec - v[i] * std::conj(current[i])));
  }
  return worst;
}

}  // namespace gridsur
