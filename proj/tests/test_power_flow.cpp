#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gridsur/power_flow.hpp"

using namespace gridsur;

namespace {

const Complex kZ{0.01, 0.02};

AdmittanceMatrix two_bus_y() {
  const PuBranch b{0, 1, kZ, 0.0};
  return build_ybus(2, 0, std::span(&b, 1));
}

InjectionVector two_bus_load(double p, double q) {
  auto inj = InjectionVector::zeros(2);
  inj.p_pu[1] = -p;
  inj.q_pu[1] = -q;
  return inj;
}

// V2 <- 1 - z conj(S_load / V2), iterated to a fixed point.
Complex two_bus_oracle(double p, double q) {
  const Complex s{p, q};
  Complex v{1.0, 0.0};
  for (int i = 0; i < 10000; ++i) {
    const Complex next = 1.0 - kZ * std::conj(s / v);
    if (std::abs(next - v) < 1e-15) return next;
    v = next;
  }
  return v;
}

InjectionVector random_injection(const Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p, q;
  for (const auto& a : g.attachments) {
    const double pw = a.scaling * u(rng);
    p.push_back(pw);
    q.push_back(a.kind == AttachmentKind::Load ? pw * 0.4843 : 0.0);
  }
  return build_injections(g, p, q);
}

}  // namespace

TEST(Ybus, SingleLineHandExample) {
  const auto y = two_bus_y();
  const Eigen::MatrixXcd d(y.y);
  EXPECT_NEAR(std::abs(d(0, 0) - Complex(20, -40)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(d(0, 1) - Complex(-20, 40)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(d(1, 0) - Complex(-20, 40)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(d(1, 1) - Complex(20, -40)), 0.0, 1e-12);
}

TEST(Ybus, SlackOnlyGrid) {
  const auto y = build_ybus(1, 0, {});
  ASSERT_EQ(y.size(), 1);
  EXPECT_EQ(Eigen::MatrixXcd(y.y)(0, 0), Complex(0.0));
}

TEST(Ybus, FixturesSymmetricWithShuntRowSums) {
  for (auto kind : {FixtureKind::CigreLvLike, FixtureKind::RuralLvLike}) {
    const Grid g = build_fixture(kind);
    const Eigen::MatrixXcd d(build_ybus(g).y);
    EXPECT_LT((d - d.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    // Row sums are purely capacitive shunt.
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
      const Complex s = d.row(i).sum();
      EXPECT_NEAR(s.real(), 0.0, 1e-9 * d.row(i).cwiseAbs().maxCoeff());
      EXPECT_GE(s.imag(), -1e-9 * d.row(i).cwiseAbs().maxCoeff());
    }
  }
}

TEST(Ybus, ZeroImpedanceIsError) {
  const PuBranch b{0, 1, Complex(0, 0), 0.0};
  EXPECT_THROW((void)build_ybus(2, 0, std::span(&b, 1)), ZeroImpedance);
}

TEST(NewtonRaphson, FlatNoLoadCase) {
  std::vector<AdmittanceMatrix> systems = {two_bus_y()};
  for (auto kind : {FixtureKind::CigreLvLike, FixtureKind::RuralLvLike}) {
    Grid g = build_fixture(kind);
    for (auto& line : g.lines) line.c_nf_per_km = 0.0;
    systems.push_back(build_ybus(g));
  }
  for (const auto& y : systems) {
    const auto inj = InjectionVector::zeros(y.size());
    const auto r = nr_solve(y, inj);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 1);
    EXPECT_LE((r.vm_pu.array() - 1.0).abs().maxCoeff(), 1e-10);
    EXPECT_LE(r.va_rad.cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE(check_power_balance(y, inj, r), 1e-12);
  }
}

TEST(NewtonRaphson, TwoBusMatchesFixedPointOracle) {
  const auto y = two_bus_y();
  const auto inj = two_bus_load(0.1, 0.05);
  const auto r = nr_solve(y, inj);
  const Complex v = two_bus_oracle(0.1, 0.05);
  EXPECT_NEAR(r.vm_pu[1], std::abs(v), 1e-10);
  EXPECT_NEAR(r.va_rad[1], std::arg(v), 1e-10);
  EXPECT_NEAR(r.vm_pu[1], 0.99800, 1e-5);
  EXPECT_EQ(r.vm_pu[0], 1.0);
  EXPECT_EQ(r.va_rad[0], 0.0);
  EXPECT_LE(r.max_mismatch_pu, 1e-8);
}

TEST(NewtonRaphson, InfeasibleLoadDoesNotConverge) {
  try {
    (void)nr_solve(two_bus_y(), two_bus_load(60.0, 0.0));
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_GT(e.iterations(), 0);
    EXPECT_GT(e.last_mismatch(), 1e-8);
  }
}

TEST(NewtonRaphson, MonotoneStress) {
  const auto y = two_bus_y();
  double prev = 1.0;
  int solved = 0;
  for (double p = 0.5;; p += 0.5) {
    try {
      const auto r = nr_solve(y, two_bus_load(p, 0.0));
      EXPECT_LT(r.vm_pu[1], prev) << "p=" << p;
      prev = r.vm_pu[1];
      ++solved;
    } catch (const PowerFlowError&) {
      break;
    }
    ASSERT_LT(p, 100.0);
  }
  EXPECT_GT(solved, 5);
}

TEST(NewtonRaphson, DenseAndSparseAgree) {
  const Grid g = build_fixture(FixtureKind::RuralLvLike);
  const auto y = build_ybus(g);
  std::mt19937_64 rng(3);
  const auto inj = random_injection(g, rng);
  SolverOptions dense, sparse;
  dense.linear_solver = LinearSolverKind::Dense;
  sparse.linear_solver = LinearSolverKind::Sparse;
  const auto a = nr_solve(y, inj, dense);
  const auto b = nr_solve(y, inj, sparse);
  EXPECT_LE((a.vm_pu - b.vm_pu).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(GaussSeidel, FlatCaseIdenticalToNr) {
  const auto y = two_bus_y();
  const auto inj = InjectionVector::zeros(2);
  const auto a = gs_solve(y, inj);
  const auto b = nr_solve(y, inj);
  EXPECT_EQ(a.vm_pu, b.vm_pu);
  EXPECT_EQ(a.va_rad, b.va_rad);
}

TEST(GaussSeidel, TwoBusAgreesWithNr) {
  const auto y = two_bus_y();
  const auto inj = two_bus_load(0.1, 0.05);
  auto opts = SolverOptions::gauss_seidel();
  opts.tol_pu = 1e-11;
  EXPECT_NEAR(gs_solve(y, inj, opts).vm_pu[1], nr_solve(y, inj).vm_pu[1], 1e-8);
}

class OracleAgreement : public ::testing::TestWithParam<FixtureKind> {};

TEST_P(OracleAgreement, HundredSeededCases) {
  const Grid g = build_fixture(GetParam());
  const auto y = build_ybus(g);
  std::mt19937_64 rng(20240601);
  auto gs_opts = SolverOptions::gauss_seidel();
  gs_opts.tol_pu = 1e-11;
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const auto inj = random_injection(g, rng);
    const auto nr = nr_solve(y, inj);
    const auto gs = gs_solve(y, inj, gs_opts);
    ASSERT_TRUE(nr.converged && gs.converged);
    EXPECT_LE(check_power_balance(y, inj, nr), 1e-8);
    worst = std::max(worst, (nr.vm_pu - gs.vm_pu).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(worst, 1e-8);
}

INSTANTIATE_TEST_SUITE_P(Fixtures, OracleAgreement,
                         ::testing::Values(FixtureKind::CigreLvLike, FixtureKind::RuralLvLike));

TEST(PowerBalance, PerturbationBreaksBalance) {
  const auto y = two_bus_y();
  const auto inj = two_bus_load(0.1, 0.05);
  auto r = nr_solve(y, inj);
  EXPECT_LE(check_power_balance(y, inj, r), 1e-8);
  r.vm_pu[1] += 0.01;
  // |S_spec - V conj(YV)| recomputed by hand.
  const Complex v1 = std::polar(r.vm_pu[1], r.va_rad[1]);
  const Complex i1 = Complex(-20, 40) * 1.0 + Complex(20, -40) * v1;
  const double expected = std::abs(Complex(-0.1, -0.05) - v1 * std::conj(i1));
  EXPECT_NEAR(check_power_balance(y, inj, r), expected, 1e-12);
  EXPECT_GT(expected, 1e-8);
}

TEST(NewtonRaphson, WarmStartUsesFewerIterations) {
  const auto y = two_bus_y();
  const auto inj = two_bus_load(0.1, 0.05);
  const auto cold = nr_solve(y, inj);
  SolverOptions warm;
  warm.flat_start = false;
  warm.initial_voltage = complex_voltage(cold);
  const auto r = nr_solve(y, inj, warm);
  EXPECT_LE(r.iterations, cold.iterations);
  EXPECT_NEAR(r.vm_pu[1], cold.vm_pu[1], 1e-12);
}
