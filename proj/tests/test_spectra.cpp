#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "ionlag/errors.hpp"
#include "ionlag/numerics.hpp"
#include "ionlag/spectra.hpp"

using namespace ionlag;

namespace {

ReducedParams desk(int m, Branch b, double eta, double w0 = 10.0, double rabi = 1.0, double nbar = 0.38) {
  return ReducedParams::dimensionless(w0, rabi, eta, nbar, QuenchSpec(m, b));
}

// Eigenvalues of the analytic blocks that are fully inside a dense matrix of size N.
std::vector<double> analytic_interior(const ReducedParams& rp, int n_trunc) {
  std::vector<double> out = edge_eigenvalues(rp);
  for (int n = 0; n + rp.m <= n_trunc; ++n) {
    const auto [mu, g] = sideband_eigenvalues(n, rp);
    out.push_back(mu);
    out.push_back(g);
  }
  const auto top = truncation_boundary_energies(rp, n_trunc);
  out.insert(out.end(), top.begin(), top.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("block eigenvalues: decoupled limit and trace identity") {
  for (Branch b : {Branch::JC, Branch::AJC}) {
    const ReducedParams rp = desk(2, b, 0.7, 10.0, 0.0);
    for (int n = 0; n < 10; ++n) {
      const auto [mu, g] = sideband_eigenvalues(n, rp);
      CHECK(mu == doctest::Approx(n + 1.0 - 0.5 * rp.wL()).epsilon(1e-15));
      CHECK(g == doctest::Approx(n + 1.0 + 0.5 * rp.wL()).epsilon(1e-15));
    }
    const ReducedParams on = desk(2, b, 0.7, 10.0, 3.0);
    for (int n = 0; n < 10; ++n) {
      const auto [mu, g] = sideband_eigenvalues(n, on);
      CHECK(mu <= g);
      CHECK(mu + g == doctest::Approx(2.0 * (n + 1.0)).epsilon(1e-14));
    }
  }
}

TEST_CASE("edge eigenvalues") {
  CHECK(edge_eigenvalues(desk(0, Branch::JC, 0.5)).empty());
  const auto jc = edge_eigenvalues(desk(2, Branch::JC, 0.5));
  REQUIRE(jc.size() == 2);
  CHECK(jc[0] == -5.0);
  CHECK(jc[1] == -4.0);
  const auto ajc = edge_eigenvalues(desk(1, Branch::AJC, 0.5));
  REQUIRE(ajc.size() == 1);
  CHECK(ajc[0] == 5.0);
}

TEST_CASE("block eigenvectors are orthonormal eigenvectors of the dense sideband matrix") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> eta_d(0.05, 2.5), w0_d(0.3, 30.0), om_d(0.01, 8.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = trial % 4;
    const Branch b = trial % 2 ? Branch::JC : Branch::AJC;
    const ReducedParams rp = desk(m, b, eta_d(rng), w0_d(rng), om_d(rng));
    const int nt = 30;
    const DenseOperators ops = dense_hamiltonians(rp, nt);
    const double hn = ops.h_final_sideband.norm();
    for (int n = 0; n + m <= nt; n += 3) {
      const auto pair = sideband_eigenvectors(n, rp);
      const Eigen::VectorXcd lo = pair[0].dense(nt), hi = pair[1].dense(nt);
      CHECK(std::fabs(lo.norm() - 1.0) < 1e-12);
      CHECK(std::fabs(hi.norm() - 1.0) < 1e-12);
      CHECK(std::abs(lo.dot(hi)) < 1e-12);
      for (const EigenPair* p : {&pair[0], &pair[1]}) {
        const Eigen::VectorXcd v = p->dense(nt);
        CHECK((ops.h_final_sideband * v - p->value * v).norm() <= 1e-10 * hn);
      }
    }
    for (const EigenPair& e : edge_eigenpairs(rp)) {
      const Eigen::VectorXcd v = e.dense(nt);
      CHECK((ops.h_final_sideband * v - e.value * v).norm() <= 1e-10 * hn);
    }
  }
}

TEST_CASE("decoupled eigenvectors when Omega vanishes") {
  const ReducedParams rp = desk(1, Branch::JC, 0.5, 10.0, 0.0);
  const auto p = sideband_eigenvectors(2, rp);
  // JC: lower level |n+m,g>, upper |n,e>.
  CHECK(p[0].kets[1] == BasisKet{3, Level::g});
  CHECK(std::abs(p[0].amplitudes[1]) == 1.0);
  CHECK(std::abs(p[1].amplitudes[0]) == 1.0);
  CHECK(p[1].value - p[0].value == doctest::Approx(std::fabs(rp.wL())));
}

TEST_CASE("Fig. 1 scale: eigenpairs at m = 1") {
  const double pi = std::numbers::pi;
  const ReducedParams rp = desk(1, Branch::JC, 0.5, 822.0 * pi * 1e12 / 5e3, pi * 1e6 / 5e3);
  for (int n : {0, 3}) {
    const SidebandBlock blk = sideband_block(n, rp);
    const auto pair = sideband_eigenvectors(n, rp);
    Eigen::Matrix2cd h;
    h << blk.d1, blk.c, std::conj(blk.c), blk.d2;
    for (const EigenPair& p : pair) {
      Eigen::Vector2cd v(p.amplitudes[0], p.amplitudes[1]);
      CHECK((h * v - p.value * v).norm() <= 1e-10 * h.norm());
    }
    // The 2x2 eigensolver sees the same splitting up to its conditioning.
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(h);
    CHECK(es.eigenvalues()(0) == doctest::Approx(pair[0].value).epsilon(1e-10));
    CHECK(es.eigenvalues()(1) == doctest::Approx(pair[1].value).epsilon(1e-10));
  }
}

TEST_CASE("displacement matrix") {
  const Eigen::MatrixXcd id = displacement_matrix(12, 0.0);
  CHECK((id - Eigen::MatrixXcd::Identity(13, 13)).norm() == 0.0);
  CHECK(std::abs(displacement_element(0, 0, 0.9) - std::exp(-0.405)) < 1e-15);

  for (double eta : {0.3, 1.0}) {
    const int nt = 60;
    const Eigen::MatrixXcd d = displacement_matrix(nt, eta);
    for (int c = 0; c <= nt / 2; ++c) CHECK(std::fabs(d.col(c).norm() - 1.0) < 1e-8);
    CHECK((d - d.transpose()).norm() == 0.0);
  }

  // Oracle: matrix exponential of i eta (a + a^dag) on a larger space.
  const int big = 90, keep = 25;
  const double eta = 0.8;
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(big + 1, big + 1);
  for (int n = 0; n < big; ++n) {
    x(n, n + 1) = std::sqrt(n + 1.0);
    x(n + 1, n) = std::sqrt(n + 1.0);
  }
  const Eigen::MatrixXcd ex = (std::complex<double>(0.0, eta) * x).exp();
  const Eigen::MatrixXcd d = displacement_matrix(keep, eta);
  CHECK((ex.topLeftCorner(keep + 1, keep + 1) - d).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("dense builders") {
  const ReducedParams off = desk(1, Branch::JC, 0.5, 10.0, 0.0);
  const DenseOperators o = dense_hamiltonians(off, 20);
  CHECK((o.h_final_full - o.h_initial).norm() == 0.0);
  CHECK(std::fabs(o.rho_initial.trace().real() - 1.0) < 1e-12);
  CHECK_THROWS_AS(dense_hamiltonians(desk(3, Branch::AJC, 0.5), 4), ParameterError);
  CHECK(dense_hamiltonians(desk(1, Branch::JC, 0.5, 10.0, 1.0, 100.0), 20).thermal_tail_warning);
  CHECK_FALSE(dense_hamiltonians(desk(1, Branch::JC, 0.5, 10.0, 1.0, 0.1), 20).thermal_tail_warning);
}

TEST_CASE("sideband matrix has only the predicted nonzeros") {
  for (Branch b : {Branch::JC, Branch::AJC}) {
    for (int m = 0; m <= 3; ++m) {
      const ReducedParams rp = desk(m, b, 0.9, 10.0, 2.0);
      const int nt = 15;
      const DenseOperators ops = dense_hamiltonians(rp, nt);
      Eigen::MatrixXi allowed = Eigen::MatrixXi::Zero(2 * (nt + 1), 2 * (nt + 1));
      for (int i = 0; i < allowed.rows(); ++i) allowed(i, i) = 1;
      for (int n = 0; n + m <= nt; ++n) {
        const SidebandBlock blk = sideband_block(n, rp);
        allowed(blk.a.dense_index(), blk.b.dense_index()) = 1;
        allowed(blk.b.dense_index(), blk.a.dense_index()) = 1;
      }
      int stray = 0;
      for (int i = 0; i < allowed.rows(); ++i) {
        for (int j = 0; j < allowed.cols(); ++j) {
          if (!allowed(i, j) && ops.h_final_sideband(i, j) != std::complex<double>(0.0, 0.0)) ++stray;
        }
      }
      CHECK(stray == 0);
    }
  }
}

TEST_CASE("analytic spectrum equals the dense sideband spectrum") {
  for (int m = 0; m <= 3; ++m) {
    for (Branch b : {Branch::JC, Branch::AJC}) {
      for (double eta : {0.1, 0.5, 1.5}) {
        const ReducedParams rp = desk(m, b, eta, 10.0, 1.0);
        const int nt = 40;
        const Eigen::VectorXd dense = dense_eigenvalues(dense_hamiltonians(rp, nt).h_final_sideband);
        const std::vector<double> ana = analytic_interior(rp, nt);
        REQUIRE(ana.size() == static_cast<std::size_t>(dense.size()));
        double worst = 0.0;
        for (std::size_t i = 0; i < ana.size(); ++i) {
          worst = std::max(worst, std::fabs(ana[i] - dense(i)) / std::max(1.0, std::fabs(ana[i])));
        }
        CHECK(worst <= 1e-10);
      }
    }
  }
}

TEST_CASE("analytic eigenvectors resolve the identity") {
  const ReducedParams rp = desk(2, Branch::AJC, 1.1, 7.0, 2.5);
  const int nt = 20;
  const int dim = 2 * (nt + 1);
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(dim, dim);
  for (const EigenPair& e : edge_eigenpairs(rp)) sum += e.dense(nt) * e.dense(nt).adjoint();
  for (int n = 0; n + rp.m <= nt; ++n) {
    for (const EigenPair& e : sideband_eigenvectors(n, rp)) sum += e.dense(nt) * e.dense(nt).adjoint();
  }
  // Boundary states (AJC |n,g> for n > N - m) are not covered by any block.
  for (int n = nt - rp.m + 1; n <= nt; ++n) {
    const int i = BasisKet{n, Level::g}.dense_index();
    sum(i, i) += 1.0;
  }
  CHECK((sum - Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("carrier blocks agree between the two branch layouts") {
  const ReducedParams c = desk(0, Branch::JC, 0.6, 10.0, 2.0);
  ReducedParams alt = c;
  alt.branch = Branch::AJC;  // m = 0 through the AJC layout
  for (int n = 0; n < 25; ++n) {
    const auto a = sideband_eigenvalues(n, c);
    const auto b = sideband_eigenvalues(n, alt);
    CHECK(a[0] == b[0]);
    CHECK(a[1] == b[1]);
  }
  const auto tc = spectrum_table(c, 25);
  CHECK(tc.edge.empty());
  CHECK(tc.pairs.size() == 26);
  for (int n = 0; n <= 25; ++n) CHECK(tc.pairs[n][0] == sideband_eigenvalues(n, c)[0]);
}
