#include "ionlag/spectra.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "ionlag/errors.hpp"
#include "ionlag/numerics.hpp"

namespace ionlag {

Eigen::VectorXcd EigenPair::dense(int n_trunc) const {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(2 * (n_trunc + 1));
  for (std::size_t i = 0; i < kets.size(); ++i) {
    if (kets[i].n > n_trunc) throw ParameterError("EigenPair::dense: ket outside truncated space");
    v(kets[i].dense_index()) = amplitudes[i];
  }
  return v;
}

SidebandBlock sideband_block(int n, const ReducedParams& rp) {
  const int m = rp.m;
  const CouplingValue f = coupling_f(n, m, rp.eta);
  const std::complex<double> half_rabi_f = 0.5 * rp.rabi * f.value();
  SidebandBlock blk;
  switch (rp.branch) {
    case Branch::JC:
    case Branch::Carrier:
      // {|n,e>, |n+m,g>}, coupling <n,e|H|n+m,g> = (Omega/2) f_n^m
      blk.a = {n, Level::e};
      blk.b = {n + m, Level::g};
      blk.d1 = n + 0.5 * rp.w0;
      blk.d2 = (n + m) - 0.5 * rp.w0;
      blk.c = half_rabi_f;
      break;
    case Branch::AJC:
      // {|n+m,e>, |n,g>}, coupling <n+m,e|H|n,g> = (Omega/2) conj(f_n^m)
      blk.a = {n + m, Level::e};
      blk.b = {n, Level::g};
      blk.d1 = (n + m) + 0.5 * rp.w0;
      blk.d2 = n - 0.5 * rp.w0;
      blk.c = std::conj(half_rabi_f);
      break;
  }
  return blk;
}

namespace {

double block_splitting(double wL, const CouplingValue& f, double rabi) {
  const double u = rabi * f.magnitude();
  return std::fabs(wL) + sqrt_excess(wL, u);
}

}  // namespace

std::array<double, 2> sideband_eigenvalues(int n, const ReducedParams& rp) {
  const double s = block_splitting(rp.wL(), coupling_f(n, rp.m, rp.eta), rp.rabi);
  const double mid = n + 0.5 * rp.m;
  return {mid - 0.5 * s, mid + 0.5 * s};
}

std::vector<double> edge_eigenvalues(const ReducedParams& rp) {
  std::vector<double> out;
  out.reserve(rp.m);
  const double half = 0.5 * rp.w0;
  for (int n = 0; n < rp.m; ++n) out.push_back(rp.branch == Branch::AJC ? n + half : n - half);
  return out;
}

std::vector<EigenPair> edge_eigenpairs(const ReducedParams& rp) {
  std::vector<EigenPair> out;
  const auto values = edge_eigenvalues(rp);
  for (int n = 0; n < rp.m; ++n) {
    const Level lvl = rp.branch == Branch::AJC ? Level::e : Level::g;
    out.push_back({values[n], {{n, lvl}}, {1.0}});
  }
  return out;
}

std::array<EigenPair, 2> sideband_eigenvectors(int n, const ReducedParams& rp) {
  const SidebandBlock blk = sideband_block(n, rp);
  const auto [mu, gamma] = sideband_eigenvalues(n, rp);
  const double delta = blk.d1 - blk.d2;
  EigenPair lo{mu, {blk.a, blk.b}, {}};
  EigenPair hi{gamma, {blk.a, blk.b}, {}};

  if (blk.c == std::complex<double>(0.0, 0.0)) {
    // Already diagonal: the upper level is whichever diagonal entry is larger.
    const bool a_upper = delta >= 0.0;
    hi.amplitudes = a_upper ? std::vector<std::complex<double>>{1.0, 0.0} : std::vector<std::complex<double>>{0.0, 1.0};
    lo.amplitudes = a_upper ? std::vector<std::complex<double>>{0.0, 1.0} : std::vector<std::complex<double>>{1.0, 0.0};
    hi.value = std::max(blk.d1, blk.d2);
    lo.value = std::min(blk.d1, blk.d2);
    return {lo, hi};
  }

  // t = (S + |delta|)/2 never cancels; pick the row of (H - lambda) that uses it.
  const double s = gamma - mu;
  const double t = 0.5 * (s + std::fabs(delta));
  const double norm = std::hypot(t, std::abs(blk.c));
  const std::complex<double> c = blk.c / norm;
  const double tn = t / norm;
  if (delta >= 0.0) {
    hi.amplitudes = {tn, std::conj(c)};
    lo.amplitudes = {-c, tn};
  } else {
    hi.amplitudes = {c, tn};
    lo.amplitudes = {-tn, std::conj(c)};
  }
  return {lo, hi};
}

SpectrumTable spectrum_table(const ReducedParams& rp, int n_trunc) {
  if (n_trunc < 0) throw ParameterError("spectrum_table: n_trunc must be nonnegative");
  SpectrumTable tab;
  tab.branch = rp.branch;
  tab.m = rp.m;
  tab.n_trunc = n_trunc;
  tab.edge = edge_eigenvalues(rp);
  CouplingStream stream({rp.m, rp.eta});
  const auto fs = stream.next(static_cast<std::size_t>(n_trunc) + 1);
  const double wL = rp.wL();
  for (int n = 0; n <= n_trunc; ++n) {
    const double s = block_splitting(wL, fs[n], rp.rabi);
    const double mid = n + 0.5 * rp.m;
    tab.pairs.push_back({mid - 0.5 * s, mid + 0.5 * s});
  }
  return tab;
}

std::complex<double> displacement_element(int n_row, int n_col, double eta) {
  if (n_row < 0 || n_col < 0) throw DomainError("displacement_element: negative index");
  if (n_row < n_col) return displacement_element(n_col, n_row, eta);
  return coupling_f(n_col, n_row - n_col, eta).value();
}

Eigen::MatrixXcd displacement_matrix(int n_trunc, double eta) {
  const int dim = n_trunc + 1;
  Eigen::MatrixXcd d(dim, dim);
  for (int m = 0; m < dim; ++m) {
    CouplingStream stream({m, eta});
    const auto fs = stream.next(static_cast<std::size_t>(dim - m));
    for (int n = 0; n + m < dim; ++n) {
      const std::complex<double> v = fs[n].value();
      d(n + m, n) = v;
      d(n, n + m) = v;
    }
  }
  return d;
}

DenseOperators dense_hamiltonians(const ReducedParams& rp, int n_trunc) {
  if (n_trunc < rp.m + 2) {
    throw ParameterError("dense_hamiltonians: n_trunc must be at least m + 2 (got " + std::to_string(n_trunc) + ")");
  }
  const int dim = 2 * (n_trunc + 1);
  DenseOperators ops;
  ops.n_trunc = n_trunc;

  ops.h_initial = Eigen::MatrixXcd::Zero(dim, dim);
  for (int n = 0; n <= n_trunc; ++n) {
    ops.h_initial(2 * n, 2 * n) = n - 0.5 * rp.w0;
    ops.h_initial(2 * n + 1, 2 * n + 1) = n + 0.5 * rp.w0;
  }

  // Full quench: H_i + (Omega/2)(sigma_+ (x) D + sigma_- (x) D^dag).
  const Eigen::MatrixXcd disp = displacement_matrix(n_trunc, rp.eta);
  ops.h_final_full = ops.h_initial;
  for (int r = 0; r <= n_trunc; ++r) {
    for (int c = 0; c <= n_trunc; ++c) {
      const std::complex<double> v = 0.5 * rp.rabi * disp(r, c);
      ops.h_final_full(2 * r + 1, 2 * c) += v;             // <r,e|H|c,g>
      ops.h_final_full(2 * c, 2 * r + 1) += std::conj(v);  // <c,g|H|r,e>
    }
  }

  ops.h_final_sideband = ops.h_initial;
  for (int n = 0; n + rp.m <= n_trunc; ++n) {
    const SidebandBlock blk = sideband_block(n, rp);
    ops.h_final_sideband(blk.a.dense_index(), blk.b.dense_index()) += blk.c;
    ops.h_final_sideband(blk.b.dense_index(), blk.a.dense_index()) += std::conj(blk.c);
  }

  // Gibbs state of H_i, normalized on the truncated space.
  Eigen::VectorXd w(dim);
  const double lg = -log1p_exp(-rp.b_w0);            // ln p_g
  const double le = -rp.b_w0 - log1p_exp(-rp.b_w0);  // ln p_e
  for (int n = 0; n <= n_trunc; ++n) {
    w(2 * n) = std::exp(-rp.b_nu * n + lg);
    w(2 * n + 1) = std::exp(-rp.b_nu * n + le);
  }
  const double total = w.sum();
  if (!(total > 0.0) || !std::isfinite(total)) throw ParameterError("dense_hamiltonians: Gibbs weights not normalizable");
  ops.rho_initial = (w / total).cast<std::complex<double>>().asDiagonal();
  ops.thermal_tail_warning = std::exp(-rp.b_nu * n_trunc) >= 1e-12;

  const double tr = ops.rho_initial.trace().real();
  if (std::fabs(tr - 1.0) > 1e-12) throw ParameterError("dense_hamiltonians: Tr rho != 1");
  auto herm_err = [](const Eigen::MatrixXcd& h) { return (h - h.adjoint()).cwiseAbs().maxCoeff() / std::max(1.0, h.norm()); };
  if (herm_err(ops.h_final_full) > 1e-12 || herm_err(ops.h_final_sideband) > 1e-12) {
    throw ParameterError("dense_hamiltonians: assembled Hamiltonian not Hermitian");
  }
  return ops;
}

Eigen::VectorXd dense_eigenvalues(const Eigen::MatrixXcd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw RangeError("dense_eigenvalues: eigensolver did not converge");
  return es.eigenvalues();
}

double dense_log_partition(const Eigen::MatrixXcd& h, double b_nu) {
  const Eigen::VectorXd ev = dense_eigenvalues(h);
  std::vector<double> terms(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) terms[i] = -b_nu * ev(i);
  return log_sum_exp(terms);
}

std::vector<double> truncation_boundary_energies(const ReducedParams& rp, int n_trunc) {
  std::vector<double> out;
  for (int n = std::max(0, n_trunc - rp.m + 1); n <= n_trunc; ++n) {
    if (rp.branch == Branch::JC) out.push_back(n + 0.5 * rp.w0);
    if (rp.branch == Branch::AJC) out.push_back(n - 0.5 * rp.w0);
  }
  return out;
}

}  // namespace ionlag
