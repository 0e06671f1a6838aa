#include "ionlag/workstats.hpp"

#include <algorithm>
#include <cmath>

#include "ionlag/errors.hpp"
#include "ionlag/numerics.hpp"
#include "ionlag/spectra.hpp"

namespace ionlag {

WorkMoments moments_analytic(const ReducedParams& rp) {
  WorkMoments w;
  w.mean = 0.0;
  const double om2 = rp.rabi * rp.rabi;
  w.second = 0.25 * om2;
  w.third = 0.25 * om2 * (rp.eta * rp.eta + rp.w0 * std::tanh(0.5 * rp.b_w0));
  w.skewness = w.second > 0.0 ? w.third / std::pow(w.second, 1.5) : 0.0;
  return w;
}

NumericMoment moments_numeric(const ReducedParams& rp, int n_trunc, int order, QuenchTarget target) {
  if (order < 1 || order > 4) throw DomainError("moments_numeric: order must be in 1..4");
  const DenseOperators ops = dense_hamiltonians(rp, n_trunc);
  const Eigen::MatrixXcd& hf = target == QuenchTarget::Full ? ops.h_final_full : ops.h_final_sideband;
  const Eigen::VectorXd hi = ops.h_initial.diagonal().real();
  const Eigen::VectorXd rho = ops.rho_initial.diagonal().real();

  // Diagonals of H_f^j for j = 0..order.
  std::vector<Eigen::VectorXd> diag_pow;
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Identity(hf.rows(), hf.cols());
  for (int j = 0; j <= order; ++j) {
    diag_pow.push_back(p.diagonal().real());
    if (j < order) p = p * hf;
  }

  NumericMoment out;
  out.thermal_tail_warning = ops.thermal_tail_warning;
  double binom = 1.0;
  double largest = 0.0;
  for (int k = 0; k <= order; ++k) {
    const Eigen::VectorXd hik = hi.array().pow(k);
    const double tr = (diag_pow[order - k].array() * hik.array() * rho.array()).sum();
    const double term = (k % 2 == 0 ? 1.0 : -1.0) * binom * tr;
    out.value += term;
    largest = std::max(largest, std::fabs(term));
    binom = binom * (order - k) / (k + 1);
  }
  out.cancellation_ratio = out.value != 0.0 ? largest / std::fabs(out.value) : std::numeric_limits<double>::infinity();
  out.cancellation_warning = out.cancellation_ratio > 1e6;
  return out;
}

double WorkPMF::total() const {
  double s = 0.0;
  for (const auto& [w, p] : points) s += p;
  return s;
}

double WorkPMF::moment(int order) const {
  double s = 0.0;
  for (const auto& [w, p] : points) s += p * std::pow(w, order);
  return s;
}

WorkPMF work_pmf_sideband(const ReducedParams& rp, int n_trunc) {
  if (n_trunc < 0) throw ParameterError("work_pmf_sideband: n_trunc must be nonnegative");
  const double ln_q0 = log1m_exp(rp.b_nu);
  const double ln_pg = -log1p_exp(-rp.b_w0);
  const double ln_pe = -rp.b_w0 + ln_pg;
  auto prob = [&](BasisKet k) { return std::exp(ln_q0 - rp.b_nu * k.n + (k.level == Level::e ? ln_pe : ln_pg)); };

  std::vector<std::pair<double, double>> raw;
  double emax = 0.5 * rp.w0 + n_trunc + rp.m;

  for (const EigenPair& e : edge_eigenpairs(rp)) {
    if (e.kets.front().n <= n_trunc) raw.emplace_back(0.0, prob(e.kets.front()));
  }

  const double wL = rp.wL();
  CouplingStream stream({rp.m, rp.eta});
  const auto fs = stream.next(static_cast<std::size_t>(n_trunc) + 1);
  for (int n = 0; n <= n_trunc; ++n) {
    const SidebandBlock blk = sideband_block(n, rp);
    const double delta = blk.d1 - blk.d2;
    const double ex = sqrt_excess(wL, rp.rabi * fs[n].magnitude());
    const double ad = std::fabs(delta);
    const double s = ad + ex;
    const double t = 0.5 * (s + ad);
    const double c2 = std::norm(blk.c);
    const double nrm = t * t + c2;
    // Overlap of the "aligned" level (the eigenvector dominated by the same ket).
    const double big = nrm > 0.0 ? t * t / nrm : 1.0;
    const double small = nrm > 0.0 ? c2 / nrm : 0.0;
    // Work for a transition out of ket a (diagonal d1) and ket b (d2).
    const double s_minus_delta = delta >= 0.0 ? ex : 2.0 * ad + ex;
    const double s_plus_delta = delta >= 0.0 ? 2.0 * ad + ex : ex;
    const bool a_upper = delta >= 0.0;
    if (blk.a.n <= n_trunc) {
      const double p = prob(blk.a);
      raw.emplace_back(0.5 * s_minus_delta, p * (a_upper ? big : small));
      raw.emplace_back(-0.5 * s_plus_delta, p * (a_upper ? small : big));
    }
    if (blk.b.n <= n_trunc) {
      const double p = prob(blk.b);
      raw.emplace_back(0.5 * s_plus_delta, p * (a_upper ? small : big));
      raw.emplace_back(-0.5 * s_minus_delta, p * (a_upper ? big : small));
    }
    emax = std::max(emax, std::fabs(n + 0.5 * rp.m) + 0.5 * s);
  }

  std::sort(raw.begin(), raw.end());
  WorkPMF pmf;
  pmf.collation_tolerance = 1e-9 * emax;
  for (const auto& [w, p] : raw) {
    if (p == 0.0) continue;
    if (!pmf.points.empty() && std::fabs(w - pmf.points.back().first) <= pmf.collation_tolerance) {
      auto& last = pmf.points.back();
      // Probability-weighted position keeps merged moments close to the raw ones.
      last.first = (last.first * last.second + w * p) / (last.second + p);
      last.second += p;
    } else {
      pmf.points.emplace_back(w, p);
    }
  }
  pmf.tail_probability = std::exp(-rp.b_nu * (n_trunc + 1.0));
  pmf.tail_warning = pmf.tail_probability > 1e-10;
  return pmf;
}

}  // namespace ionlag
