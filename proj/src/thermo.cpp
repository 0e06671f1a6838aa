#include "ionlag/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ionlag/kernels.hpp"
#include "ionlag/numerics.hpp"

namespace ionlag {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kChunk = 256;

// ln(R - 1) for R = cosh(b (w + ex)/2) / cosh(b w/2), w >= 0, ex >= 0. Uses
// cosh A - cosh B = 2 sinh((A+B)/2) sinh((A-B)/2) so nothing cancels.
double log_ratio_minus_one(double b, double w, double ex) {
  if (!(ex > 0.0)) return kNegInf;
  return 0.5 * b * ex + log1m_exp(b * (w + 0.5 * ex)) + log1m_exp(0.5 * b * ex) - log1p_exp(-b * w);
}

bool coupling_vanishes(const ReducedParams& rp) { return rp.rabi == 0.0 || (rp.eta == 0.0 && rp.m > 0); }

void check_policy(const TruncationPolicy& p) {
  if (p.fixed_terms && *p.fixed_terms < 1) throw ParameterError("truncation: fixed term count must be >= 1");
  if (!(p.tol > 0.0) || p.window < 1 || p.max_terms < 1) throw ParameterError("truncation: invalid policy");
}

void finish(TruncationReport& r, const TruncationPolicy& p, const char* who) {
  r.converged = r.tail_bound_log <= std::log(p.tol);
  if (!r.converged && !p.allow_nonconverged) {
    throw TruncationError(std::string(who) + ": sum not converged after " + std::to_string(r.n_used) + " terms", r);
  }
}

// One point of a batched lag evaluation.
struct LagLane {
  ReducedParams rp;
  double b = 0.0;
  double abs_wL = 0.0;
  double ln_block0 = 0.0;  // ln P_0
  double ln_nbar1 = 0.0;   // ln(nbar + 1)
  double ln_rm1_max = 0.0; // ln(R - 1) at |f| = 1, bounds every block
  long target = 0;         // fixed term count, 0 when adaptive
  LogSumExp acc;
  long n = 0;
  bool done = false;
  double tail_log = kInf;
  std::vector<CouplingValue> fs;
  std::vector<double> u, ex;

  explicit LagLane(const ReducedParams& p) : rp(p) {
    b = rp.b_nu;
    abs_wL = std::fabs(rp.wL());
    const double ln_q0 = log1m_exp(b);
    ln_nbar1 = -ln_q0;
    const double ln_pg = -log1p_exp(-rp.b_w0);
    const double ln_pe = -rp.b_w0 + ln_pg;
    const double bm = b * rp.m;
    double c = 0.0;
    auto lae = [](double x, double y) { return std::max(x, y) + std::log1p(std::exp(-std::fabs(x - y))); };
    switch (rp.branch) {
      case Branch::JC:
        c = lae(ln_pe, ln_pg - bm);  // P_n = q_n p_e + q_{n+m} p_g
        break;
      case Branch::AJC:
        c = lae(ln_pg, ln_pe - bm);  // P_n = q_n p_g + q_{n+m} p_e
        break;
      case Branch::Carrier:
        c = 0.0;
        break;
    }
    ln_block0 = ln_q0 + c;
    ln_rm1_max = log_ratio_minus_one(b, abs_wL, sqrt_excess(abs_wL, rp.rabi));
  }

  // Rigorous bound on ln(sum_{k>=n} P_k (R_k - 1)) - ln(sum so far), with |f| <= 1.
  double tail_after(long count, double ln_sum) const {
    return ln_rm1_max + ln_block0 - b * static_cast<double>(count) + ln_nbar1 - ln_sum;
  }
};

void run_lanes(std::span<LagLane> lanes, const TruncationPolicy& policy) {
  std::vector<CouplingStream::Lane> cl;
  for (const auto& l : lanes) cl.push_back({l.rp.m, l.rp.eta});
  CouplingStream stream(cl);
  std::vector<std::vector<CouplingValue>> out(lanes.size());
  const double ln_tol = std::log(policy.tol);

  auto active = [&] { return std::any_of(lanes.begin(), lanes.end(), [](const LagLane& l) { return !l.done; }); };
  while (active()) {
    for (auto& o : out) o.clear();
    stream.next(kChunk, out);
    for (std::size_t li = 0; li < lanes.size(); ++li) {
      LagLane& L = lanes[li];
      if (L.done) continue;
      L.u.resize(kChunk);
      L.ex.resize(kChunk);
      for (std::size_t i = 0; i < kChunk; ++i) L.u[i] = L.rp.rabi * out[li][i].magnitude();
      kernels::sqrt_excess(L.abs_wL, L.u, L.ex);
      for (std::size_t i = 0; i < kChunk && !L.done; ++i) {
        const double a = L.ln_block0 - L.b * static_cast<double>(L.n) + log_ratio_minus_one(L.b, L.abs_wL, L.ex[i]);
        L.acc.add(a);
        ++L.n;
        if (L.target > 0) {
          L.done = L.n >= L.target;
        } else if (L.n >= policy.window) {
          // acc.max() <= acc.value(), so this test is conservative.
          L.done = L.tail_after(L.n, L.acc.max()) <= ln_tol || L.n >= policy.max_terms;
        }
      }
    }
  }
}

LagResult lag_from_lane(const LagLane& L, const TruncationPolicy& policy) {
  LagResult r;
  const double ln_sum = L.acc.value();
  // L = ln(1 + e^{ln_sum}).
  r.value = ln_sum == kNegInf ? 0.0 : log1p_exp(ln_sum);
  r.truncation.n_used = L.n;
  r.truncation.tail_bound_log = ln_sum == kNegInf ? (L.ln_rm1_max == kNegInf ? kNegInf : kInf) : L.tail_after(L.n, ln_sum);
  finish(r.truncation, policy, "nonequilibrium_lag");
  return r;
}

RegimeFlags regime_flags(const ReducedParams& rp) {
  RegimeFlags f;
  const QuenchSpec q = rp.quench();
  const Frequencies fr{1.0, rp.w0, rp.rabi};
  const int scan = default_scan_max(rp.m);
  f.divergence_predicted = divergence_predicate(q, fr, rp.eta, scan).diverges;
  const LowTemperatureLimit lt = low_temperature_limit(q, fr, rp.eta, scan);
  f.low_temperature_finite = lt.finite;
  f.low_temperature_limit = lt.limit_value.value_or(0.0);
  return f;
}

}  // namespace

LogPartition ln_partition_initial(const ReducedParams& rp) {
  LogPartition z;
  z.shift_reference = 0.5 * rp.b_w0;
  z.shifted_log = -log1m_exp(rp.b_nu) + log1p_exp(-rp.b_w0);
  z.truncation = {0, kNegInf, true};
  return z;
}

LogPartition ln_partition_final(const ReducedParams& rp, const TruncationPolicy& policy) {
  check_policy(policy);
  const double b = rp.b_nu;
  const double abs_wL = std::fabs(rp.wL());
  const double awm = rp.abs_wL_minus_w0();
  const double ln_nbar1 = -log1m_exp(b);
  LogSumExp acc;
  if (rp.m > 0) {
    const double edge = ln_nbar1 + log1m_exp(b * rp.m);
    acc.add(rp.branch == Branch::AJC ? edge - rp.b_w0 : edge);
  }
  // Block term n, shifted by b w0/2: -b(n + m/2) + (b/2)(S - w0) + ln(1 + e^{-bS}).
  const double ex_max = sqrt_excess(abs_wL, rp.rabi);
  const double head = -0.5 * b * rp.m + 0.5 * b * awm;
  const double bound0 = head + 0.5 * b * ex_max + std::numbers::ln2;
  const double ln_tol = std::log(policy.tol);
  const long target = policy.fixed_terms.value_or(0);

  CouplingStream stream({rp.m, rp.eta});
  std::vector<double> u(kChunk), ex(kChunk);
  long n = 0;
  bool done = false;
  while (!done) {
    const auto fs = stream.next(kChunk);
    for (std::size_t i = 0; i < kChunk; ++i) u[i] = rp.rabi * fs[i].magnitude();
    kernels::sqrt_excess(abs_wL, u, ex);
    for (std::size_t i = 0; i < kChunk && !done; ++i) {
      const double s = abs_wL + ex[i];
      acc.add(-b * static_cast<double>(n) + head + 0.5 * b * ex[i] + log1p_exp(-b * s));
      ++n;
      if (target > 0) {
        done = n >= target;
      } else if (n >= policy.window) {
        done = bound0 - b * n + ln_nbar1 - acc.max() <= ln_tol || n >= policy.max_terms;
      }
    }
  }
  LogPartition z;
  z.shift_reference = 0.5 * rp.b_w0;
  z.shifted_log = acc.value();
  z.truncation.n_used = n;
  z.truncation.tail_bound_log = bound0 - b * n + ln_nbar1 - z.shifted_log;
  finish(z.truncation, policy, "ln_partition_final");
  return z;
}

std::vector<LagResult> nonequilibrium_lag_batch(std::span<const ReducedParams> points, const TruncationPolicy& policy) {
  check_policy(policy);
  std::vector<LagResult> results(points.size());
  std::vector<LagLane> group;
  std::vector<std::size_t> index;

  auto flush = [&] {
    if (group.empty()) return;
    run_lanes(group, policy);
    for (std::size_t k = 0; k < group.size(); ++k) {
      results[index[k]] = lag_from_lane(group[k], policy);
    }
    group.clear();
    index.clear();
  };

  for (std::size_t i = 0; i < points.size(); ++i) {
    const ReducedParams& rp = points[i];
    if (coupling_vanishes(rp)) {
      results[i].truncation = {0, kNegInf, true};
    } else {
      group.emplace_back(rp);
      group.back().target = policy.fixed_terms.value_or(0);
      index.push_back(i);
      if (group.size() == static_cast<std::size_t>(kernels::kLanes)) flush();
    }
  }
  flush();
  for (std::size_t i = 0; i < points.size(); ++i) results[i].regime_flags = regime_flags(points[i]);
  return results;
}

LagResult nonequilibrium_lag(const ReducedParams& rp, const TruncationPolicy& policy) {
  return nonequilibrium_lag_batch(std::span<const ReducedParams>(&rp, 1), policy).front();
}

double phi_reduced(int n, const ReducedParams& rp) {
  const CouplingValue f = coupling_f(n, rp.m, rp.eta);
  const double ex = sqrt_excess(rp.wL(), rp.rabi * f.magnitude());
  return (2.0 * n + rp.m) - rp.abs_wL_minus_w0() - ex;
}

namespace {

ReducedParams scan_params(const QuenchSpec& q, const Frequencies& f, double eta) {
  if (!(f.nu > 0.0) || !(f.omega0 > 0.0) || !(f.rabi >= 0.0)) throw ParameterError("invalid frequencies");
  // Temperature does not enter Phi; any valid occupation will do.
  return ReducedParams::dimensionless(f.omega0 / f.nu, f.rabi / f.nu, eta, 1.0, q);
}

// Phi is assembled from (2n + m), |w_L| - w0 and the sqrt excess, never from
// w0 itself, so the zero test is scaled by those pieces.
bool phi_is_zero(double phi_over_nu, int n, const ReducedParams& rp) {
  const double ex = (2.0 * n + rp.m) - rp.abs_wL_minus_w0() - phi_over_nu;
  return std::fabs(phi_over_nu) <= kPhiZeroTol * ((2.0 * n + rp.m) + std::fabs(rp.abs_wL_minus_w0()) + std::fabs(ex));
}

}  // namespace

PhiValue phi(int n, const QuenchSpec& q, const Frequencies& f, double eta) {
  if (n < 0) throw DomainError("phi: n must be nonnegative");
  const ReducedParams rp = scan_params(q, f, eta);
  return {n, q.m(), q.branch(), phi_reduced(n, rp) * f.nu};
}

DivergenceVerdict divergence_predicate(const QuenchSpec& q, const Frequencies& f, double eta, int n_scan_max) {
  if (n_scan_max < 1) throw DomainError("divergence_predicate: n_scan_max must be >= 1");
  const ReducedParams rp = scan_params(q, f, eta);
  DivergenceVerdict v;
  if (rp.rabi == 0.0) return v;
  CouplingStream stream({rp.m, rp.eta});
  const auto fs = stream.next(static_cast<std::size_t>(n_scan_max) + 1);
  const double m = rp.m;
  for (int n = 0; n <= n_scan_max; ++n) {
    // Phi_n < 0  <=>  Omega^2 |f|^2 > threshold (products, no cancellation).
    double threshold = 0.0;
    if (rp.branch == Branch::JC) {
      threshold = 4.0 * (n + m) * (n + rp.w0);
    } else {
      threshold = 4.0 * n * (n + m + rp.w0);
    }
    const double u = rp.rabi * fs[n].magnitude();
    if (!(u * u > threshold)) continue;
    // Near-degenerate JC blocks count as zeros of Phi, not witnesses.
    if (rp.branch == Branch::JC && phi_is_zero(phi_reduced(n, rp), n, rp)) continue;
    v.witnesses.push_back(n);
  }
  v.diverges = !v.witnesses.empty();
  return v;
}

LowTemperatureLimit low_temperature_limit(const QuenchSpec& q, const Frequencies& f, double eta, int n_scan_max) {
  LowTemperatureLimit out;
  if (q.branch() != Branch::JC) return out;
  if (divergence_predicate(q, f, eta, n_scan_max).diverges) return out;
  const ReducedParams rp = scan_params(q, f, eta);
  for (int n = 0; n <= n_scan_max; ++n) {
    if (phi_is_zero(phi_reduced(n, rp), n, rp)) ++out.zero_count;
  }
  out.finite = true;
  out.limit_value = std::log1p(static_cast<double>(out.zero_count));
  return out;
}

SmallEtaExpansion small_eta_expansion(int n, int m, double eta) {
  if (n < 0 || m < 0) throw DomainError("small_eta_expansion: n and m must be nonnegative");
  if (!(eta >= 0.0) || !(eta < 0.3)) throw DomainError("small_eta_expansion: requires 0 <= eta < 0.3");
  SmallEtaExpansion s;
  const double e2 = eta * eta;
  const double ln_pref = std::lgamma(n + m + 1.0) - std::lgamma(n + 1.0) - 2.0 * std::lgamma(m + 1.0);
  s.second_order = std::exp(ln_pref) * (1.0 - e2 * (2.0 * n + m + 1.0) / (m + 1.0)) * std::pow(e2, m);
  if (m == 0) s.leading = 1.0 - (2.0 * n + 1.0) * e2;
  if (m == 1) s.leading = (n + 1.0) * e2;
  return s;
}

LogPartition nu_to_zero_limit(const ReducedParams& rp, const TruncationPolicy& policy) {
  check_policy(policy);
  if (coupling_vanishes(rp)) {
    throw RangeError("nu_to_zero_limit: Omega |f_n^m| vanishes identically; every summand is 1 and the sum diverges");
  }
  const double b = rp.b_nu;
  const long count = policy.fixed_terms ? *policy.fixed_terms : policy.window;
  CouplingStream stream({rp.m, rp.eta});
  const auto fs = stream.next(static_cast<std::size_t>(count));
  LogSumExp acc;
  for (long n = 0; n < count; ++n) {
    const double ex = sqrt_excess(rp.w0, rp.rabi * fs[n].magnitude());
    acc.add(log1p_exp(log_ratio_minus_one(b, rp.w0, ex)));  // ln R_n >= 0
  }
  LogPartition z;
  z.shift_reference = 0.0;
  z.shifted_log = acc.value();
  // Each neglected summand is at least 1: the tail is unbounded.
  z.truncation = {count, kInf, false};
  finish(z.truncation, policy, "nu_to_zero_limit");
  return z;
}

}  // namespace ionlag
