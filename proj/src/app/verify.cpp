#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <random>

#include "ionlag/kernels.hpp"
#include "ionlag/numerics.hpp"
#include "ionlag/spectra.hpp"
#include "ionlag/thermo.hpp"
#include "ionlag/workstats.hpp"
#include "json.hpp"
#include "settings.hpp"

namespace ionlag::app {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& g, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(g); }
int pick(Rng& g, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g); }

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

CheckResult finish(std::string name, int cases, double err, double tol, std::string detail = {}) {
  return {std::move(name), err <= tol, cases, err, tol, std::move(detail)};
}

ReducedParams random_desk(Rng& g, int m, Branch b) {
  return ReducedParams::dimensionless(uniform(g, 2.0, 30.0), uniform(g, 0.1, 5.0), uniform(g, 0.05, 1.8),
                                      uniform(g, 0.1, 2.0), QuenchSpec(m, b));
}

Branch random_branch(Rng& g) { return pick(g, 0, 1) ? Branch::JC : Branch::AJC; }

// Explicit alternating sum in long double; returns {value, sum of |terms|}.
std::pair<long double, long double> laguerre_direct(int n, int m, long double x) {
  long double v = 0, s = 0;
  for (int k = 0; k <= n; ++k) {
    const long double c = std::exp(std::lgamma((long double)(n + m + 1)) - std::lgamma((long double)(n - k + 1)) -
                                   std::lgamma((long double)(m + k + 1)) - std::lgamma((long double)(k + 1)));
    const long double t = c * std::pow(x, (long double)k);
    v += (k % 2 ? -t : t);
    s += t;
  }
  return {v, s};
}

CheckResult check_laguerre(Rng& g) {
  double worst = 0;
  const int cases = 300;
  for (int i = 0; i < cases; ++i) {
    const int n = pick(g, 0, 30), m = pick(g, 0, 6);
    const double x = uniform(g, 0.0, 3.0);
    const auto [ref, scale] = laguerre_direct(n, m, x);
    worst = std::max(worst, static_cast<double>(std::fabs(laguerre_assoc(n, m, x) - ref) / scale));
  }
  return finish("laguerre_recurrence", cases, worst, 1e-13);
}

CheckResult check_coupling(Rng& g) {
  double worst = 0;
  int bad_phase = 0;
  const int cases = 300;
  for (int i = 0; i < cases; ++i) {
    const int n = pick(g, 0, 30), m = pick(g, 0, 6);
    const double eta = uniform(g, 0.05, 1.5);
    const auto [lag, scale] = laguerre_direct(n, m, (long double)eta * eta);
    const long double pref = std::exp(-0.5L * eta * eta + m * std::log((long double)eta) +
                                      0.5L * (std::lgamma((long double)(n + 1)) - std::lgamma((long double)(n + m + 1))));
    const CouplingValue f = coupling_f(n, m, eta);
    worst = std::max(worst, static_cast<double>(std::fabs(f.magnitude() - pref * std::fabs(lag)) / (pref * scale)));
    if (f.phase != m % 4) ++bad_phase;
    if (std::fabs(lag) > 1e-8L * scale && f.sign != (lag > 0 ? 1 : -1)) ++bad_phase;
  }
  if (bad_phase) worst = std::max(worst, 1.0);
  return finish("coupling_direct", cases, worst, 1e-12, "phase/sign mismatches=" + std::to_string(bad_phase));
}

CheckResult check_lncosh(Rng& g) {
  double worst = 0;
  const int cases = 400;
  for (int i = 0; i < cases; ++i) {
    const double x = i % 2 ? uniform(g, -40.0, 40.0) : uniform(g, -5e3, 5e3);
    const long double ax = std::fabs((long double)x);
    const long double ref = ax < 5000 ? std::log(std::cosh(ax)) : ax - std::numbers::ln2_v<long double>;
    worst = std::max(worst, static_cast<double>(std::fabs(lncosh(x) - ref) / std::max(1.0L, ax)));
    if (lncosh(x) != lncosh(-x)) worst = std::max(worst, 1.0);
  }
  return finish("lncosh", cases, worst, 4e-16);
}

CheckResult check_sqrt_shift(Rng& g) {
  double worst = 0;
  const int cases = 300;
  for (int i = 0; i < cases; ++i) {
    const double w = std::pow(10.0, uniform(g, 0.0, 15.0));
    const double u = w * std::pow(10.0, uniform(g, -9.0, 1.0));
    long double ref;
    const long double r = (long double)u / w;
    if (r < 1e-3L) {
      ref = w * (r * r / 2 - r * r * r * r / 8 + r * r * r * r * r * r / 16);
    } else {
      ref = std::sqrt((long double)w * w + (long double)u * u) - w;
    }
    worst = std::max(worst, static_cast<double>(std::fabs(sqrt_shift(w, u, w) - ref) / ref));
  }
  // Optical regression point: the naive difference loses every digit.
  const double wl = 822.0 * std::numbers::pi * 1e12, u = std::numbers::pi * 1e6;
  const double safe = sqrt_shift(wl, u, wl);
  const double naive = std::sqrt(wl * wl + u * u) - wl;
  const double rel = std::fabs(safe - u * u / (2.0 * wl)) / safe;
  if (!(naive == 0.0 && rel < 1e-12)) worst = std::max(worst, 1.0);
  return finish("sqrt_shift", cases + 1, worst, 1e-12, "optical point " + fmt(safe) + " vs naive " + fmt(naive));
}

CheckResult check_omega_zero(Rng& g) {
  double worst = 0;
  const int cases = 60;
  for (int i = 0; i < cases; ++i) {
    const int m = pick(g, 0, 4);
    const ReducedParams rp = ReducedParams::dimensionless(uniform(g, 0.5, 1e3), 0.0, uniform(g, 0.0, 3.0),
                                                          uniform(g, 0.01, 20.0), QuenchSpec(m, random_branch(g)));
    const LagResult lag = nonequilibrium_lag(rp);
    const double dz = std::fabs(ln_partition_final(rp).shifted_log - ln_partition_initial(rp).shifted_log);
    const WorkMoments w = moments_analytic(rp);
    worst = std::max({worst, std::fabs(lag.value), dz, std::fabs(w.second), std::fabs(w.third)});
  }
  return finish("omega_zero_identities", cases, worst, 1e-12);
}

CheckResult check_lag_routes(Rng& g) {
  double worst = 0;
  const int cases = 200;
  for (int i = 0; i < cases; ++i) {
    const ReducedParams rp = random_desk(g, pick(g, 0, 4), random_branch(g));
    const double diff = ln_partition_final(rp).shifted_log - ln_partition_initial(rp).shifted_log;
    const double l = nonequilibrium_lag(rp).value;
    worst = std::max(worst, std::fabs(l - diff) / std::max(1.0, std::fabs(diff)));
    if (l < 0.0) worst = std::max(worst, 1.0);
  }
  return finish("lag_two_routes", cases, worst, 1e-12);
}

CheckResult check_simd(Rng& g) {
  std::vector<ReducedParams> pts;
  for (int i = 0; i < 40; ++i) pts.push_back(random_desk(g, pick(g, 0, 6), random_branch(g)));
  const kernels::Isa saved = kernels::active();
  kernels::set_active(kernels::Isa::Scalar);
  const auto ref = nonequilibrium_lag_batch(pts);
  int mismatches = 0, cases = 0;
  std::string isas = "scalar";
  for (kernels::Isa isa : {kernels::Isa::Avx2, kernels::Isa::Neon}) {
    if (!kernels::available(isa)) continue;
    isas += "," + std::string(kernels::to_string(isa));
    kernels::set_active(isa);
    const auto got = nonequilibrium_lag_batch(pts);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      ++cases;
      if (std::memcmp(&got[i].value, &ref[i].value, sizeof(double)) != 0) ++mismatches;
    }
  }
  kernels::set_active(saved);
  return finish("simd_equivalence", cases, mismatches, 0.0, "isas=" + isas);
}

CheckResult check_dense_spectrum(Rng& g) {
  double worst = 0;
  const int cases = 24, nt = 40;
  for (int i = 0; i < cases; ++i) {
    const ReducedParams rp = random_desk(g, i % 4, random_branch(g));
    const Eigen::VectorXd dense = dense_eigenvalues(dense_hamiltonians(rp, nt).h_final_sideband);
    std::vector<double> ana = edge_eigenvalues(rp);
    for (int n = 0; n + rp.m <= nt; ++n) {
      const auto [mu, ga] = sideband_eigenvalues(n, rp);
      ana.push_back(mu);
      ana.push_back(ga);
    }
    const auto top = truncation_boundary_energies(rp, nt);
    ana.insert(ana.end(), top.begin(), top.end());
    std::sort(ana.begin(), ana.end());
    if (ana.size() != static_cast<std::size_t>(dense.size())) return finish("dense_spectrum", i + 1, 1.0, 1e-10, "size mismatch");
    for (std::size_t k = 0; k < ana.size(); ++k) {
      worst = std::max(worst, std::fabs(ana[k] - dense(static_cast<Eigen::Index>(k))) / std::max(1.0, std::fabs(ana[k])));
    }
  }
  return finish("dense_spectrum", cases, worst, 1e-10);
}

CheckResult check_dense_partition(Rng& g) {
  double worst = 0;
  const int cases = 24, nt = 70;
  for (int i = 0; i < cases; ++i) {
    const ReducedParams rp = random_desk(g, i % 3, random_branch(g));
    const double dense = dense_log_partition(dense_hamiltonians(rp, nt).h_final_sideband, rp.b_nu) - 0.5 * rp.b_w0;
    worst = std::max(worst, std::fabs(ln_partition_final(rp).shifted_log - dense) / std::fabs(dense));
  }
  return finish("dense_partition", cases, worst, 1e-8);
}

CheckResult check_numeric_moments(Rng& g) {
  double e1 = 0, e2 = 0, e3 = 0;
  const int cases = 6, nt = 80;
  for (int i = 0; i < cases; ++i) {
    const ReducedParams rp = ReducedParams::dimensionless(uniform(g, 2.0, 30.0), uniform(g, 0.2, 3.0), uniform(g, 0.1, 1.0),
                                                          uniform(g, 0.1, 1.0), QuenchSpec(i % 3, random_branch(g)));
    const WorkMoments a = moments_analytic(rp);
    e1 = std::max(e1, std::fabs(moments_numeric(rp, nt, 1, QuenchTarget::Full).value) / (rp.w0 + nt));
    e2 = std::max(e2, std::fabs(moments_numeric(rp, nt, 2, QuenchTarget::Full).value - a.second) / a.second);
    e3 = std::max(e3, std::fabs(moments_numeric(rp, nt, 3, QuenchTarget::Full).value - a.third) / std::fabs(a.third));
  }
  const double worst = std::max({e1 / 1e-10, e2 / 1e-8, e3 / 1e-6});
  return finish("numeric_moments", cases, worst, 1.0,
                "mean " + fmt(e1) + "/1e-10, second " + fmt(e2) + "/1e-8, third " + fmt(e3) + "/1e-6");
}

CheckResult check_work_pmf(Rng& g) {
  double worst = 0;
  const int cases = 6, nt = 60;
  for (int i = 0; i < cases; ++i) {
    const ReducedParams rp = ReducedParams::dimensionless(uniform(g, 2.0, 20.0), uniform(g, 0.2, 3.0), uniform(g, 0.1, 1.5),
                                                          uniform(g, 0.1, 0.8), QuenchSpec(i % 3, random_branch(g)));
    const WorkPMF pmf = work_pmf_sideband(rp, nt);
    worst = std::max(worst, std::fabs(pmf.total() - 1.0));
    for (int order : {2, 3}) {
      const double num = moments_numeric(rp, nt, order, QuenchTarget::Sideband).value;
      worst = std::max(worst, std::fabs(pmf.moment(order) - num) / std::fabs(num));
    }
  }
  return finish("work_pmf_moments", cases, worst, 1e-8);
}

}  // namespace

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

VerifyReport run_verify(const std::string& level, std::uint64_t seed) {
  if (level != "fast" && level != "full") throw UsageError("verify level must be 'fast' or 'full'");
  std::vector<std::function<CheckResult(Rng&)>> checks{check_laguerre,    check_coupling,   check_lncosh,
                                                        check_sqrt_shift,  check_omega_zero, check_lag_routes,
                                                        check_simd};
  if (level == "full") {
    checks.insert(checks.end(), {check_dense_spectrum, check_dense_partition, check_numeric_moments, check_work_pmf});
  }
  VerifyReport r{level, seed, {}};
  for (std::size_t i = 0; i < checks.size(); ++i) {
    // Each check owns a stream, so adding checks never reshuffles the others.
    Rng g(seed * 1000003u + i);
    r.checks.push_back(checks[i](g));
  }
  return r;
}

void print_report(std::ostream& os, const VerifyReport& r) {
  nlohmann::ordered_json j;
  j["level"] = r.level;
  j["seed"] = r.seed;
  j["passed"] = r.passed();
  j["checks"] = nlohmann::ordered_json::array();
  for (const CheckResult& c : r.checks) {
    os << (c.passed ? "PASS " : "FAIL ") << c.name << "  cases=" << c.cases << " max_err=" << fmt(c.max_error)
       << " tol=" << fmt(c.tolerance);
    if (!c.detail.empty()) os << "  (" << c.detail << ")";
    os << '\n';
    j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"cases", c.cases},
                           {"max_error", c.max_error}, {"tolerance", c.tolerance}, {"detail", c.detail}});
  }
  os << (r.passed() ? "verify " + r.level + ": all checks passed" : "verify " + r.level + ": FAILED") << '\n';
  os << j.dump() << '\n';
}

}  // namespace ionlag::app
