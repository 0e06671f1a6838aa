#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include "doctest.h"
#include "ionlag/numerics.hpp"
#include "ionlag/spectra.hpp"
#include "ionlag/thermo.hpp"

using namespace ionlag;

namespace {

constexpr double kPi = std::numbers::pi;

ReducedParams desk(int m, Branch b, double eta = 0.5, double w0 = 10.0, double rabi = 1.0, double nbar = 0.38) {
  return ReducedParams::dimensionless(w0, rabi, eta, nbar, QuenchSpec(m, b));
}

TrapIonConfig fig1() { return {7e-26, 5e3, 822.0 * kPi * 1e12, kPi * 1e6, 0.0}; }

ReducedParams fig1_point(int m, Branch b, double eta, double rabi = kPi * 1e6, double nbar = 0.38) {
  TrapIonConfig c = fig1();
  c.rabi = rabi;
  return reduce(c, QuenchSpec(m, b), ThermalSpec(MeanOccupation{nbar}), eta);
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("initial partition function") {
  const ReducedParams flat = ReducedParams::dimensionless(1e-14, 1.0, 0.5, 1.0, QuenchSpec::carrier());
  CHECK(ln_partition_initial(flat).shifted_log == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  const LogPartition z = ln_partition_initial(fig1_point(0, Branch::Carrier, 0.0));
  CHECK(z.shifted_log == doctest::Approx(std::log(1.38)).epsilon(1e-15));
  CHECK(z.shift_reference > 3e11);
}

TEST_CASE("final partition function: closed forms and limits") {
  const ReducedParams c0 = desk(0, Branch::Carrier, 0.0, 10.0, 3.0, 0.7);
  const double s = std::sqrt(100.0 + 9.0);
  const double expect = std::numbers::ln2 + std::log(1.7) + lncosh(0.5 * c0.b_nu * s) - 0.5 * c0.b_w0;
  CHECK(ln_partition_final(c0).shifted_log == doctest::Approx(expect).epsilon(1e-13));

  for (Branch b : {Branch::JC, Branch::AJC}) {
    for (int m = 0; m <= 3; ++m) {
      const ReducedParams off = desk(m, b, 0.8, 10.0, 0.0);
      CHECK(std::fabs(ln_partition_final(off).shifted_log - ln_partition_initial(off).shifted_log) <= 1e-12);
      const ReducedParams far = fig1_point(m, b, 60.0);
      CHECK(std::fabs(ln_partition_final(far).shifted_log - ln_partition_initial(far).shifted_log) <= 1e-12);
    }
  }
}

TEST_CASE("final partition function against dense sideband spectra") {
  for (int m = 0; m <= 2; ++m) {
    for (Branch b : {Branch::JC, Branch::AJC}) {
      for (double eta : {0.2, 0.9, 1.7}) {
        const ReducedParams rp = desk(m, b, eta, 10.0, 2.0, 0.6);
        const double dense = dense_log_partition(dense_hamiltonians(rp, 70).h_final_sideband, rp.b_nu) - 0.5 * rp.b_w0;
        CHECK(std::fabs(ln_partition_final(rp).shifted_log - dense) <= 1e-8 * std::fabs(dense));
      }
    }
  }
}

TEST_CASE("block-ratio lag equals the partition difference") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> e(0.0, 3.0), w(0.5, 40.0), o(0.0, 6.0), nb(0.05, 5.0);
  for (int i = 0; i < 60; ++i) {
    const int m = i % 4;
    const ReducedParams rp = desk(m, i % 3 ? Branch::JC : Branch::AJC, e(rng), w(rng), o(rng), nb(rng));
    const double diff = ln_partition_final(rp).shifted_log - ln_partition_initial(rp).shifted_log;
    const LagResult lag = nonequilibrium_lag(rp);
    CHECK(lag.truncation.converged);
    CHECK(lag.value >= 0.0);
    CHECK(std::fabs(lag.value - diff) <= 1e-12 * std::max(1.0, diff));
  }
}

TEST_CASE("lag examples") {
  CHECK(nonequilibrium_lag(desk(2, Branch::AJC, 0.5, 10.0, 0.0)).value == 0.0);
  CHECK(nonequilibrium_lag(fig1_point(1, Branch::JC, 0.0)).value == 0.0);

  const ReducedParams c = fig1_point(0, Branch::Carrier, 0.0);
  const double closed = 0.5 * c.b_nu * sqrt_excess(c.w0, c.rabi);
  CHECK(nonequilibrium_lag(c).value == doctest::Approx(closed).epsilon(1e-12));
  CHECK(closed == doctest::Approx(2.46e-7).epsilon(3e-3));

  CHECK(nonequilibrium_lag(fig1_point(1, Branch::AJC, 0.5, kPi * 1e6, 1e3)).value < 1e-6);
}

TEST_CASE("batched and single-point lag are bit-identical") {
  std::vector<ReducedParams> pts;
  for (int i = 0; i < 11; ++i) {
    pts.push_back(desk(i % 3, i % 2 ? Branch::JC : Branch::AJC, 0.3 * i, 5.0 + i, i == 4 ? 0.0 : 0.7 * i + 0.1, 0.1 + 0.2 * i));
  }
  const auto batch = nonequilibrium_lag_batch(pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const LagResult one = nonequilibrium_lag(pts[i]);
    CHECK(same_bits(one.value, batch[i].value));
    CHECK(one.truncation.n_used == batch[i].truncation.n_used);
  }
}

TEST_CASE("truncation policy") {
  const ReducedParams rp = desk(1, Branch::JC, 0.7, 10.0, 2.0, 10.0);
  const LagResult full = nonequilibrium_lag(rp);
  CHECK(full.truncation.converged);
  CHECK(full.truncation.tail_bound_log <= std::log(1e-16));

  TruncationPolicy few = TruncationPolicy::fixed(5);
  CHECK_THROWS_AS(nonequilibrium_lag(rp, few), TruncationError);
  try {
    nonequilibrium_lag(rp, few);
  } catch (const TruncationError& e) {
    CHECK(e.report().n_used == 5);
    CHECK_FALSE(e.report().converged);
  }
  few.allow_nonconverged = true;
  const LagResult r = nonequilibrium_lag(rp, few);
  CHECK(r.truncation.n_used == 5);
  CHECK_FALSE(r.truncation.converged);
  CHECK(r.value < full.value);

  const LagResult f40 = nonequilibrium_lag(fig1_point(2, Branch::AJC, 2.0), TruncationPolicy::fixed(40));
  CHECK(f40.truncation.n_used == 40);
  CHECK(f40.truncation.converged);
}

TEST_CASE("lag is nonnegative and grows with Omega") {
  for (Branch b : {Branch::JC, Branch::AJC}) {
    for (int m = 0; m <= 2; ++m) {
      double prev = 0.0;
      for (int i = 0; i <= 40; ++i) {
        const double om = 1e5 * std::pow(100.0, i / 40.0);
        const double v = nonequilibrium_lag(fig1_point(m, b, 0.5, om), TruncationPolicy::fixed(40)).value;
        CHECK(v >= prev);
        prev = v;
      }
    }
  }
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> e(0.0, 6.0), w(0.1, 1e3), o(0.0, 50.0), nb(1e-3, 50.0);
  for (int i = 0; i < 300; ++i) {
    const ReducedParams rp = desk(i % 5, i % 2 ? Branch::JC : Branch::AJC, e(rng), w(rng), o(rng), nb(rng));
    CHECK(nonequilibrium_lag(rp).value >= -1e-12);
  }
}

TEST_CASE("limits of the lag") {
  for (int m = 1; m <= 3; ++m) {
    CHECK(nonequilibrium_lag(fig1_point(m, Branch::JC, 1e-6)).value <= 1e-8);
    CHECK(nonequilibrium_lag(fig1_point(m, Branch::AJC, 50.0)).value <= 1e-12);
  }
  const double c0 = nonequilibrium_lag(fig1_point(0, Branch::Carrier, 0.0)).value;
  CHECK(std::fabs(nonequilibrium_lag(fig1_point(0, Branch::Carrier, 1e-6)).value - c0) <= 1e-6 * c0);
}

TEST_CASE("AJC partition function exceeds JC in the optical regime") {
  for (int m = 1; m <= 2; ++m) {
    for (int i = 1; i <= 35; ++i) {
      const double eta = 0.1 * i;
      const double zj = ln_partition_final(fig1_point(m, Branch::JC, eta)).shifted_log;
      const double za = ln_partition_final(fig1_point(m, Branch::AJC, eta)).shifted_log;
      CHECK(za > zj);
    }
  }
}

TEST_CASE("Phi") {
  const Frequencies f{2.0, 20.0, 0.0};
  for (int n = 0; n < 5; ++n) {
    CHECK(phi(n, QuenchSpec(2, Branch::JC), f, 0.4).phi == doctest::Approx(2.0 * 2.0 * (n + 2)).epsilon(1e-14));
    CHECK(phi(n, QuenchSpec(2, Branch::AJC), f, 0.4).phi == doctest::Approx(2.0 * 2.0 * n).epsilon(1e-14));
  }
  // Sign stays reliable at optical ratios.
  const Frequencies f1 = Frequencies::from(fig1());
  const PhiValue p = phi(0, QuenchSpec(1, Branch::AJC), f1, 0.5);
  CHECK(p.phi < 0.0);
  CHECK(std::fabs(p.phi) < 1.0);

  const Frequencies left{1.2e8, 1e8, 0.5e9}, right{1.2e8, 1e8, 1e9};
  CHECK(phi(0, QuenchSpec(1, Branch::JC), left, 1.5).phi <= 0.0);
  for (int n = 0; n <= 50; ++n) CHECK(phi(n, QuenchSpec(2, Branch::JC), left, 1.5).phi >= 0.0);
  CHECK(phi(0, QuenchSpec(1, Branch::JC), right, 1.0).phi <= 0.0);
  CHECK(phi(0, QuenchSpec(2, Branch::JC), right, 1.0).phi <= 0.0);
}

TEST_CASE("divergence predicate and low-temperature limit") {
  const Frequencies f1 = Frequencies::from(fig1());
  for (int m = 0; m <= 4; ++m) {
    const QuenchSpec q = m == 0 ? QuenchSpec::carrier() : QuenchSpec(m, Branch::AJC);
    const auto v = divergence_predicate(q, f1, 0.7, default_scan_max(m));
    CHECK(v.diverges);
    REQUIRE_FALSE(v.witnesses.empty());
    CHECK(v.witnesses.front() == 0);
    CHECK_FALSE(low_temperature_limit(q, f1, 0.7, default_scan_max(m)).finite);
  }
  for (int m = 1; m <= 2; ++m) {
    CHECK_FALSE(divergence_predicate(QuenchSpec(m, Branch::JC), f1, 0.5, default_scan_max(m)).diverges);
    const auto lt = low_temperature_limit(QuenchSpec(m, Branch::JC), f1, 0.5, default_scan_max(m));
    CHECK(lt.finite);
    CHECK(*lt.limit_value == 0.0);
  }
  const Frequencies right{1.2e8, 1e8, 1e9};
  for (int m = 1; m <= 2; ++m) {
    const auto v = divergence_predicate(QuenchSpec(m, Branch::JC), right, 1.0, default_scan_max(m));
    CHECK(v.diverges);
    CHECK(v.witnesses == std::vector<int>{0});
  }
  CHECK_THROWS_AS(divergence_predicate(QuenchSpec(1, Branch::JC), f1, 0.5, 0), DomainError);
}

TEST_CASE("JC with one vanishing Phi tends to ln 2") {
  // Phi_0^1 = 0  <=>  Omega^2 |f_0^1|^2 = 4 nu omega0 (m = 1).
  const double w0 = 3.0, eta = 0.6;
  const double f0 = coupling_f(0, 1, eta).magnitude();
  const double rabi = 2.0 * std::sqrt(w0) / f0;
  const Frequencies fr{1.0, w0, rabi};
  const QuenchSpec q(1, Branch::JC);
  REQUIRE(std::fabs(phi(0, q, fr, eta).phi) < 1e-9 * (1.0 + w0));
  const auto lt = low_temperature_limit(q, fr, eta, default_scan_max(1));
  CHECK(lt.finite);
  CHECK(lt.zero_count == 1);
  CHECK(*lt.limit_value == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  const ReducedParams cold = ReducedParams::dimensionless(w0, rabi, eta, nbar_from_bnu(60.0), q);
  CHECK(nonequilibrium_lag(cold).value == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(nonequilibrium_lag(cold).regime_flags.low_temperature_finite);
}

TEST_CASE("AJC lag grows linearly in beta at the rate set by the most negative Phi") {
  const double w0 = 10.0, rabi = 4.0, eta = 0.5;
  const QuenchSpec q(1, Branch::AJC);
  double phi_min = 0.0;
  for (int n = 0; n <= 110; ++n) phi_min = std::min(phi_min, phi(n, q, {1.0, w0, rabi}, eta).phi);
  REQUIRE(phi_min < 0.0);
  double prev = 0.0, slope = 0.0;
  for (double b : {5.0, 10.0, 20.0, 40.0, 80.0}) {
    const ReducedParams rp = ReducedParams::dimensionless(w0, rabi, eta, nbar_from_bnu(b), q);
    const double v = nonequilibrium_lag(rp).value;
    CHECK(v > prev);
    slope = (v - prev) / (b / 2.0);
    prev = v;
  }
  CHECK(slope == doctest::Approx(0.5 * std::fabs(phi_min)).epsilon(1e-3));
}

TEST_CASE("small-eta expansion") {
  for (int n = 0; n < 6; ++n) {
    CHECK(small_eta_expansion(n, 0, 0.1).leading == doctest::Approx(1.0 - (2 * n + 1) * 0.01));
    CHECK(small_eta_expansion(n, 1, 0.1).leading == doctest::Approx((n + 1) * 0.01));
    CHECK(small_eta_expansion(n, 2, 0.1).leading == 0.0);
  }
  const double exact = std::pow(coupling_f(2, 1, 1e-3).magnitude(), 2);
  CHECK(std::fabs(small_eta_expansion(2, 1, 1e-3).second_order - exact) <= 1e-5 * exact);
  CHECK_THROWS_AS(small_eta_expansion(1, 1, 0.3), DomainError);
}

TEST_CASE("nu -> 0 form sums cosh ratios that never decay") {
  CHECK_THROWS_AS(nu_to_zero_limit(desk(0, Branch::Carrier, 1.0, 10.0, 0.0), TruncationPolicy::fixed(10)), RangeError);
  CHECK_THROWS_AS(nu_to_zero_limit(desk(2, Branch::JC, 0.0, 10.0, 1.0), TruncationPolicy::fixed(10)), RangeError);

  TruncationPolicy p = TruncationPolicy::fixed(100);
  p.allow_nonconverged = true;
  const ReducedParams rp = desk(0, Branch::Carrier, 1.0, 10.0, 2.0);
  const LogPartition a = nu_to_zero_limit(rp, p);
  CHECK(std::isfinite(a.shifted_log));
  CHECK_FALSE(a.truncation.converged);
  p.fixed_terms = 1000;
  const LogPartition b = nu_to_zero_limit(rp, p);
  // Each summand tends to 1, so the partial sums grow like ln N.
  CHECK(b.shifted_log - a.shifted_log == doctest::Approx(std::log(10.0)).epsilon(2e-2));
  CHECK_THROWS_AS(nu_to_zero_limit(rp, TruncationPolicy::fixed(100)), TruncationError);
}

TEST_CASE("regime flags") {
  const LagResult a = nonequilibrium_lag(fig1_point(1, Branch::AJC, 0.5));
  CHECK(a.regime_flags.divergence_predicted);
  CHECK_FALSE(a.regime_flags.low_temperature_finite);
  const LagResult j = nonequilibrium_lag(fig1_point(2, Branch::JC, 0.5));
  CHECK_FALSE(j.regime_flags.divergence_predicted);
  CHECK(j.regime_flags.low_temperature_finite);
}
