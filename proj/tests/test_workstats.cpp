#include <cmath>
#include <numbers>

#include "doctest.h"
#include "ionlag/errors.hpp"
#include "ionlag/workstats.hpp"

using namespace ionlag;

namespace {

ReducedParams desk(int m, Branch b, double eta = 0.5, double w0 = 10.0, double rabi = 1.0, double nbar = 0.38) {
  return ReducedParams::dimensionless(w0, rabi, eta, nbar, QuenchSpec(m, b));
}

}  // namespace

TEST_CASE("closed-form moments") {
  const WorkMoments w = moments_analytic(desk(1, Branch::JC, 0.5, 10.0, 2.0));
  CHECK(w.mean == 0.0);
  CHECK(w.second == 1.0);
  CHECK(w.skewness == doctest::Approx(w.third / std::pow(w.second, 1.5)));

  // Cold limit: tanh -> 1.
  const ReducedParams cold = desk(0, Branch::JC, 0.3, 10.0, 1.0, 1e-12);
  CHECK(moments_analytic(cold).third == doctest::Approx(0.25 * (0.09 + 10.0)).epsilon(1e-14));

  for (double om : {0.1, 1.0, 7.0}) {
    const double s1 = moments_analytic(desk(2, Branch::AJC, 0.8, 5.0, om)).skewness;
    const double s2 = moments_analytic(desk(2, Branch::AJC, 0.8, 5.0, 2.0 * om)).skewness;
    CHECK(std::fabs(s2 / s1 - 0.5) <= 1e-12);
    CHECK(moments_analytic(desk(2, Branch::AJC, 0.8, 5.0, om)).third > 0.0);
  }
}

TEST_CASE("third moment does not depend on the trap frequency at fixed geometry") {
  const double pi = std::numbers::pi;
  const ThermalSpec t(InverseTemperature{4e18});
  for (double phi : {0.0, 0.4, 1.2}) {
    TrapIonConfig c{7e-26, 5e3, 822.0 * pi * 1e12, pi * 1e6, phi};
    const ReducedParams a = reduce(c, QuenchSpec::carrier(), t);
    c.nu = 8e4;
    const ReducedParams b = reduce(c, QuenchSpec::carrier(), t);
    // Back to SI energy units: multiply by (hbar nu)^3.
    const double ta = moments_analytic(a).third * std::pow(kHbar * 5e3, 3);
    const double tb = moments_analytic(b).third * std::pow(kHbar * 8e4, 3);
    CHECK(std::fabs(ta - tb) <= 1e-10 * std::fabs(ta));
  }
}

TEST_CASE("numeric moments reproduce the closed forms at desk scale") {
  const ReducedParams rp = desk(0, Branch::Carrier, 0.5, 10.0, 1.0, 0.38);
  const WorkMoments a = moments_analytic(rp);
  const NumericMoment m1 = moments_numeric(rp, 80, 1, QuenchTarget::Full);
  const NumericMoment m2 = moments_numeric(rp, 80, 2, QuenchTarget::Full);
  const NumericMoment m3 = moments_numeric(rp, 80, 3, QuenchTarget::Full);
  CHECK(std::fabs(m1.value) <= 1e-10 * (rp.w0 + 80));
  CHECK(std::fabs(m2.value - 0.25) <= 1e-8 * 0.25);
  CHECK(std::fabs(m3.value - a.third) <= 1e-6 * a.third);
  CHECK_FALSE(m2.thermal_tail_warning);

  const NumericMoment s1 = moments_numeric(desk(1, Branch::JC), 60, 1, QuenchTarget::Sideband);
  CHECK(std::fabs(s1.value) <= 1e-10 * 70);
  CHECK_THROWS_AS(moments_numeric(rp, 40, 5, QuenchTarget::Full), DomainError);
}

TEST_CASE("cancellation warning flags large binomial terms") {
  const ReducedParams rp = desk(0, Branch::Carrier, 0.5, 900.0, 0.01, 0.38);
  const NumericMoment m3 = moments_numeric(rp, 30, 3, QuenchTarget::Full);
  CHECK(m3.cancellation_ratio > 1e6);
  CHECK(m3.cancellation_warning);
}

TEST_CASE("two-point work distribution") {
  const WorkPMF none = work_pmf_sideband(desk(1, Branch::JC, 0.5, 10.0, 0.0), 60);
  REQUIRE(none.points.size() == 1);
  CHECK(none.points[0].first == 0.0);
  CHECK(none.points[0].second == doctest::Approx(1.0).epsilon(1e-12));

  for (Branch b : {Branch::JC, Branch::AJC}) {
    for (int m : {0, 1, 2}) {
      const ReducedParams rp = desk(m, b, 0.7, 10.0, 1.5, 0.38);
      const int nt = 60;
      const WorkPMF pmf = work_pmf_sideband(rp, nt);
      CHECK(std::fabs(pmf.total() - 1.0) <= 1e-10);
      CHECK_FALSE(pmf.tail_warning);
      for (const auto& [w, p] : pmf.points) CHECK(p >= 0.0);
      for (std::size_t i = 1; i < pmf.points.size(); ++i) CHECK(pmf.points[i].first > pmf.points[i - 1].first);
      CHECK(std::fabs(pmf.moment(1)) <= 1e-10);
      for (int order : {2, 3}) {
        const double num = moments_numeric(rp, nt, order, QuenchTarget::Sideband).value;
        CHECK(std::fabs(pmf.moment(order) - num) <= 1e-8 * std::fabs(num));
      }
    }
  }
  CHECK(work_pmf_sideband(desk(1, Branch::JC, 0.5, 10.0, 1.0, 50.0), 30).tail_warning);
}
