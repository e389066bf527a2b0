#include <cmath>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "doctest.h"
#include "rtpref/ddm_math.hpp"
#include "rtpref/errors.hpp"

using namespace rtpref;
using namespace rtpref::ddm;

namespace {

// Reference values evaluated at 40 significant digits.
constexpr double kChoiceProb11 = 0.88079707797788244406;
constexpr double kTanh1 = 0.76159415595576488812;
constexpr double kSecondMoment11 = 0.92164547272771274933;
constexpr double kSecondMomentHalf2 = 14.746327563643403989;     // v = 0.5, b = 2
constexpr double kSecondMomentNeg2Half = 0.057602842045482046833;  // v = -2, b = 0.5
constexpr double kSecondMomentSmall = 1.6666654666673682536;       // v = 1e-3, b = 1
constexpr double kVar11 = 0.34161981434173881872;
constexpr double kLaplace101 = 0.45909813108542549924;
constexpr double kLaplaceHalf12 = 0.4431865027723562854;
constexpr double kGap1 = 0.054487374769217363719;

struct DensityRef {
  double t, v, b, value;
};
constexpr DensityRef kDensity[] = {
    {0.5, 1, 1, 0.99670878220546479526},   {3, 0.5, 1, 0.030064673385517916232},
    {0.01, 0, 1, 1.538919725341285423e-19}, {0.2, 2, 0.5, 2.4195456890987873529},
    {10, -1, 2, 0.0004555704063335288924}, {1, 0, 1, 0.45736522563391993231},
};

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
  return g;
}

double integrate(const std::function<double(double)>& f) {
  boost::math::quadrature::exp_sinh<double> q;
  return q.integrate([&](double t) { return t > 0.0 ? f(t) : 0.0; });
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("choice probability") {
  CHECK(choice_prob(0, 1, 1) == 0.5);
  CHECK(rel(choice_prob(1, 1, 1), kChoiceProb11) < 1e-15);
  CHECK(1.0 - choice_prob(20, 1, 1) < 1e-12);
  CHECK(choice_prob(-800, 1, 1) == 0.0);
  for (double v : grid(-5, 5, 41)) {
    for (double b : {0.3, 1.0, 2.5}) {
      CHECK(std::abs(choice_prob(v, b, 1) + choice_prob(v, b, -1) - 1.0) < 1e-15);
      for (double c : {0.5, 3.0}) CHECK(std::abs(choice_prob(v, b, 1) - choice_prob(c * v, b / c, 1)) < 1e-15);
    }
  }
}

TEST_CASE("expected choice and time") {
  CHECK(expected_z(0, 3) == 0.0);
  CHECK(rel(expected_z(1, 1), kTanh1) < 1e-15);
  CHECK(rel(expected_t(1, 1), kTanh1) < 1e-15);
  CHECK(expected_t(0, 2) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(expected_t(1e-9, 2) == doctest::Approx(4.0).epsilon(1e-15));
  for (double v : grid(-4, 4, 100)) {
    const double b = 1.3;
    CHECK(std::abs(expected_z(v, b) - (2 * choice_prob(v, b, 1) - 1)) < 1e-14);
    CHECK(expected_z(-v, b) == -expected_z(v, b));
    CHECK(expected_t(-v, b) == expected_t(v, b));
    if (v != 0.0) CHECK(rel(expected_z(v, b) / expected_t(v, b), v / b) < 1e-12);
  }
}

TEST_CASE("second moment and variance") {
  CHECK(second_moment_t(0, 1) == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
  CHECK(rel(second_moment_t(1, 1), kSecondMoment11) < 1e-14);
  CHECK(rel(second_moment_t(0.5, 2), kSecondMomentHalf2) < 1e-14);
  CHECK(rel(second_moment_t(-2, 0.5), kSecondMomentNeg2Half) < 1e-14);
  CHECK(rel(second_moment_t(1e-3, 1), kSecondMomentSmall) < 1e-14);
  CHECK(var_t(0, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(rel(var_t(1, 1), kVar11) < 1e-13);
  for (double v : grid(-10, 10, 201)) {
    CHECK(var_t(v, 1) >= 0.0);
    CHECK(second_moment_t(-v, 0.8) == second_moment_t(v, 0.8));
    CHECK(time_moment_ratio(v) >= 0.6 - 1e-12);
  }
}

TEST_CASE("series branch continuity of the scaled second moment") {
  for (double beta : {0.999999, 1.0, 1.000001, -1.0}) {
    const double a = scaled_second_moment(std::nextafter(beta, 0.0));
    const double c = scaled_second_moment(beta);
    CHECK(rel(a, c) < 1e-14);
  }
}

TEST_CASE("Laplace transform") {
  CHECK(laplace_t(0, 1.7, 0.4) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rel(laplace_t(1, 0, 1), kLaplace101) < 1e-15);
  CHECK(rel(laplace_t(0.5, 1, 2), kLaplaceHalf12) < 1e-14);
  CHECK(laplace_t(50, 200, 3) > 0.0);
  CHECK_THROWS_AS(laplace_t(-1, 0, 1), ValidationError);
}

TEST_CASE("density against reference values") {
  for (const auto& r : kDensity) {
    const DensityValue d = rt_density_eval(r.t, r.v, r.b);
    CHECK(d.large_time_series == (r.t > 2 * r.b * r.b));
    if (r.value > 1e-10) {
      CHECK(rel(d.value, r.value) < 1e-11);
    } else {
      CHECK(std::abs(d.value - r.value) < 1e-18);
    }
  }
  CHECK(rt_density(1, 0, 1) > 0.0);
  CHECK(rt_density(1e-4, 0, 1) == 0.0);
  CHECK_THROWS_AS(rt_density(0, 0, 1), ValidationError);
  CHECK_THROWS_AS(rt_density(1, 0, 1, SeriesControl{1e-300, 3}), NumericalError);
}

TEST_CASE("both expansions agree near the switch point") {
  for (double b : {0.5, 1.0, 3.0}) {
    const double t = 2 * b * b;
    const SeriesControl fine{1e-16, 200};
    const double near = driftless_density(t, b, fine).value;
    const double above = driftless_density(std::nextafter(t, INFINITY), b, fine).value;
    CHECK(rel(near, above) < 1e-12);
  }
}

TEST_CASE("density quadrature reproduces the closed forms") {
  for (const auto& [v, b] : {std::pair{0.0, 1.0}, {1.0, 1.0}, {2.0, 0.5}, {-1.0, 2.0}}) {
    CAPTURE(v);
    CAPTURE(b);
    const double mass = integrate([&](double t) { return rt_density(t, v, b); });
    const double m1 = integrate([&](double t) { return t * rt_density(t, v, b); });
    const double m2 = integrate([&](double t) { return t * t * rt_density(t, v, b); });
    const double lap = integrate([&](double t) { return std::exp(-0.7 * t) * rt_density(t, v, b); });
    CHECK(std::abs(mass - 1.0) < 1e-6);
    CHECK(std::abs(m1 - expected_t(v, b)) < 1e-6);
    CHECK(std::abs(m2 - second_moment_t(v, b)) < 1e-6);
    CHECK(std::abs(lap - laplace_t(0.7, v, b)) < 1e-6);
  }
}

TEST_CASE("unit exit-time distribution") {
  for (double s : {0.05, 0.3, 1.0, 1.5, 4.0}) {
    CHECK(std::abs(unit_exit_cdf(s) + unit_exit_sf(s) - 1.0) < 1e-15);
    const double h = 1e-5 * s;
    const double deriv = (unit_exit_cdf(s + h) - unit_exit_cdf(s - h)) / (2 * h);
    CHECK(rel(deriv, unit_exit_pdf(s)) < 1e-7);
    CHECK(rel(unit_exit_pdf(s), driftless_density(s, 1.0).value) < 1e-12);
  }
  CHECK(unit_exit_cdf(0.0) == 0.0);
  CHECK(unit_exit_sf(0.0) == 1.0);
}

TEST_CASE("hyperbolic identity and tanh bound") {
  CHECK(check_hyperbolic_identity(0.0) == 0.0);
  CHECK(std::abs(check_hyperbolic_identity(1.0)) < 1e-12);
  CHECK(std::abs(check_hyperbolic_identity(10.0)) < 1e-10);
  CHECK(tanh_lower_bound_gap(0.0) == 0.0);
  CHECK(rel(tanh_lower_bound_gap(1.0), kGap1) < 1e-14);
  for (double beta : grid(-50, 50, 10000)) {
    CHECK(tanh_lower_bound_gap(beta) >= -1e-14);
    CHECK(std::abs(check_hyperbolic_identity(beta)) < 1e-10);
  }
  CHECK(tanhc(0.0) == 1.0);
  CHECK(log_cosh(1000.0) == doctest::Approx(1000.0 - std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("series control validation") {
  CHECK_THROWS_AS(SeriesControl({0.0, 10}).validate(), ValidationError);
  CHECK_THROWS_AS(SeriesControl({1e-12, 0}).validate(), ValidationError);
}
