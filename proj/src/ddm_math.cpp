#include "rtpref/ddm_math.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rtpref/errors.hpp"

namespace rtpref::ddm {

namespace {

constexpr double kPi = std::numbers::pi;

// Below this |beta| the closed forms switch to their Taylor expansions.
constexpr double kTaylorCutoff = 1e-4;

// Below this |beta| the second moment uses the power series of
// -3b + sinh 2b + b cosh 2b, whose leading terms cancel exactly.
constexpr double kSeriesCutoff = 1.0;

// Crossover from the image (small-time) to the eigenfunction (large-time)
// expansion of phi, in units of b^2.
constexpr double kLargeTimeSwitch = 2.0;

// (-3b + sinh 2b + b cosh 2b) / b^3 = sum_{k>=1} 4^k b^{2k-2} / (2k)! * (1 + 2/(2k+1)).
double cubic_numerator_series(double beta) {
  const double b2 = beta * beta;
  double a = 2.0;  // 4^k b^{2k-2} / (2k)! at k = 1
  double sum = 0.0;
  for (int k = 1; k < 40; ++k) {
    const double term = a * (1.0 + 2.0 / (2.0 * k + 1.0));
    sum += term;
    if (term < 1e-18 * sum) break;
    a *= 4.0 * b2 / ((2.0 * k + 1.0) * (2.0 * k + 2.0));
  }
  return sum;
}

double sech2(double x) {
  if (std::abs(x) > 350.0) return 0.0;
  const double c = std::cosh(x);
  return 1.0 / (c * c);
}

}  // namespace

void SeriesControl::validate() const {
  if (!(tol > 0.0)) throw ValidationError("series tolerance must be positive");
  if (max_terms < 1) throw ValidationError("series max_terms must be at least 1");
}

double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

double tanhc(double beta) {
  if (std::abs(beta) < kTaylorCutoff) {
    const double b2 = beta * beta;
    return 1.0 - b2 / 3.0 + 2.0 * b2 * b2 / 15.0;
  }
  return std::tanh(beta) / beta;
}

double scaled_second_moment(double beta) {
  const double a = std::abs(beta);
  if (a < kSeriesCutoff) return 0.5 * sech2(a) * cubic_numerator_series(a);
  // sech^2 sinh 2b = 2 tanh b and sech^2 cosh 2b = 2 - sech^2 b.
  const double s = sech2(a);
  return (2.0 * std::tanh(a) + 2.0 * a - 4.0 * a * s) / (2.0 * a * a * a);
}

double time_moment_ratio(double beta) { return tanhc(beta) / scaled_second_moment(beta); }

double choice_prob(double v, double b, int z) {
  return 1.0 / (1.0 + std::exp(-2.0 * b * static_cast<double>(z) * v));
}

double expected_z(double v, double b) { return std::tanh(b * v); }

double expected_t(double v, double b) { return b * b * tanhc(b * v); }

double second_moment_t(double v, double b) {
  const double b2 = b * b;
  return b2 * b2 * scaled_second_moment(b * v);
}

double var_t(double v, double b) {
  const double beta = b * v;
  const double m = tanhc(beta);
  const double b2 = b * b;
  const double var = b2 * b2 * (scaled_second_moment(beta) - m * m);
  return var > 0.0 ? var : 0.0;
}

double laplace_t(double alpha, double v, double b) {
  if (alpha < 0.0) throw ValidationError("laplace_t requires alpha >= 0");
  return std::exp(log_cosh(b * v) - log_cosh(b * std::sqrt(2.0 * alpha + v * v)));
}

double check_hyperbolic_identity(double beta) {
  if (beta == 0.0) return 0.0;
  const double th = std::tanh(beta);
  return 1.0 + beta * beta * scaled_second_moment(beta) - 2.0 * th * th - tanhc(beta);
}

double tanh_lower_bound_gap(double beta) { return tanhc(beta) - 1.0 / std::sqrt(1.0 + beta * beta); }

DensityValue driftless_density(double t, double b, const SeriesControl& ctrl) {
  ctrl.validate();
  if (!(t > 0.0)) throw ValidationError("density requires t > 0");
  if (!(b > 0.0)) throw ValidationError("density requires b > 0");

  const double b2 = b * b;
  const double s = t / b2;
  DensityValue out;
  out.large_time_series = s > kLargeTimeSwitch;

  // Both expansions alternate in sign with magnitudes decreasing in k:
  //   image:         2b / sqrt(2 pi t^3) (-1)^k (2k+1) exp(-(2k+1)^2 b^2 / (2t))
  //   eigenfunction: pi / (2 b^2)        (-1)^k (2k+1) exp(-(2k+1)^2 pi^2 t / (8 b^2))
  // Log scale keeps t^{-3/2} exp(-b^2 / 2t) finite for very small t.
  const double log_pre = out.large_time_series ? std::log(kPi / (2.0 * b2))
                                               : std::log(2.0 * b / std::sqrt(2.0 * kPi)) - 1.5 * std::log(t);
  const double rate = out.large_time_series ? kPi * kPi * s / 8.0 : 1.0 / (2.0 * s);
  const auto term = [&](double odd) { return std::exp(log_pre + std::log(odd) - odd * odd * rate); };

  double sum = 0.0;
  double prev = INFINITY;
  for (int k = 0; k < ctrl.max_terms; ++k) {
    const double odd = 2.0 * k + 1.0;
    const double mag = term(odd);
    sum += (k % 2 == 0) ? mag : -mag;
    out.terms = k + 1;
    const double next = term(odd + 2.0);
    if (next < ctrl.tol && next <= mag && mag <= prev) {
      out.value = sum > 0.0 ? sum : 0.0;
      return out;
    }
    prev = mag;
  }
  throw NumericalError("first-passage series did not converge within " + std::to_string(ctrl.max_terms) +
                       " terms (t=" + std::to_string(t) + ", b=" + std::to_string(b) + ")");
}

DensityValue rt_density_eval(double t, double v, double b, const SeriesControl& ctrl) {
  DensityValue out = driftless_density(t, b, ctrl);
  if (out.value > 0.0) out.value *= std::exp(log_cosh(b * v) - 0.5 * v * v * t);
  return out;
}

double rt_density(double t, double v, double b, const SeriesControl& ctrl) {
  return rt_density_eval(t, v, b, ctrl).value;
}

double unit_exit_pdf(double s) {
  if (!(s > 0.0)) return 0.0;
  double sum = 0.0;
  if (s <= 1.0) {
    const double pre = 2.0 / std::sqrt(2.0 * kPi * s * s * s);
    for (int k = 0; k < 20; ++k) {
      const double odd = 2.0 * k + 1.0;
      const double term = odd * std::exp(-odd * odd / (2.0 * s));
      sum += (k % 2 == 0) ? term : -term;
      if (term < 1e-18 * std::abs(sum)) break;
    }
    return pre * sum;
  }
  for (int k = 0; k < 20; ++k) {
    const double odd = 2.0 * k + 1.0;
    const double term = odd * std::exp(-odd * odd * kPi * kPi * s / 8.0);
    sum += (k % 2 == 0) ? term : -term;
    if (term < 1e-18 * std::abs(sum)) break;
  }
  return 0.5 * kPi * sum;
}

double unit_exit_cdf(double s) {
  if (!(s > 0.0)) return 0.0;
  if (s > 1.0) return 1.0 - unit_exit_sf(s);
  // Integrating the image series term by term gives erfc terms.
  const double scale = 1.0 / std::sqrt(2.0 * s);
  double sum = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double term = std::erfc((2.0 * k + 1.0) * scale);
    sum += (k % 2 == 0) ? term : -term;
    if (term < 1e-18 * std::abs(sum) || term == 0.0) break;
  }
  return 2.0 * sum;
}

double unit_exit_sf(double s) {
  if (!(s > 0.0)) return 1.0;
  if (s <= 1.0) return 1.0 - unit_exit_cdf(s);
  double sum = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double odd = 2.0 * k + 1.0;
    const double term = std::exp(-odd * odd * kPi * kPi * s / 8.0) / odd;
    sum += (k % 2 == 0) ? term : -term;
    if (term < 1e-18 * std::abs(sum)) break;
  }
  return 4.0 / kPi * sum;
}

}  // namespace rtpref::ddm
