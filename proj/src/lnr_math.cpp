#include "rtpref/lnr_math.hpp"

#include <cmath>
#include <numbers>

#include "rtpref/errors.hpp"

namespace rtpref::lnr {

namespace {

void check_rho(double rho) {
  if (!(std::abs(rho) < 1.0)) throw ValidationError("rho must satisfy |rho| < 1");
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double expected_z(double nu_x, double nu_y, double rho) {
  check_rho(rho);
  // 2 Phi(a) - 1 = erf(a / sqrt 2), which keeps precision near zero.
  return std::erf((nu_x - nu_y) / std::sqrt(4.0 - 2.0 * rho) / std::numbers::sqrt2);
}

double j_rho(double r, double rho) {
  check_rho(rho);
  const double s = std::sqrt(4.0 - 2.0 * rho);
  return std::exp(0.5 * r) * normal_cdf((-r + rho - 2.0) / s) + std::exp(-0.5 * r) * normal_cdf((r + rho - 2.0) / s);
}

double expected_t(double nu_x, double nu_y, double d0, double rho) {
  return std::exp(d0 + 1.0 - 0.5 * (nu_x + nu_y)) * j_rho(nu_x - nu_y, rho);
}

double ratio(const Vector& x, const Vector& y, const LnrParams& params) {
  if (x.size() != params.w.size() || y.size() != params.w.size()) {
    throw ValidationError("lnr ratio: dimension mismatch");
  }
  const double nu_x = x.dot(params.w);
  const double nu_y = y.dot(params.w);
  return expected_z(nu_x, nu_y, params.rho) / expected_t(nu_x, nu_y, params.d0, params.rho);
}

}  // namespace rtpref::lnr
