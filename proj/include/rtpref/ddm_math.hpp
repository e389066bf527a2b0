#pragma once

// Closed-form quantities of the symmetric two-boundary DDM: W_t = B_t + v t,
// boundaries +-b, start at 0. Choice z = +1 when +b is hit first.

namespace rtpref::ddm {

/// Truncation controls for the first-passage series.
struct SeriesControl {
  double tol = 1e-12;  // absolute, on the density contribution of one term
  int max_terms = 200;

  void validate() const;
};

/// P(z) = 1 / (1 + exp(-2 b z v)).
double choice_prob(double v, double b, int z);

/// E[z] = tanh(b v).
double expected_z(double v, double b);

/// E[t] = (b / v) tanh(b v); b^2 at v = 0.
double expected_t(double v, double b);

/// E[t^2] = b sech^2(bv) (-3bv + sinh 2bv + bv cosh 2bv) / (2 v^3); 5 b^4 / 3 at v = 0.
double second_moment_t(double v, double b);

/// Var[t] = E[t^2] - E[t]^2.
double var_t(double v, double b);

/// E[exp(-alpha t)] = cosh(bv) / cosh(b sqrt(2 alpha + v^2)).
double laplace_t(double alpha, double v, double b);

struct DensityValue {
  double value = 0.0;
  int terms = 0;
  bool large_time_series = false;  // eigenfunction expansion used (t > 2 b^2)
};

/// Response-time density f(t) = cosh(bv) exp(-v^2 t / 2) phi(t). The density
/// is the same conditional on either choice.
DensityValue rt_density_eval(double t, double v, double b, const SeriesControl& ctrl = {});
double rt_density(double t, double v, double b, const SeriesControl& ctrl = {});

/// phi(t): driftless exit-time density of (-b, b).
DensityValue driftless_density(double t, double b, const SeriesControl& ctrl = {});

// Driftless exit time of (-1, 1), as functions of s = t / b^2. Accurate to
// roughly machine precision; used by the exact sampler.
double unit_exit_pdf(double s);
double unit_exit_cdf(double s);
double unit_exit_sf(double s);

/// tanh(beta) / beta with the removable singularity filled in.
double tanhc(double beta);

/// E[t^2] / b^4 as a function of beta = b v.
double scaled_second_moment(double beta);

/// b^2 E[t] / E[t^2] as a function of beta; bounded below by 0.6.
double time_moment_ratio(double beta);

/// 1 + sech^2(b)(-3b + sinh 2b + b cosh 2b)/(2b) - 2 tanh^2(b) - tanh(b)/b.
/// Identically zero; returns the floating-point residual.
double check_hyperbolic_identity(double beta);

/// tanh(beta)/beta - 1/sqrt(1 + beta^2); nonnegative.
double tanh_lower_bound_gap(double beta);

/// log(cosh(x)) without overflow.
double log_cosh(double x);

}  // namespace rtpref::ddm
