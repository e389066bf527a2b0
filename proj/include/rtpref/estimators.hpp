#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rtpref/types.hpp"

namespace rtpref::est {

/// A candidate speed-accuracy ratio g(x, y), i.e. a model of E[z] / E[t].
using RatioFn = std::function<double(const Vector& x, const Vector& y)>;

/// (1/n) sum_i (t_i / 2) g_i^2 - z_i g_i. Throws NumericalError naming the
/// first row where g is not finite.
double general_loss(const Dataset& ds, const RatioFn& g);
double general_loss(const Dataset& ds, std::span<const double> g_values);

/// The quadratic loss of the linear DDM in the scale-free parameter u = w/b,
/// g(x, y) = (x - y)^T u.
double ddm_loss(const Dataset& ds, const Vector& u);

// ---------------------------------------------------------------------------
// Linear DDM with response times

struct SgdConfig {
  std::optional<double> lambda;  // default 1 / (8 D^2) with the empirical diameter
  int passes = 1;
  std::optional<Vector> w0;  // default zero
  bool average_iterates = true;

  void validate() const;
};

/// 1 / (8 D^2); 1 when every attribute difference is zero.
double default_step(const Dataset& ds);

/// Averaged SGD on ddm_loss: u_i = u_{i-1} - lambda (t_i u_{i-1}^T d_i - z_i) d_i,
/// d_i = x_i - y_i. The estimate targets u* = w*/b; with average_iterates
/// it is the mean of all iterates including u_0.
FitReport fit_ddm_sgd(const Dataset& ds, const SgdConfig& cfg = {});

/// Exact minimizer of ddm_loss (minimum-norm solution of
/// (sum t_i d_i d_i^T) u = sum z_i d_i).
FitReport fit_ddm_exact(const Dataset& ds);

// ---------------------------------------------------------------------------
// Choice-only (logit) estimation

/// (1/n) sum log(1 + exp(-2 z_i m^T d_i)) + (reg/2) ||m||^2; targets m* = b w*.
double logistic_loss(const Dataset& ds, const Vector& m, double reg = 0.0);
Vector logistic_gradient(const Dataset& ds, const Vector& m, double reg = 0.0);

/// Newton's method to gradient norm < 1e-10. Throws NumericalError when the
/// iterate diverges (perfectly separated data with reg = 0).
Vector fit_logistic(const Dataset& ds, double reg = 0.0);

// ---------------------------------------------------------------------------
// Boundary recovery

/// Least-squares fit of m = b^2 u: b = sqrt(m^T u / u^T u).
double recover_b_combine(const Vector& u_hat, const Vector& m_hat);

/// Mean over the dataset of the predicted E[t] = tanh(b^2 a_i) / a_i, a_i = u^T d_i.
double moment_matched_mean(const Vector& u_hat, const Dataset& ds, double b);

/// b in [1e-3, 1e3] whose predicted mean response time equals the sample mean.
double recover_b_moment_match(const Vector& u_hat, const Dataset& ds);

// ---------------------------------------------------------------------------
// Lognormal race

double lnr_loss(const Dataset& ds, const LnrParams& params);

struct LnrFitOptions {
  bool fix_d0 = true;
  bool fix_rho = true;
  int restarts = 8;
  std::uint64_t seed = 0;
  double grad_tol = 1e-6;
  int max_iterations = 500;
  double restart_spread = 0.5;  // sd of the perturbation of the init
  bool require_stationarity = true;
};

/// Minimizes general_loss with g = LNR ratio. Multi-start quasi-Newton with
/// central-difference gradients; the best stationary restart is returned.
FitReport fit_lnr(const Dataset& ds, const LnrParams& init, const LnrFitOptions& opts = {});

// ---------------------------------------------------------------------------
// Halfspace learning by majority vote

struct HalfspaceConfig {
  double epsilon = 0.1;
  double delta = 0.1;
  double gamma = 0.1;
  std::optional<int> k;  // default ceil(23 ln(1/delta))

  int batch_count() const;
  void validate() const;
};

/// Per-batch sample size: 4 * 80 / (gamma^2 epsilon) * sqrt(1 + b^2) (d / b^2 + 2),
/// multiplied by constant_scale.
std::size_t halfspace_batch_size(const HalfspaceConfig& cfg, std::size_t d, double b, double constant_scale = 1.0);

class MajorityClassifier {
 public:
  explicit MajorityClassifier(std::vector<Vector> estimates);

  /// Majority of sign((x - y)^T u_j); zero inner products and split votes go to +1.
  int classify(const Vector& x, const Vector& y) const;
  int classify_diff(const Vector& diff) const;

  const std::vector<Vector>& estimates() const noexcept { return estimates_; }

 private:
  std::vector<Vector> estimates_;
};

/// One single-pass SGD estimate per batch (the first k batches), combined by majority.
MajorityClassifier fit_halfspace_majority(const std::vector<Dataset>& batches, const HalfspaceConfig& cfg);

}  // namespace rtpref::est
