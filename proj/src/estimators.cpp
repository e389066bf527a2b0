#include "rtpref/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rtpref/ddm_math.hpp"
#include "rtpref/errors.hpp"
#include "rtpref/lnr_math.hpp"
#include "rtpref/random.hpp"

namespace rtpref::est {

namespace {

void require_nonempty(const Dataset& ds) {
  if (ds.empty()) throw ValidationError("empty dataset");
}

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

double general_loss(const Dataset& ds, std::span<const double> g_values) {
  require_nonempty(ds);
  if (g_values.size() != ds.size()) throw ValidationError("general_loss: one ratio value per row required");
  double sum = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double g = g_values[i];
    if (!std::isfinite(g)) throw NumericalError("ratio function is not finite at row " + std::to_string(i));
    sum += 0.5 * ds[i].t * g * g - ds[i].z * g;
  }
  return sum / static_cast<double>(ds.size());
}

double general_loss(const Dataset& ds, const RatioFn& g) {
  require_nonempty(ds);
  std::vector<double> values(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) values[i] = g(ds[i].x, ds[i].y);
  return general_loss(ds, values);
}

double ddm_loss(const Dataset& ds, const Vector& u) {
  require_nonempty(ds);
  if (static_cast<std::size_t>(u.size()) != ds.dim()) throw ValidationError("ddm_loss: dimension mismatch");
  const Vector g = ds.diffs().transpose() * u;
  return general_loss(ds, std::span<const double>(g.data(), static_cast<std::size_t>(g.size())));
}

void SgdConfig::validate() const {
  if (lambda && !(*lambda > 0.0 && std::isfinite(*lambda))) throw ValidationError("SGD step size must be positive");
  if (passes < 1) throw ValidationError("SGD passes must be at least 1");
}

double default_step(const Dataset& ds) {
  const double d = ds.diameter();
  return d > 0.0 ? 1.0 / (8.0 * d * d) : 1.0;
}

FitReport fit_ddm_sgd(const Dataset& ds, const SgdConfig& cfg) {
  require_nonempty(ds);
  cfg.validate();
  const auto dim = static_cast<Eigen::Index>(ds.dim());
  const double lambda = cfg.lambda.value_or(default_step(ds));

  Vector u = cfg.w0.value_or(Vector::Zero(dim));
  if (u.size() != dim) throw ValidationError("SGD initial vector has the wrong dimension");
  Vector sum = u;
  std::size_t count = 1;

  for (int pass = 0; pass < cfg.passes; ++pass) {
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto d = ds.diff(i);
      const double residual = ds[i].t * u.dot(d) - ds[i].z;
      u.noalias() -= (lambda * residual) * d;
      sum += u;
      ++count;
    }
    if (!u.allFinite()) {
      throw NumericalError("SGD iterate diverged (step size " + std::to_string(lambda) + " too large)");
    }
  }

  FitReport report;
  report.averaged_iterate = sum / static_cast<double>(count);
  report.estimate = cfg.average_iterates ? report.averaged_iterate : u;
  report.sigma_hat = empirical_sigma(ds);
  report.final_loss = ddm_loss(ds, report.estimate);
  report.n_used = ds.size() * static_cast<std::size_t>(cfg.passes);
  return report;
}

FitReport fit_ddm_exact(const Dataset& ds) {
  require_nonempty(ds);
  const auto dim = static_cast<Eigen::Index>(ds.dim());
  Matrix h = Matrix::Zero(dim, dim);
  Vector rhs = Vector::Zero(dim);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto d = ds.diff(i);
    h.noalias() += ds[i].t * d * d.transpose();
    rhs += ds[i].z * d;
  }
  FitReport report;
  report.estimate = h.completeOrthogonalDecomposition().solve(rhs);
  if (!report.estimate.allFinite()) throw NumericalError("quadratic DDM loss solve produced non-finite values");
  report.averaged_iterate = report.estimate;
  report.sigma_hat = empirical_sigma(ds);
  report.final_loss = ddm_loss(ds, report.estimate);
  report.n_used = ds.size();
  return report;
}

double logistic_loss(const Dataset& ds, const Vector& m, double reg) {
  require_nonempty(ds);
  const Vector s = ds.diffs().transpose() * m;
  double sum = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) sum += softplus(-2.0 * ds[i].z * s[static_cast<Eigen::Index>(i)]);
  return sum / static_cast<double>(ds.size()) + 0.5 * reg * m.squaredNorm();
}

Vector logistic_gradient(const Dataset& ds, const Vector& m, double reg) {
  require_nonempty(ds);
  const Vector s = ds.diffs().transpose() * m;
  Vector g = Vector::Zero(m.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double zi = ds[i].z;
    g -= (2.0 * zi * logistic(-2.0 * zi * s[static_cast<Eigen::Index>(i)])) * ds.diff(i);
  }
  return g / static_cast<double>(ds.size()) + reg * m;
}

Vector fit_logistic(const Dataset& ds, double reg) {
  require_nonempty(ds);
  if (!(reg >= 0.0)) throw ValidationError("ridge coefficient must be nonnegative");
  const auto dim = static_cast<Eigen::Index>(ds.dim());
  const double n = static_cast<double>(ds.size());
  constexpr double kGradTol = 1e-10;
  constexpr double kDivergence = 1e6;

  Vector m = Vector::Zero(dim);
  double loss = logistic_loss(ds, m, reg);
  Vector grad = logistic_gradient(ds, m, reg);
  const auto separated = [&] { return reg == 0.0 && loss < 1e-8; };
  for (int iter = 0; iter < 200; ++iter) {
    if (grad.norm() < kGradTol && !separated()) return m;
    if (separated()) break;

    const Vector s = ds.diffs().transpose() * m;
    Matrix hess = reg * Matrix::Identity(dim, dim);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const double p = logistic(2.0 * s[static_cast<Eigen::Index>(i)]);
      const auto d = ds.diff(i);
      hess.noalias() += (4.0 * p * (1.0 - p) / n) * d * d.transpose();
    }
    const Vector step = hess.completeOrthogonalDecomposition().solve(-grad);
    // Steps this small are below what the loss can resolve.
    if (step.norm() <= 1e-8 * (1.0 + m.norm()) && !separated()) return m + step;

    // Backtracking; near the optimum the loss stops resolving, so a step that
    // reduces the gradient norm is accepted as well.
    double alpha = 1.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      const Vector trial = m + alpha * step;
      const double trial_loss = logistic_loss(ds, trial, reg);
      const Vector trial_grad = logistic_gradient(ds, trial, reg);
      if (trial_loss < loss || (trial_loss <= loss + 1e-15 && trial_grad.norm() < grad.norm())) {
        m = trial;
        loss = trial_loss;
        grad = trial_grad;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!m.allFinite() || m.norm() > kDivergence) {
      throw NumericalError("logistic estimate diverged; choices look perfectly separated, use reg > 0");
    }
    if (!accepted) break;
  }
  if (grad.norm() < kGradTol && !separated()) return m;
  if (separated()) {
    throw NumericalError("logistic estimate diverged; choices look perfectly separated, use reg > 0");
  }
  throw NumericalError("logistic Newton iteration stalled at gradient norm " + std::to_string(grad.norm()));
}

double recover_b_combine(const Vector& u_hat, const Vector& m_hat) {
  if (u_hat.size() != m_hat.size()) throw ValidationError("recover_b_combine: dimension mismatch");
  const double uu = u_hat.squaredNorm();
  if (!(uu > 0.0)) throw ValidationError("recover_b_combine requires a nonzero u estimate");
  const double mu = m_hat.dot(u_hat);
  if (!(mu > 0.0)) {
    throw NumericalError("inconsistent estimates: m^T u = " + std::to_string(mu) + " is not positive");
  }
  return std::sqrt(mu / uu);
}

double moment_matched_mean(const Vector& u_hat, const Dataset& ds, double b) {
  require_nonempty(ds);
  if (static_cast<std::size_t>(u_hat.size()) != ds.dim()) throw ValidationError("moment match: dimension mismatch");
  const Vector a = ds.diffs().transpose() * u_hat;
  const double b2 = b * b;
  double sum = 0.0;
  // tanh(b^2 a) / a = b^2 tanhc(b^2 a), finite at a = 0.
  for (Eigen::Index i = 0; i < a.size(); ++i) sum += b2 * ddm::tanhc(b2 * a[i]);
  return sum / static_cast<double>(a.size());
}

double recover_b_moment_match(const Vector& u_hat, const Dataset& ds) {
  require_nonempty(ds);
  double mean_t = 0.0;
  for (const auto& r : ds) mean_t += r.t;
  mean_t /= static_cast<double>(ds.size());

  double lo = 1e-3;
  double hi = 1e3;
  const double f_lo = moment_matched_mean(u_hat, ds, lo);
  const double f_hi = moment_matched_mean(u_hat, ds, hi);
  if (mean_t < f_lo || mean_t > f_hi) {
    throw NumericalError("mean response time " + std::to_string(mean_t) + " outside attainable range [" +
                         std::to_string(f_lo) + ", " + std::to_string(f_hi) + "]");
  }
  const double tol = 1e-8 * mean_t;
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = std::sqrt(lo * hi);
    const double f = moment_matched_mean(u_hat, ds, mid);
    if (std::abs(f - mean_t) < tol) return mid;
    if (f < mean_t) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::sqrt(lo * hi);
}

// ---------------------------------------------------------------------------

double lnr_loss(const Dataset& ds, const LnrParams& params) {
  require_nonempty(ds);
  params.validate();
  if (static_cast<std::size_t>(params.w.size()) != ds.dim()) throw ValidationError("lnr_loss: dimension mismatch");
  std::vector<double> g(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) g[i] = lnr::ratio(ds[i].x, ds[i].y, params);
  return general_loss(ds, g);
}

namespace {

// Free parameters of an LNR fit: w, then d0 and atanh(rho) when not fixed.
struct LnrPacking {
  Eigen::Index dim;
  bool free_d0;
  bool free_rho;
  LnrParams fixed;

  Eigen::Index size() const { return dim + (free_d0 ? 1 : 0) + (free_rho ? 1 : 0); }

  Vector pack(const LnrParams& p) const {
    Vector theta(size());
    theta.head(dim) = p.w;
    Eigen::Index k = dim;
    if (free_d0) theta[k++] = p.d0;
    if (free_rho) theta[k++] = std::atanh(p.rho);
    return theta;
  }

  LnrParams unpack(const Vector& theta) const {
    LnrParams p = fixed;
    p.w = theta.head(dim);
    Eigen::Index k = dim;
    if (free_d0) p.d0 = theta[k++];
    if (free_rho) p.rho = std::tanh(theta[k++]);
    return p;
  }
};

class LnrObjective {
 public:
  LnrObjective(const Dataset& ds, LnrPacking packing) : ds_(ds), packing_(std::move(packing)) {}

  double value(const Vector& theta) const {
    const LnrParams p = packing_.unpack(theta);
    if (!(std::abs(p.rho) < 1.0)) return std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const auto& r : ds_) {
      const double g = lnr::ratio(r.x, r.y, p);
      if (!std::isfinite(g)) return std::numeric_limits<double>::infinity();
      sum += 0.5 * r.t * g * g - r.z * g;
    }
    return sum / static_cast<double>(ds_.size());
  }

  Vector gradient(const Vector& theta) const {
    Vector g(theta.size());
    Vector probe = theta;
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
      const double h = 1e-6 * (1.0 + std::abs(theta[j]));
      probe[j] = theta[j] + h;
      const double up = value(probe);
      probe[j] = theta[j] - h;
      const double down = value(probe);
      probe[j] = theta[j];
      g[j] = (up - down) / (2.0 * h);
    }
    return g;
  }

 private:
  const Dataset& ds_;
  LnrPacking packing_;
};

struct MinimizeResult {
  Vector theta;
  double value;
  double grad_norm;
  bool converged;
};

// BFGS with Armijo backtracking.
MinimizeResult minimize_bfgs(const LnrObjective& obj, Vector x, double grad_tol, int max_iterations) {
  const Eigen::Index n = x.size();
  double f = obj.value(x);
  if (!std::isfinite(f)) return {x, f, std::numeric_limits<double>::infinity(), false};
  Vector g = obj.gradient(x);
  Matrix inv_h = Matrix::Identity(n, n);

  for (int iter = 0; iter < max_iterations; ++iter) {
    if (g.norm() < grad_tol) return {x, f, g.norm(), true};
    Vector p = -inv_h * g;
    double slope = g.dot(p);
    if (!(slope < 0.0)) {
      inv_h.setIdentity();
      p = -g;
      slope = -g.squaredNorm();
    }
    double alpha = 1.0;
    bool accepted = false;
    Vector x_new;
    double f_new = f;
    for (int k = 0; k < 50; ++k) {
      x_new = x + alpha * p;
      f_new = obj.value(x_new);
      if (f_new <= f + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (!inv_h.isIdentity()) {
        inv_h.setIdentity();
        continue;
      }
      break;
    }
    const Vector g_new = obj.gradient(x_new);
    const Vector s = x_new - x;
    const Vector y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Matrix eye = Matrix::Identity(n, n);
      inv_h = (eye - rho * s * y.transpose()) * inv_h * (eye - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    x = x_new;
    f = f_new;
    g = g_new;
  }
  return {x, f, g.norm(), g.norm() < grad_tol};
}

}  // namespace

FitReport fit_lnr(const Dataset& ds, const LnrParams& init, const LnrFitOptions& opts) {
  require_nonempty(ds);
  init.validate();
  if (static_cast<std::size_t>(init.w.size()) != ds.dim()) throw ValidationError("fit_lnr: init dimension mismatch");
  if (opts.restarts < 1) throw ValidationError("fit_lnr needs at least one restart");

  const LnrPacking packing{static_cast<Eigen::Index>(ds.dim()), !opts.fix_d0, !opts.fix_rho, init};
  const LnrObjective obj(ds, packing);
  const Vector theta0 = packing.pack(init);

  Rng rng(opts.seed);
  std::optional<MinimizeResult> best_converged;
  std::optional<MinimizeResult> best_any;
  for (int r = 0; r < opts.restarts; ++r) {
    Vector start = theta0;
    if (r > 0) {
      for (Eigen::Index j = 0; j < start.size(); ++j) start[j] += opts.restart_spread * rng.normal();
    }
    MinimizeResult res = minimize_bfgs(obj, start, opts.grad_tol, opts.max_iterations);
    if (!std::isfinite(res.value)) continue;
    if (!best_any || res.value < best_any->value) best_any = res;
    if (res.converged && (!best_converged || res.value < best_converged->value)) best_converged = res;
  }

  if (!best_any) throw NumericalError("fit_lnr: every restart produced a non-finite loss");
  if (!best_converged && opts.require_stationarity) {
    throw NumericalError("fit_lnr: no restart reached gradient norm " + std::to_string(opts.grad_tol) +
                         " (best loss " + std::to_string(best_any->value) + ", gradient norm " +
                         std::to_string(best_any->grad_norm) + ")");
  }
  const MinimizeResult& best = best_converged ? *best_converged : *best_any;

  FitReport report;
  report.lnr = packing.unpack(best.theta);
  report.estimate = report.lnr->w;
  report.averaged_iterate = report.estimate;
  report.sigma_hat = empirical_sigma(ds);
  report.final_loss = best.value;
  report.n_used = ds.size();
  report.converged = best.converged;
  report.grad_norm = best.grad_norm;
  return report;
}

// ---------------------------------------------------------------------------

int HalfspaceConfig::batch_count() const {
  if (k) return *k;
  return std::max(1, static_cast<int>(std::ceil(23.0 * std::log(1.0 / delta))));
}

void HalfspaceConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ValidationError("epsilon must lie in (0, 1]");
  if (!(delta > 0.0 && delta <= 1.0)) throw ValidationError("delta must lie in (0, 1]");
  if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
  if (k && *k < 1) throw ValidationError("batch count k must be at least 1");
}

std::size_t halfspace_batch_size(const HalfspaceConfig& cfg, std::size_t d, double b, double constant_scale) {
  cfg.validate();
  if (!(b > 0.0)) throw ValidationError("boundary b must be positive");
  if (!(constant_scale > 0.0)) throw ValidationError("constant scale must be positive");
  const double base = 80.0 / (cfg.gamma * cfg.gamma * cfg.epsilon) * std::sqrt(1.0 + b * b) *
                      (static_cast<double>(d) / (b * b) + 2.0);
  return static_cast<std::size_t>(std::ceil(constant_scale * 4.0 * base));
}

MajorityClassifier::MajorityClassifier(std::vector<Vector> estimates) : estimates_(std::move(estimates)) {
  if (estimates_.empty()) throw ValidationError("majority classifier needs at least one estimate");
}

int MajorityClassifier::classify_diff(const Vector& diff) const {
  long votes = 0;
  for (const auto& u : estimates_) votes += diff.dot(u) >= 0.0 ? 1 : -1;
  return votes >= 0 ? 1 : -1;
}

int MajorityClassifier::classify(const Vector& x, const Vector& y) const { return classify_diff(x - y); }

MajorityClassifier fit_halfspace_majority(const std::vector<Dataset>& batches, const HalfspaceConfig& cfg) {
  cfg.validate();
  const auto k = static_cast<std::size_t>(cfg.batch_count());
  if (batches.size() < k) {
    throw ValidationError("majority vote needs " + std::to_string(k) + " batches, got " +
                          std::to_string(batches.size()));
  }
  for (std::size_t j = 1; j < k; ++j) {
    if (batches[j].size() != batches[0].size()) throw ValidationError("majority vote batches must have equal size");
  }
  std::vector<Vector> estimates;
  estimates.reserve(k);
  for (std::size_t j = 0; j < k; ++j) estimates.push_back(fit_ddm_sgd(batches[j]).estimate);
  return MajorityClassifier(std::move(estimates));
}

}  // namespace rtpref::est
