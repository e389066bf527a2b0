#include "rtpref/simulators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/erf.hpp>

#include "rtpref/ddm_math.hpp"
#include "rtpref/errors.hpp"

namespace rtpref::sim {

namespace {

constexpr double kPi = std::numbers::pi;

// Above this |bv| exact rejection is replaced by path simulation.
constexpr double kRejectionLimit = 8.0;
constexpr std::uint64_t kMaxProposals = 10'000'000;

// Tabulated CDF of the unit exit time on a log grid; quantiles are found by
// bisection in the table followed by safeguarded Newton steps on the exact
// series, so the table only supplies the bracket and starting point.
class UnitExitQuantile {
 public:
  static const UnitExitQuantile& instance() {
    static const UnitExitQuantile table;
    return table;
  }

  double operator()(double u) const {
    const bool upper = u > 0.5;
    const double q = upper ? 1.0 - u : u;  // tail probability being matched

    double lo = 0.0;
    double hi = INFINITY;
    double s;
    if (u <= cdf_.front()) {
      // F(s) ~ 2 erfc(1 / sqrt(2 s)) in the far left tail.
      const double e = boost::math::erfc_inv(u / 2.0);
      s = 1.0 / (2.0 * e * e);
      hi = grid_.front();
    } else if (u >= cdf_.back()) {
      // 1 - F(s) ~ (4 / pi) exp(-pi^2 s / 8) in the right tail.
      s = -8.0 / (kPi * kPi) * std::log(kPi * q / 4.0);
      lo = grid_.back();
    } else {
      const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
      const auto j = static_cast<std::size_t>(it - cdf_.begin());
      lo = grid_[j - 1];
      hi = grid_[j];
      const double f = (u - cdf_[j - 1]) / (cdf_[j] - cdf_[j - 1]);
      s = lo + f * (hi - lo);
    }

    for (int iter = 0; iter < 8; ++iter) {
      const double pdf = ddm::unit_exit_pdf(s);
      if (!(pdf > 0.0)) break;
      // Residual in the tail being matched keeps relative precision.
      const double resid = upper ? q - ddm::unit_exit_sf(s) : ddm::unit_exit_cdf(s) - q;
      if (resid == 0.0) break;
      if (resid > 0.0) {
        hi = std::min(hi, s);
      } else {
        lo = std::max(lo, s);
      }
      double next = s - resid / pdf;
      if (!(next > lo && next < hi)) next = std::isfinite(hi) ? 0.5 * (std::max(lo, 0.0) + hi) : 2.0 * s;
      const double step = std::abs(next - s);
      s = next;
      if (step <= 1e-14 * s) break;
    }
    return s;
  }

 private:
  static constexpr std::size_t kSize = 2048;
  static constexpr double kMin = 0.02;
  static constexpr double kMax = 12.0;

  UnitExitQuantile() {
    const double ratio = std::log(kMax / kMin) / static_cast<double>(kSize - 1);
    for (std::size_t i = 0; i < kSize; ++i) {
      grid_[i] = kMin * std::exp(ratio * static_cast<double>(i));
      cdf_[i] = ddm::unit_exit_cdf(grid_[i]);
    }
  }

  std::array<double, kSize> grid_{};
  std::array<double, kSize> cdf_{};
};

void check_boundary(double b) {
  if (!(b > 0.0) || !std::isfinite(b)) throw ValidationError("boundary b must be positive and finite");
}

}  // namespace

void StartDistribution::validate(double b) const {
  if (kind == Kind::kUniform && !(a >= 0.0 && a < b)) {
    throw ValidationError("uniform start half-width must satisfy 0 <= a < b");
  }
}

double StartDistribution::sample(Rng& rng) const {
  if (kind == Kind::kPointMass || a == 0.0) return 0.0;
  return a * (2.0 * rng.uniform() - 1.0);
}

double sample_driftless_exit_time(double b, Rng& rng) {
  check_boundary(b);
  return b * b * UnitExitQuantile::instance()(rng.uniform());
}

ChoiceRt sample_ddm(double v, double b, Rng& rng) {
  check_boundary(b);
  if (!std::isfinite(v)) throw ValidationError("drift must be finite");
  if (std::abs(b * v) > kRejectionLimit) {
    PathOptions opts;
    opts.dt = (b / 50.0) * (b / 50.0);
    return sample_ddm_path(v, b, 0.0, rng, opts);
  }
  ChoiceRt out;
  out.z = rng.uniform() < ddm::choice_prob(v, b, 1) ? 1 : -1;
  const double half_v2 = 0.5 * v * v;
  for (std::uint64_t k = 0; k < kMaxProposals; ++k) {
    const double t0 = sample_driftless_exit_time(b, rng);
    if (half_v2 == 0.0 || rng.uniform() < std::exp(-half_v2 * t0)) {
      out.t = t0;
      return out;
    }
  }
  throw NumericalError("DDM rejection sampler exceeded its proposal cap");
}

ChoiceRt sample_ddm(double v, double b, std::uint64_t seed) {
  Rng rng(seed);
  return sample_ddm(v, b, rng);
}

ChoiceRt sample_ddm_path(double v, double b, double zeta0, Rng& rng, const PathOptions& opts) {
  check_boundary(b);
  if (!(opts.dt > 0.0)) throw ValidationError("path step dt must be positive");
  if (!(std::abs(zeta0) < b)) throw ValidationError("start point must lie strictly inside (-b, b)");

  const double dt = opts.dt;
  const double sd = std::sqrt(dt);
  const double step_drift = v * dt;
  const std::uint64_t max_steps =
      opts.max_steps > 0 ? opts.max_steps : static_cast<std::uint64_t>(std::ceil(1e4 * b * b / dt));
  // Crossing probabilities below exp(-40) are ignored.
  const double near = 20.0 * dt;

  double w = zeta0;
  for (std::uint64_t step = 1; step <= max_steps; ++step) {
    const double next = w + step_drift + sd * rng.normal();
    const double t = static_cast<double>(step) * dt;
    if (next >= b) return {1, t};
    if (next <= -b) return {-1, t};
    if (opts.bridge_correction) {
      const double up = (b - w) * (b - next);
      const double down = (w + b) * (next + b);
      if (up < near || down < near) {
        const double p_up = std::exp(-2.0 * up / dt);
        const double p_down = std::exp(-2.0 * down / dt);
        const double u = rng.uniform();
        if (u < p_up) return {1, t};
        if (u < p_up + p_down) return {-1, t};
      }
    }
    w = next;
  }
  throw NumericalError("path simulation exceeded " + std::to_string(max_steps) + " steps");
}

ChoiceRt sample_ddm_path(double v, double b, double zeta0, double dt, std::uint64_t seed) {
  Rng rng(seed);
  PathOptions opts;
  opts.dt = dt;
  return sample_ddm_path(v, b, zeta0, rng, opts);
}

ChoiceRt sample_extended_ddm(double v, double b, const StartDistribution& start, Rng& rng, double dt) {
  check_boundary(b);
  start.validate(b);
  PathOptions opts;
  opts.dt = dt > 0.0 ? dt : 1e-4 * b * b;
  const double zeta = start.sample(rng);
  return sample_ddm_path(v, b, zeta, rng, opts);
}

ChoiceRt sample_extended_ddm(double v, double b, const StartDistribution& start, std::uint64_t seed, double dt) {
  Rng rng(seed);
  return sample_extended_ddm(v, b, start, rng, dt);
}

ChoiceRt sample_lnr(double nu_x, double nu_y, double d0, double rho, Rng& rng) {
  if (!(std::abs(rho) < 1.0)) throw ValidationError("rho must satisfy |rho| < 1");
  const double g1 = rng.normal();
  const double g2 = rng.normal();
  const double log_vx = nu_x + g1;
  const double log_vy = nu_y + rho * g1 + std::sqrt(1.0 - rho * rho) * g2;
  const double log_tx = d0 + rng.normal() - log_vx;
  const double log_ty = d0 + rng.normal() - log_vy;
  return log_tx <= log_ty ? ChoiceRt{1, std::exp(log_tx)} : ChoiceRt{-1, std::exp(log_ty)};
}

ChoiceRt sample_lnr(double nu_x, double nu_y, double d0, double rho, std::uint64_t seed) {
  Rng rng(seed);
  return sample_lnr(nu_x, nu_y, d0, rho, rng);
}

int sample_massart(const Vector& x, const Vector& y, const Vector& w_true, const NoiseRate& eta, Rng& rng) {
  if (x.size() != w_true.size() || y.size() != w_true.size()) throw ValidationError("massart: dimension mismatch");
  const double rate = eta(x, y);
  if (!(rate >= 0.0 && rate < 0.5)) throw ValidationError("massart noise rate must lie in [0, 0.5)");
  const int clean = (x - y).dot(w_true) >= 0.0 ? 1 : -1;
  return rng.uniform() < rate ? -clean : clean;
}

NoiseRate ddm_noise_rate(const Vector& w_true, double b) {
  check_boundary(b);
  return [w_true, b](const Vector& x, const Vector& y) {
    return 1.0 / (1.0 + std::exp(2.0 * b * std::abs((x - y).dot(w_true))));
  };
}

void AlternativeDesign::validate(std::size_t d) const {
  if (kind == Kind::kBox) {
    if (!(high > low) || !std::isfinite(low) || !std::isfinite(high)) {
      throw ValidationError("box design requires finite low < high");
    }
  } else {
    if (d != 2) throw ValidationError("dated-rewards design requires d = 2");
    if (!(amount > 0.0) || !(delay_max > 0.0)) throw ValidationError("dated-rewards requires amount, delay_max > 0");
  }
}

std::pair<Vector, Vector> AlternativeDesign::sample(std::size_t d, Rng& rng) const {
  const auto n = static_cast<Eigen::Index>(d);
  Vector x(n);
  Vector y(n);
  if (kind == Kind::kBox) {
    for (Eigen::Index j = 0; j < n; ++j) x[j] = low + (high - low) * rng.uniform();
    for (Eigen::Index j = 0; j < n; ++j) y[j] = low + (high - low) * rng.uniform();
  } else {
    x << amount * rng.uniform(), 0.0;
    y << amount, delay_max * rng.uniform();
  }
  return {std::move(x), std::move(y)};
}

void SimulationSpec::validate() const {
  if (d < 1) throw ValidationError("dimension must be at least 1");
  design.validate(d);
  if (model == Model::kLnr) {
    lnr.validate();
    if (static_cast<std::size_t>(lnr.w.size()) != d) throw ValidationError("LNR weight dimension mismatch");
  } else {
    ddm.validate();
    if (static_cast<std::size_t>(ddm.w.size()) != d) throw ValidationError("DDM weight dimension mismatch");
    if (model == Model::kExtendedDdm) start.validate(ddm.b);
  }
}

std::vector<Observation> simulate_rows(const SimulationSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  std::vector<Observation> rows(n);
  const std::size_t chunks = (n + kBatchChunk - 1) / kBatchChunk;
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng(derive_seed(seed, c));
    const std::size_t end = std::min(n, (c + 1) * kBatchChunk);
    for (std::size_t i = c * kBatchChunk; i < end; ++i) {
      auto [x, y] = spec.design.sample(spec.d, rng);
      ChoiceRt draw;
      switch (spec.model) {
        case Model::kDdm:
          draw = sample_ddm(spec.ddm.drift(x, y), spec.ddm.b, rng);
          break;
        case Model::kExtendedDdm:
          draw = sample_extended_ddm(spec.ddm.drift(x, y), spec.ddm.b, spec.start, rng, spec.dt);
          break;
        case Model::kLnr:
          draw = sample_lnr(x.dot(spec.lnr.w), y.dot(spec.lnr.w), spec.lnr.d0, spec.lnr.rho, rng);
          break;
      }
      rows[i] = Observation{std::move(x), std::move(y), draw.z, draw.t};
    }
  });
  return rows;
}

}  // namespace rtpref::sim
