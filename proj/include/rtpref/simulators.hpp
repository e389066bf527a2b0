#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "rtpref/parallel.hpp"
#include "rtpref/random.hpp"
#include "rtpref/types.hpp"

namespace rtpref::sim {

struct ChoiceRt {
  int z = 1;
  double t = 0.0;
};

/// Start-point distribution of the extended DDM. Mean zero, support inside (-b, b).
struct StartDistribution {
  enum class Kind { kPointMass, kUniform };
  Kind kind = Kind::kPointMass;
  double a = 0.0;  // half-width of uniform(-a, a)

  static StartDistribution point_mass() { return {}; }
  static StartDistribution uniform(double a) { return {Kind::kUniform, a}; }

  void validate(double b) const;
  double sample(Rng& rng) const;
};

/// Driftless exit time of (-b, b) from 0, by inverse CDF.
double sample_driftless_exit_time(double b, Rng& rng);

/// Exact DDM draw: z from the choice probability, t by rejection from the
/// driftless exit time with acceptance exp(-v^2 t / 2). For |bv| > 8 the
/// acceptance rate 1/cosh(bv) is too low and a fine path simulation is used.
ChoiceRt sample_ddm(double v, double b, Rng& rng);
ChoiceRt sample_ddm(double v, double b, std::uint64_t seed);

struct PathOptions {
  double dt = 1e-4;
  // Detect crossings between grid points with the Brownian-bridge crossing
  // probability. Without it the walk only checks grid points and the exit
  // time carries an O(sqrt(dt)) bias.
  bool bridge_correction = true;
  std::uint64_t max_steps = 0;  // 0 means ceil(1e4 b^2 / dt)
};

/// Random walk W += v dt + sqrt(dt) N(0, 1) from W_0 = zeta0 until |W| >= b.
/// t is the number of steps times dt.
ChoiceRt sample_ddm_path(double v, double b, double zeta0, Rng& rng, const PathOptions& opts = {});
ChoiceRt sample_ddm_path(double v, double b, double zeta0, double dt, std::uint64_t seed);

/// Extended DDM: zeta ~ start, then a path simulation. dt <= 0 selects 1e-4 b^2.
ChoiceRt sample_extended_ddm(double v, double b, const StartDistribution& start, Rng& rng, double dt = 0.0);
ChoiceRt sample_extended_ddm(double v, double b, const StartDistribution& start, std::uint64_t seed, double dt = 0.0);

/// One lognormal race; z = +1 iff tau_x <= tau_y, t = min(tau_x, tau_y).
ChoiceRt sample_lnr(double nu_x, double nu_y, double d0, double rho, Rng& rng);
ChoiceRt sample_lnr(double nu_x, double nu_y, double d0, double rho, std::uint64_t seed);

using NoiseRate = std::function<double(const Vector& x, const Vector& y)>;

/// z = sign((x - y)^T w) (ties to +1), flipped with probability eta(x, y) < 1/2.
int sample_massart(const Vector& x, const Vector& y, const Vector& w_true, const NoiseRate& eta, Rng& rng);

/// eta(x, y) = 1 / (1 + exp(2 b |(x - y)^T w|)): the flip rate of a linear DDM.
NoiseRate ddm_noise_rate(const Vector& w_true, double b);

inline constexpr std::size_t kBatchChunk = 4096;

/// n draws of `draw(rng)` split into fixed chunks with derived seeds; the
/// result is independent of the thread count.
template <class Draw>
std::vector<ChoiceRt> simulate_batch(std::size_t n, std::uint64_t seed, Draw draw) {
  std::vector<ChoiceRt> out(n);
  const std::size_t chunks = (n + kBatchChunk - 1) / kBatchChunk;
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng(derive_seed(seed, c));
    const std::size_t end = std::min(n, (c + 1) * kBatchChunk);
    for (std::size_t i = c * kBatchChunk; i < end; ++i) out[i] = draw(rng);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic datasets

/// How alternative pairs are drawn.
struct AlternativeDesign {
  enum class Kind { kBox, kDatedRewards };
  Kind kind = Kind::kBox;
  // kBox: every coordinate of x and y uniform on [low, high].
  double low = 0.0;
  double high = 1.0;
  // kDatedRewards (d = 2): x = [m, 0] with m uniform on (0, amount),
  // y = [amount, delay] with delay uniform on (0, delay_max).
  double amount = 10.0;
  double delay_max = 30.0;

  void validate(std::size_t d) const;
  std::pair<Vector, Vector> sample(std::size_t d, Rng& rng) const;
};

enum class Model { kDdm, kExtendedDdm, kLnr };

struct SimulationSpec {
  Model model = Model::kDdm;
  std::size_t d = 2;
  DdmParams ddm;              // kDdm, kExtendedDdm
  StartDistribution start;    // kExtendedDdm
  double dt = 0.0;            // kExtendedDdm; <= 0 selects 1e-4 b^2
  LnrParams lnr;              // kLnr
  AlternativeDesign design;

  void validate() const;
};

/// n synthetic observations, deterministic in seed.
std::vector<Observation> simulate_rows(const SimulationSpec& spec, std::size_t n, std::uint64_t seed);

}  // namespace rtpref::sim
