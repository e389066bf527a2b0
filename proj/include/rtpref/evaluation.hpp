#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rtpref/estimators.hpp"
#include "rtpref/simulators.hpp"
#include "rtpref/types.hpp"

namespace rtpref::eval {

struct Split {
  Dataset train;
  Dataset test;
};

/// First n_train rows train, the rest test; order preserved.
Split split(const Dataset& ds, std::size_t n_train);

using Predictor = std::function<int(const Vector& x, const Vector& y)>;

/// sign((x - y)^T w), ties to +1.
Predictor linear_predictor(Vector w);

/// Fraction of rows whose recorded choice differs from the prediction.
double choice_error_rate(const Dataset& test, const Predictor& predictor);

struct CoverageInterval {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct Coverage {
  std::vector<CoverageInterval> intervals;
  double miscoverage = 0.0;
};

/// Per row: E[t] +- sd(t) under the DDM with drift (x - y)^T w and boundary b,
/// lower end clamped at 0. Miscoverage is the fraction of observed t outside.
Coverage rt_coverage(const Dataset& test, const DdmParams& params);

/// exp(-w_t / w_r) for weights laid out as [w_r, -w_t] over [money, delay].
/// Throws ValidationError unless d = 2 and w_r > 0.
double discount_factor(const Vector& w);

struct AgentResult {
  std::string agent_id;
  double error_rate_ddm_rt = 0.0;
  double error_rate_ddm_choice_only = 0.0;
  double error_rate_lnr = 0.0;
  double miscoverage = 0.0;
  // NaN when a model's money weight is not positive; such agents are excluded
  // from discount summaries.
  double discount_ddm_rt = 0.0;
  double discount_choice_only = 0.0;
  double discount_ratio = 0.0;
  bool discount_valid = false;

  Vector u_hat;  // RT-trained DDM, w/b
  double b_hat = 0.0;
  Vector m_hat;  // choice-only DDM, b w
  Vector lnr_w;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
};

enum class DdmSolver { kExact, kSgd };

struct EvaluationOptions {
  std::size_t n_train = 100;
  DdmSolver solver = DdmSolver::kExact;
  est::SgdConfig sgd;
  double logistic_reg = 1e-4;
  est::LnrFitOptions lnr{.require_stationarity = false};
};

/// Splits one agent's data, fits the three models on the training part and
/// scores them on the test part. With `oracle`, the DDM parameters are taken
/// as given instead of fitted.
AgentResult evaluate_agent(const std::string& agent_id, const Dataset& ds, const EvaluationOptions& opts,
                           const std::optional<DdmParams>& oracle = std::nullopt);

struct Distribution {
  std::size_t count = 0;
  double mean = 0.0;
  std::vector<double> grid;
  std::vector<double> cdf;  // fraction of values <= grid[i]
  std::vector<double> bin_edges;
  std::vector<std::size_t> bin_counts;
};

/// Mean, empirical CDF on a grid and histogram. Fractions use [0, 1]; other
/// quantities span their observed range.
Distribution describe(std::vector<double> values, bool unit_interval);

struct Summary {
  std::size_t agents = 0;
  Distribution error_rate_ddm_rt;
  Distribution error_rate_ddm_choice_only;
  Distribution error_rate_lnr;
  Distribution miscoverage;
  Distribution discount_ratio;
  std::size_t discount_excluded = 0;
  double fraction_discount_ratio_above_one = 0.0;
};

Summary summarize(const std::vector<AgentResult>& results);

// ---------------------------------------------------------------------------
// Synthetic agent populations

/// Ranges of per-agent parameters for dated-rewards choices between m now
/// and `amount` after a delay. Utility is w_r R - w_t T, so w = [w_r, -w_t]
/// and the daily discount factor is exp(-w_t / w_r).
struct PopulationOptions {
  double money_weight_low = 0.3;
  double money_weight_high = 1.0;
  double discount_low = 0.75;
  double discount_high = 0.95;
  double b_low = 0.5;
  double b_high = 1.5;
  sim::AlternativeDesign design{.kind = sim::AlternativeDesign::Kind::kDatedRewards};

  void validate() const;
};

struct SyntheticAgent {
  std::string agent_id;
  DdmParams truth;
  std::vector<Observation> rows;
};

/// `agents` agents with independent parameters, `rows_per_agent` DDM trials
/// each. Agent j draws from the substream derive_seed(seed, j).
std::vector<SyntheticAgent> heterogeneous_population(std::size_t agents, std::size_t rows_per_agent,
                                                     std::uint64_t seed, const PopulationOptions& opts = {});

/// Zero-padded identifier "agent_007" for index 7 of `count`.
std::string agent_name(std::size_t index, std::size_t count);

}  // namespace rtpref::eval
