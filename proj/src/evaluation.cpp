#include "rtpref/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rtpref/ddm_math.hpp"
#include "rtpref/errors.hpp"
#include "rtpref/parallel.hpp"
#include "rtpref/random.hpp"

namespace rtpref::eval {

Split split(const Dataset& ds, std::size_t n_train) {
  if (n_train == 0 || n_train >= ds.size()) {
    throw ValidationError("n_train must satisfy 0 < n_train < n (n_train=" + std::to_string(n_train) +
                          ", n=" + std::to_string(ds.size()) + ")");
  }
  return {ds.slice(0, n_train), ds.slice(n_train, ds.size())};
}

Predictor linear_predictor(Vector w) {
  return [w = std::move(w)](const Vector& x, const Vector& y) { return (x - y).dot(w) >= 0.0 ? 1 : -1; };
}

double choice_error_rate(const Dataset& test, const Predictor& predictor) {
  if (test.empty()) throw ValidationError("empty test set");
  std::size_t wrong = 0;
  for (const auto& r : test) wrong += predictor(r.x, r.y) != r.z ? 1 : 0;
  return static_cast<double>(wrong) / static_cast<double>(test.size());
}

Coverage rt_coverage(const Dataset& test, const DdmParams& params) {
  params.validate();
  if (test.empty()) throw ValidationError("empty test set");
  if (static_cast<std::size_t>(params.w.size()) != test.dim()) throw ValidationError("rt_coverage: dimension mismatch");
  Coverage out;
  out.intervals.reserve(test.size());
  std::size_t outside = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const double v = test.diff(i).dot(params.w);
    const double mean = ddm::expected_t(v, params.b);
    const double sd = std::sqrt(ddm::var_t(v, params.b));
    const CoverageInterval iv{mean, std::max(0.0, mean - sd), mean + sd};
    const double t = test[i].t;
    outside += (t < iv.lower || t > iv.upper) ? 1 : 0;
    out.intervals.push_back(iv);
  }
  out.miscoverage = static_cast<double>(outside) / static_cast<double>(test.size());
  return out;
}

double discount_factor(const Vector& w) {
  if (w.size() != 2) throw ValidationError("discount factor needs weights over [money, delay]");
  if (!(w[0] > 0.0)) throw ValidationError("discount factor undefined: money weight is not positive");
  // w = [w_r, -w_t], so -w_t / w_r = w[1] / w[0].
  return std::exp(w[1] / w[0]);
}

namespace {

double discount_or_nan(const Vector& w) {
  if (w.size() != 2 || !(w[0] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return discount_factor(w);
}

}  // namespace

AgentResult evaluate_agent(const std::string& agent_id, const Dataset& ds, const EvaluationOptions& opts,
                           const std::optional<DdmParams>& oracle) {
  const Split parts = split(ds, opts.n_train);
  AgentResult res;
  res.agent_id = agent_id;
  res.n_train = parts.train.size();
  res.n_test = parts.test.size();

  if (oracle) {
    oracle->validate();
    res.u_hat = oracle->w / oracle->b;
    res.m_hat = oracle->w * oracle->b;
    res.b_hat = oracle->b;
  } else {
    res.u_hat = opts.solver == DdmSolver::kExact ? est::fit_ddm_exact(parts.train).estimate
                                                 : est::fit_ddm_sgd(parts.train, opts.sgd).estimate;
    res.b_hat = est::recover_b_moment_match(res.u_hat, parts.train);
    res.m_hat = est::fit_logistic(parts.train, opts.logistic_reg);
  }

  LnrParams init;
  init.w = Vector::Zero(static_cast<Eigen::Index>(ds.dim()));
  res.lnr_w = est::fit_lnr(parts.train, init, opts.lnr).estimate;

  res.error_rate_ddm_rt = choice_error_rate(parts.test, linear_predictor(res.u_hat));
  res.error_rate_ddm_choice_only = choice_error_rate(parts.test, linear_predictor(res.m_hat));
  // sign E[z] = sign(nu_x - nu_y) under the race model.
  res.error_rate_lnr = choice_error_rate(parts.test, linear_predictor(res.lnr_w));

  res.miscoverage = rt_coverage(parts.test, DdmParams{res.b_hat * res.u_hat, res.b_hat}).miscoverage;

  res.discount_ddm_rt = discount_or_nan(res.u_hat);
  res.discount_choice_only = discount_or_nan(res.m_hat);
  res.discount_valid = std::isfinite(res.discount_ddm_rt) && std::isfinite(res.discount_choice_only);
  res.discount_ratio = res.discount_valid ? res.discount_ddm_rt / res.discount_choice_only
                                          : std::numeric_limits<double>::quiet_NaN();
  return res;
}

Distribution describe(std::vector<double> values, bool unit_interval) {
  Distribution out;
  out.count = values.size();
  if (values.empty()) return out;
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());

  const double lo = unit_interval ? 0.0 : values.front();
  const double hi = unit_interval ? 1.0 : values.back();
  constexpr std::size_t kGrid = 101;
  constexpr std::size_t kUnitBins = 10;
  constexpr std::size_t kRangeBins = 20;
  out.grid.resize(kGrid);
  out.cdf.resize(kGrid);
  for (std::size_t i = 0; i < kGrid; ++i) {
    const double x = i + 1 == kGrid ? hi : lo + (hi - lo) * static_cast<double>(i) / (kGrid - 1);
    out.grid[i] = x;
    const auto le = std::upper_bound(values.begin(), values.end(), x) - values.begin();
    out.cdf[i] = static_cast<double>(le) / static_cast<double>(values.size());
  }

  const std::size_t bins = unit_interval ? kUnitBins : kRangeBins;
  out.bin_edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) out.bin_edges[i] = lo + (hi - lo) * static_cast<double>(i) / bins;
  out.bin_counts.assign(bins, 0);
  const double width = hi - lo;
  for (double v : values) {
    std::size_t bin = width > 0.0 ? static_cast<std::size_t>((v - lo) / width * static_cast<double>(bins)) : 0;
    out.bin_counts[std::min(bin, bins - 1)] += 1;
  }
  return out;
}

Summary summarize(const std::vector<AgentResult>& results) {
  if (results.empty()) throw ValidationError("nothing to summarize");
  Summary s;
  s.agents = results.size();
  std::vector<double> rt, choice, lnr, mis, ratio;
  for (const auto& r : results) {
    rt.push_back(r.error_rate_ddm_rt);
    choice.push_back(r.error_rate_ddm_choice_only);
    lnr.push_back(r.error_rate_lnr);
    mis.push_back(r.miscoverage);
    if (r.discount_valid) {
      ratio.push_back(r.discount_ratio);
    } else {
      ++s.discount_excluded;
    }
  }
  std::size_t above = 0;
  for (double v : ratio) above += v > 1.0 ? 1 : 0;
  s.fraction_discount_ratio_above_one = ratio.empty() ? 0.0 : static_cast<double>(above) / ratio.size();
  s.error_rate_ddm_rt = describe(std::move(rt), true);
  s.error_rate_ddm_choice_only = describe(std::move(choice), true);
  s.error_rate_lnr = describe(std::move(lnr), true);
  s.miscoverage = describe(std::move(mis), true);
  s.discount_ratio = describe(std::move(ratio), false);
  return s;
}

void PopulationOptions::validate() const {
  if (!(money_weight_low > 0.0 && money_weight_high >= money_weight_low)) {
    throw ValidationError("money weight range must be positive and ordered");
  }
  if (!(discount_low > 0.0 && discount_high >= discount_low && discount_high <= 1.0)) {
    throw ValidationError("discount range must satisfy 0 < low <= high <= 1");
  }
  if (!(b_low > 0.0 && b_high >= b_low)) throw ValidationError("boundary range must be positive and ordered");
  design.validate(2);
}

std::string agent_name(std::size_t index, std::size_t count) {
  const std::size_t width = std::max<std::size_t>(3, std::to_string(count > 0 ? count - 1 : 0).size());
  std::string digits = std::to_string(index);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return "agent_" + digits;
}

std::vector<SyntheticAgent> heterogeneous_population(std::size_t agents, std::size_t rows_per_agent,
                                                     std::uint64_t seed, const PopulationOptions& opts) {
  opts.validate();
  std::vector<SyntheticAgent> out(agents);
  parallel_for(agents, [&](std::size_t j) {
    Rng rng(derive_seed(seed, j));
    auto draw = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
    const double w_r = draw(opts.money_weight_low, opts.money_weight_high);
    const double delta = draw(opts.discount_low, opts.discount_high);
    const double b = draw(opts.b_low, opts.b_high);
    SyntheticAgent& agent = out[j];
    agent.agent_id = agent_name(j, agents);
    agent.truth.w = Vector(2);
    agent.truth.w << w_r, w_r * std::log(delta);
    agent.truth.b = b;
    agent.rows.reserve(rows_per_agent);
    for (std::size_t i = 0; i < rows_per_agent; ++i) {
      auto [x, y] = opts.design.sample(2, rng);
      const sim::ChoiceRt draw_zt = sim::sample_ddm(agent.truth.drift(x, y), b, rng);
      agent.rows.push_back(Observation{std::move(x), std::move(y), draw_zt.z, draw_zt.t});
    }
  });
  return out;
}

}  // namespace rtpref::eval
