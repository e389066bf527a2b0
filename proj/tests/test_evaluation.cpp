#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "rtpref/ddm_math.hpp"
#include "rtpref/errors.hpp"
#include "rtpref/evaluation.hpp"
#include "rtpref/simulators.hpp"

using namespace rtpref;
using namespace rtpref::eval;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Dataset rows_with_times(std::size_t n) {
  std::vector<Observation> rows;
  for (std::size_t i = 0; i < n; ++i) {
    rows.push_back(Observation{vec({double(i % 3), 1.0}), vec({0.5, double(i % 2)}), i % 4 ? 1 : -1, 0.1 + 0.01 * i});
  }
  return build_dataset(rows);
}

Dataset ddm_data(const Vector& w, double b, std::size_t n, std::uint64_t seed) {
  sim::SimulationSpec spec;
  spec.d = static_cast<std::size_t>(w.size());
  spec.ddm = DdmParams{w, b};
  spec.design.low = -1.0;
  return build_dataset(sim::simulate_rows(spec, n, seed));
}

// P(|t - E[t]| > sd(t)) by integrating the response-time density.
double miscoverage_probability(double v, double b) {
  const double mean = ddm::expected_t(v, b);
  const double sd = std::sqrt(ddm::var_t(v, b));
  const double lo = std::max(0.0, mean - sd), hi = mean + sd;
  const auto f = [&](double t) { return t > 0.0 ? ddm::rt_density(t, v, b) : 0.0; };
  const double inside = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-13);
  return 1.0 - inside;
}

}  // namespace

TEST_CASE("split") {
  const Dataset ds = rows_with_times(141);
  const Split s = split(ds, 100);
  CHECK(s.train.size() == 100);
  CHECK(s.test.size() == 41);
  CHECK(s.train[99].t == ds[99].t);
  CHECK(s.test[0].t == ds[100].t);
  const Split tiny = split(rows_with_times(2), 1);
  CHECK(tiny.train.size() == 1);
  CHECK(tiny.test.size() == 1);
  CHECK_THROWS_AS(split(ds, 141), ValidationError);
  CHECK_THROWS_AS(split(ds, 0), ValidationError);
}

TEST_CASE("choice error rate") {
  const Dataset ds = rows_with_times(40);
  // Predictors that read the recorded choice through the row's attributes.
  const auto lookup = [&](const Vector& x, const Vector& y) {
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds[i].x == x && ds[i].y == y) return ds[i].z;
    }
    return 1;
  };
  // Rows repeat, so the lookup reproduces the first match rather than every choice.
  const double e = choice_error_rate(ds, lookup);
  const double anti = choice_error_rate(ds, [&](const Vector& x, const Vector& y) { return -lookup(x, y); });
  CHECK(e + anti == doctest::Approx(1.0).epsilon(1e-15));

  const Vector w = vec({0.7, -0.2});
  const auto lin = linear_predictor(w);
  const auto neg = [&](const Vector& x, const Vector& y) { return -lin(x, y); };
  CHECK(choice_error_rate(ds, lin) + choice_error_rate(ds, neg) == doctest::Approx(1.0).epsilon(1e-15));

  std::vector<Observation> exact;
  for (const auto& r : ds) exact.push_back(Observation{r.x, r.y, lin(r.x, r.y), r.t});
  const Dataset agree = build_dataset(exact);
  CHECK(choice_error_rate(agree, lin) == 0.0);
  CHECK(choice_error_rate(agree, neg) == 1.0);
}

TEST_CASE("oracle predictor error matches the closed form") {
  const Vector w = vec({1.0, -0.8});
  const double b = 0.9;
  const Dataset ds = ddm_data(w, b, 100000, 3);
  double expected = 0.0, var = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double v = ds.diff(i).dot(w);
    const double p = ddm::choice_prob(v, b, v >= 0 ? -1 : 1);
    expected += p;
    var += p * (1 - p);
  }
  const double n = static_cast<double>(ds.size());
  expected /= n;
  const double se = std::sqrt(var) / n;
  CHECK(std::abs(choice_error_rate(ds, linear_predictor(w)) - expected) <= 3 * se);
}

TEST_CASE("response-time coverage") {
  SUBCASE("times at the mean are covered") {
    const DdmParams p{vec({0.5, 0.5}), 1.2};
    std::vector<Observation> rows;
    const Dataset base = rows_with_times(30);
    for (const auto& r : base) rows.push_back(Observation{r.x, r.y, r.z, ddm::expected_t(p.drift(r.x, r.y), p.b)});
    const Coverage c = rt_coverage(build_dataset(rows), p);
    CHECK(c.miscoverage == 0.0);
    for (const auto& iv : c.intervals) {
      CHECK(iv.upper > iv.lower);
      CHECK(iv.lower >= 0.0);
    }
  }
  SUBCASE("well-specified DDM matches the quadrature probability") {
    // A design with x - y = +-1 and w = 1 gives drift +-1 on every row.
    Rng rng(9);
    std::vector<Observation> rows;
    for (int i = 0; i < 200000; ++i) {
      const double s = rng.uniform() < 0.5 ? 1.0 : -1.0;
      const auto d = sim::sample_ddm(s, 1.0, rng);
      rows.push_back(Observation{vec({s}), vec({0.0}), d.z, d.t});
    }
    const Dataset ds = build_dataset(rows);
    const double p = miscoverage_probability(1.0, 1.0);
    const double got = rt_coverage(ds, DdmParams{vec({1.0}), 1.0}).miscoverage;
    CHECK(std::abs(got - p) <= 3 * std::sqrt(p * (1 - p) / ds.size()));

    // Relabeling choices leaves the intervals and miscoverage unchanged.
    std::vector<Observation> flipped = rows;
    for (auto& r : flipped) r.z = -r.z;
    CHECK(rt_coverage(build_dataset(flipped), DdmParams{vec({1.0}), 1.0}).miscoverage == got);
  }
}

TEST_CASE("discount factor") {
  CHECK(discount_factor(vec({1, 0})) == 1.0);
  CHECK(discount_factor(vec({1, -1})) == doctest::Approx(0.36787944117144233).epsilon(1e-15));
  CHECK(discount_factor(vec({2.5, -0.4})) == doctest::Approx(discount_factor(vec({0.25, -0.04}))).epsilon(1e-15));
  CHECK(discount_factor(vec({1, -0.1})) < 1.0);
  CHECK_THROWS_AS(discount_factor(vec({0, -1})), ValidationError);
  CHECK_THROWS_AS(discount_factor(vec({1, -1, 0})), ValidationError);
}

TEST_CASE("summaries") {
  AgentResult a;
  a.agent_id = "a";
  a.error_rate_ddm_rt = 0.0;
  a.error_rate_ddm_choice_only = 0.2;
  a.error_rate_lnr = 0.3;
  a.miscoverage = 0.25;
  a.discount_ratio = 1.2;
  a.discount_valid = true;
  const Summary one = summarize({a});
  CHECK(one.agents == 1);
  CHECK(one.error_rate_ddm_rt.mean == 0.0);
  CHECK(one.error_rate_ddm_choice_only.mean == 0.2);
  CHECK(one.error_rate_lnr.mean == 0.3);
  CHECK(one.miscoverage.mean == 0.25);
  CHECK(one.discount_ratio.mean == 1.2);

  AgentResult b = a;
  b.error_rate_ddm_rt = 0.1;
  b.discount_valid = false;
  const Summary two = summarize({a, b});
  CHECK(two.error_rate_ddm_rt.mean == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(two.discount_excluded == 1);
  CHECK(two.discount_ratio.count == 1);
  for (const Distribution* d : {&two.error_rate_ddm_rt, &two.miscoverage, &two.discount_ratio}) {
    for (std::size_t k = 1; k < d->cdf.size(); ++k) CHECK(d->cdf[k] >= d->cdf[k - 1]);
    CHECK(d->cdf.back() == 1.0);
    std::size_t total = 0;
    for (auto c : d->bin_counts) total += c;
    CHECK(total == d->count);
    CHECK(d->bin_edges.size() == d->bin_counts.size() + 1);
  }
  CHECK_THROWS_AS(summarize({}), ValidationError);
}

TEST_CASE("agent pipeline") {
  const auto pop = heterogeneous_population(3, 140, 17);
  const auto again = heterogeneous_population(3, 140, 17);
  REQUIRE(pop.size() == 3);
  CHECK(pop[0].agent_id == "agent_000");
  CHECK(pop[2].rows.back().t == again[2].rows.back().t);
  for (const auto& agent : pop) {
    CHECK(agent.truth.w[0] > 0.0);
    CHECK(agent.truth.w[1] < 0.0);
    const Dataset ds = build_dataset(agent.rows);
    const AgentResult r = evaluate_agent(agent.agent_id, ds, EvaluationOptions{});
    CHECK(r.n_train == 100);
    CHECK(r.n_test == 40);
    for (double f : {r.error_rate_ddm_rt, r.error_rate_ddm_choice_only, r.error_rate_lnr, r.miscoverage}) {
      CHECK(f >= 0.0);
      CHECK(f <= 1.0);
    }
    if (r.discount_valid) CHECK(r.discount_ratio == doctest::Approx(r.discount_ddm_rt / r.discount_choice_only));

    const AgentResult oracle = evaluate_agent(agent.agent_id, ds, EvaluationOptions{}, agent.truth);
    CHECK(oracle.b_hat == agent.truth.b);
    CHECK(oracle.discount_ratio == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(agent_name(7, 1000) == "agent_007");
  CHECK(agent_name(12, 5) == "agent_012");
}
