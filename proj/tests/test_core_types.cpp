#include <cmath>
#include <random>

#include "doctest.h"
#include "rtpref/errors.hpp"
#include "rtpref/types.hpp"

using namespace rtpref;

namespace {

Observation obs(std::initializer_list<double> x, std::initializer_list<double> y, int z, double t) {
  Vector vx(static_cast<Eigen::Index>(x.size()));
  Vector vy(static_cast<Eigen::Index>(y.size()));
  Eigen::Index i = 0;
  for (double v : x) vx[i++] = v;
  i = 0;
  for (double v : y) vy[i++] = v;
  return {vx, vy, z, t};
}

}  // namespace

TEST_CASE("build_dataset computes dimension and diameter") {
  const Dataset ds = build_dataset({obs({1, 0}, {0, 1}, 1, 0.5)});
  CHECK(ds.size() == 1);
  CHECK(ds.dim() == 2);
  CHECK(ds.diameter() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(ds.diff(0)[0] == 1.0);
  CHECK(ds.diff(0)[1] == -1.0);
}

TEST_CASE("diameter is attained by some row") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> n01;
  std::vector<Observation> rows;
  for (int i = 0; i < 30; ++i) rows.push_back(obs({n01(gen), n01(gen), n01(gen)}, {n01(gen), n01(gen), n01(gen)}, 1, 1.0));
  const Dataset ds = build_dataset(rows);
  double best = 0.0;
  for (const auto& r : rows) {
    const double nrm = (r.x - r.y).norm();
    CHECK(nrm <= ds.diameter());
    best = std::max(best, nrm);
  }
  CHECK(best == ds.diameter());
}

TEST_CASE("build_dataset rejects invalid rows with their index") {
  CHECK_THROWS_WITH_AS(build_dataset({}), "empty dataset", ValidationError);

  std::vector<Observation> rows(5, obs({1, 0}, {0, 1}, 1, 0.5));
  rows[3].z = 0;
  CHECK_THROWS_WITH_AS(build_dataset(rows), doctest::Contains("row 3"), ValidationError);

  rows[3].z = -1;
  rows[2].t = 0.0;
  CHECK_THROWS_WITH_AS(build_dataset(rows), doctest::Contains("row 2"), ValidationError);

  rows[2].t = 1.0;
  rows[4].y = Vector::Zero(3);
  CHECK_THROWS_WITH_AS(build_dataset(rows), doctest::Contains("row 4"), ValidationError);

  rows[4].y = Vector::Zero(2);
  rows[1].x[0] = NAN;
  CHECK_THROWS_WITH_AS(build_dataset(rows), doctest::Contains("row 1"), ValidationError);
}

TEST_CASE("empirical_sigma") {
  SUBCASE("single outer product") {
    const Matrix s = empirical_sigma(build_dataset({obs({1, 0}, {0, 0}, 1, 1)}));
    CHECK(s(0, 0) == 1.0);
    CHECK(s(0, 1) == 0.0);
    CHECK(s(1, 0) == 0.0);
    CHECK(s(1, 1) == 0.0);
  }
  SUBCASE("average of outer products") {
    const Matrix s = empirical_sigma(build_dataset({obs({1, 0}, {0, 0}, 1, 1), obs({0, 1}, {0, 0}, -1, 2)}));
    CHECK(s(0, 0) == 0.5);
    CHECK(s(1, 1) == 0.5);
    CHECK(s(0, 1) == 0.0);
  }
  SUBCASE("matches direct summation and is PSD") {
    std::mt19937_64 gen(11);
    std::normal_distribution<double> n01;
    std::vector<Observation> rows;
    for (int i = 0; i < 5; ++i) rows.push_back(obs({n01(gen), n01(gen), n01(gen)}, {n01(gen), n01(gen), n01(gen)}, 1, 1));
    const Matrix s = empirical_sigma(build_dataset(rows));
    for (int a = 0; a < 3; ++a) {
      for (int c = 0; c < 3; ++c) {
        double direct = 0.0;
        for (const auto& r : rows) direct += (r.x[a] - r.y[a]) * (r.x[c] - r.y[c]);
        direct /= 5.0;
        CHECK(std::abs(s(a, c) - direct) < 1e-12);
        CHECK(s(a, c) == s(c, a));
      }
    }
    for (int k = 0; k < 100; ++k) {
      const Vector v = Vector::NullaryExpr(3, [&] { return n01(gen); });
      CHECK(v.dot(s * v) >= 0.0);
    }
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("slices keep order") {
  std::vector<Observation> rows;
  for (int i = 0; i < 6; ++i) rows.push_back(obs({double(i)}, {0}, 1, 1.0 + i));
  const Dataset ds = build_dataset(rows);
  const Dataset mid = ds.slice(2, 5);
  REQUIRE(mid.size() == 3);
  CHECK(mid[0].t == 3.0);
  CHECK(mid[2].t == 5.0);
  CHECK(mid.diameter() == 4.0);
  CHECK_THROWS_AS(ds.slice(3, 3), ValidationError);
  CHECK_THROWS_AS(ds.slice(0, 7), ValidationError);
}

TEST_CASE("parameter validation") {
  DdmParams ddm{Vector::Ones(2), 0.0};
  CHECK_THROWS_AS(ddm.validate(), ValidationError);
  ddm.b = 1.0;
  CHECK_NOTHROW(ddm.validate());
  CHECK(ddm.drift(Vector::Ones(2), Vector::Zero(2)) == 2.0);

  LnrParams lnr{Vector::Ones(2), 0.0, 1.0};
  CHECK_THROWS_AS(lnr.validate(), ValidationError);
  lnr.rho = -0.99;
  CHECK_NOTHROW(lnr.validate());
}
