#include <doctest.h>

#include <cmath>
#include <random>

#include "fhjb/shepard.hpp"

using namespace fhjb;

TEST_CASE("wendland kernel closed-form values") {
  CHECK(wendland_ell(1) == 3);
  CHECK(wendland_ell(2) == 4);
  CHECK(wendland_ell(63) == 34);
  WendlandKernel k{3, 1.0};
  CHECK(wendland_eval(k, 0.0) == doctest::Approx(3.0));
  // (1-0.5)^5 (24*0.25 + 15*0.5 + 3) = 0.03125 * 16.5
  CHECK(wendland_eval(k, 0.5) == doctest::Approx(0.515625));
  CHECK(wendland_eval(k, 1.0) == 0.0);
  CHECK(wendland_eval(k, 1.7) == 0.0);
  WendlandKernel k2{3, 4.0};
  CHECK(wendland_eval(k2, 0.3) ==
        doctest::Approx(wendland_eval(k, 1.2)));  // scale in sigma*r
  // monotone decreasing on [0, 1/sigma]
  double prev = wendland_eval(k, 0.0);
  for (double r = 0.05; r <= 1.0; r += 0.05) {
    double v = wendland_eval(k, r);
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("shepard reproduces constants and stays in the value hull") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  int N = 60, dim = 3;
  Mat nodes(N, dim);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < dim; ++j) nodes(i, j) = ud(rng);
  ShepardInterpolant itp;
  itp.nodes = &nodes;
  itp.kernel = {wendland_ell(dim), 1.0 / 0.8};

  itp.values = Vec::Constant(N, 2.5);
  for (int q = 0; q < 200; ++q) {
    Vec x(dim);
    for (int j = 0; j < dim; ++j) x(j) = ud(rng);
    CHECK(shepard_eval(itp, x) == doctest::Approx(2.5).epsilon(1e-12));
  }

  for (int i = 0; i < N; ++i) itp.values(i) = ud(rng);
  double lo = itp.values.minCoeff(), hi = itp.values.maxCoeff();
  for (int q = 0; q < 200; ++q) {
    Vec x(dim);
    for (int j = 0; j < dim; ++j) x(j) = 2.0 * ud(rng);
    double v = shepard_eval(itp, x);
    CHECK(v >= lo - 1e-12);
    CHECK(v <= hi + 1e-12);
  }
}

TEST_CASE("two equidistant nodes average; far query falls back to nearest") {
  Mat nodes(2, 1);
  nodes << -0.5, 0.5;
  ShepardInterpolant itp;
  itp.nodes = &nodes;
  itp.values = Vec(2);
  itp.values << 1.0, 3.0;
  itp.kernel = {3, 1.0 / 2.0};
  CHECK(shepard_eval(itp, Vec::Zero(1)) == doctest::Approx(2.0));
  // outside every support ball: nearest-node fallback
  Vec far = Vec::Constant(1, 50.0);
  CHECK(shepard_eval(itp, far) == 3.0);
  Vec farneg = Vec::Constant(1, -50.0);
  CHECK(shepard_eval(itp, farneg) == 1.0);
}

TEST_CASE("locality: nodes outside the support radius do not matter") {
  Mat nodes(3, 1);
  nodes << 0.0, 0.1, 10.0;
  ShepardInterpolant itp;
  itp.nodes = &nodes;
  itp.values = Vec(3);
  itp.values << 1.0, 2.0, 1e6;
  itp.kernel = {3, 1.0 / 0.5};
  double v = shepard_eval(itp, Vec::Constant(1, 0.05));
  Mat near = nodes.topRows(2);
  ShepardInterpolant itp2{&near, itp.values.head(2), itp.kernel};
  CHECK(v == shepard_eval(itp2, Vec::Constant(1, 0.05)));
}

TEST_CASE("monotonicity: pointwise larger data gives larger interpolant") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  int N = 30;
  Mat nodes(N, 2);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < 2; ++j) nodes(i, j) = ud(rng);
  ShepardInterpolant a{&nodes, Vec(N), {wendland_ell(2), 1.0 / 0.7}};
  for (int i = 0; i < N; ++i) a.values(i) = ud(rng);
  ShepardInterpolant b = a;
  for (int i = 0; i < N; ++i) b.values(i) += std::abs(ud(rng));
  for (int q = 0; q < 100; ++q) {
    Vec x(2);
    x << ud(rng), ud(rng);
    CHECK(shepard_eval(b, x) >= shepard_eval(a, x) - 1e-12);
  }
}

TEST_CASE("batch evaluation matches scalar evaluation bitwise") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  int N = 45, dim = 2;
  Mat nodes(N, dim);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < dim; ++j) nodes(i, j) = ud(rng);
  ShepardInterpolant itp{&nodes, Vec(N), {wendland_ell(dim), 1.0 / 0.6}};
  for (int i = 0; i < N; ++i) itp.values(i) = ud(rng);
  Mat queries(80, dim);
  for (int i = 0; i < 80; ++i)
    for (int j = 0; j < dim; ++j) queries(i, j) = 1.5 * ud(rng);
  Vec batch = shepard_eval_batch(itp, queries);
  for (int i = 0; i < 80; ++i) {
    CHECK(batch(i) == shepard_eval(itp, Vec(queries.row(i).transpose())));
  }
}
