#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <random>

#include "fhjb/grid.hpp"

using namespace fhjb;

namespace {

// toy linear flow in R^2: contraction toward the control point
FlowFn toy_flow() {
  return [](const Vec& x, const Vec& u, double) {
    return Vec(0.5 * x + Vec::Constant(x.size(), u(0)));
  };
}

}  // namespace

TEST_CASE("identity flow collapses to the initial point") {
  GridSpec spec;
  spec.initial_states = {Vec::Constant(2, 0.3)};
  spec.control_samples = {Vec::Zero(1), Vec::Ones(1)};
  spec.dt_bar = 0.1;
  spec.K_bar = 10;
  FlowFn id = [](const Vec& x, const Vec&, double) { return x; };
  ScatteredGrid g = generate_grid(spec, id);
  CHECK(g.size() == 1);
  CHECK(g.points(0, 0) == 0.3);
  CHECK(g.prov[0].i == 1);
  CHECK(g.prov[0].j == 1);
  CHECK(g.prov[0].k == 1);
}

TEST_CASE("two-step trajectories and provenance") {
  GridSpec spec;
  spec.initial_states = {Vec::Zero(2)};
  spec.control_samples = {Vec::Constant(1, 1.0), Vec::Constant(1, 2.0)};
  spec.dt_bar = 0.1;
  spec.K_bar = 2;
  ScatteredGrid g = generate_grid(spec, toy_flow());
  // start shared, one distinct successor per control
  CHECK(g.size() == 3);
  CHECK(g.points.row(1) == Mat::Constant(1, 2, 1.0));
  CHECK(g.points.row(2) == Mat::Constant(1, 2, 2.0));
  CHECK(g.prov[1].j == 1);
  CHECK(g.prov[2].j == 2);
  CHECK(g.prov[1].k == 2);
  CHECK(g.node_time(1) == doctest::Approx(0.1));
  CHECK(g.node_time(0) == 0.0);
}

TEST_CASE("generation is deterministic (bitwise)") {
  GridSpec spec;
  spec.initial_states = {Vec::Zero(3)};
  spec.control_samples = {Vec::Constant(1, 0.2), Vec::Constant(1, -0.7),
                          Vec::Constant(1, 1.3)};
  spec.dt_bar = 0.05;
  spec.K_bar = 40;
  ScatteredGrid g1 = generate_grid(spec, toy_flow());
  ScatteredGrid g2 = generate_grid(spec, toy_flow());
  REQUIRE(g1.size() == g2.size());
  CHECK((g1.points - g2.points).cwiseAbs().maxCoeff() == 0.0);
  for (int n = 0; n < g1.size(); ++n) {
    CHECK(g1.prov[n].i == g2.prov[n].i);
    CHECK(g1.prov[n].j == g2.prov[n].j);
    CHECK(g1.prov[n].k == g2.prov[n].k);
  }
}

TEST_CASE("provenance replays each node from its trajectory") {
  GridSpec spec;
  spec.initial_states = {Vec::Constant(2, 0.1), Vec::Constant(2, -0.4)};
  spec.control_samples = {Vec::Constant(1, 0.3), Vec::Constant(1, 0.9)};
  spec.dt_bar = 0.05;
  spec.K_bar = 15;
  FlowFn flow = toy_flow();
  ScatteredGrid g = generate_grid(spec, flow);
  for (int n = 0; n < g.size(); ++n) {
    Vec x = spec.initial_states[g.prov[n].i - 1];
    const Vec& u = spec.control_samples[g.prov[n].j - 1];
    for (int k = 1; k < g.prov[n].k; ++k)
      x = flow(x, u, (k - 1) * spec.dt_bar);
    CHECK((x.transpose() - g.points.row(n)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("separation distance") {
  Mat pts(2, 3);
  pts << 0, 0, 0, 0.5, 0, 0;
  CHECK(separation_distance(pts) == doctest::Approx(0.5));

  // permutation invariance
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  Mat cloud(40, 3);
  for (int i = 0; i < cloud.size(); ++i) cloud(i / 3, i % 3) = nd(rng);
  double ref = separation_distance(cloud);
  std::vector<int> perm(40);
  for (int i = 0; i < 40; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  Mat shuffled(40, 3);
  for (int i = 0; i < 40; ++i) shuffled.row(i) = cloud.row(perm[i]);
  CHECK(separation_distance(shuffled) == ref);
}

TEST_CASE("spacing scale is the 75th percentile of step lengths") {
  std::vector<double> steps{4, 1, 3, 2};  // sorted 1 2 3 4, p75 = 3.25
  CHECK(spacing_scale(steps) == doctest::Approx(3.25));
  std::vector<double> one{0.7};
  CHECK(spacing_scale(one) == doctest::Approx(0.7));
}

TEST_CASE("grid csv round trip is bitwise") {
  GridSpec spec;
  spec.initial_states = {Vec::Constant(2, 0.123456789012345)};
  spec.control_samples = {Vec::Constant(1, 1.0 / 3.0),
                          Vec::Constant(1, -2.0 / 7.0)};
  spec.dt_bar = 0.05;
  spec.K_bar = 25;
  ScatteredGrid g = generate_grid(spec, toy_flow());
  std::string pp = "grid_test_points.csv", vp = "grid_test_prov.csv";
  write_grid_csv(g, pp, vp);
  ScatteredGrid r = read_grid_csv(pp, vp, g.dt_bar, g.h_scale);
  REQUIRE(r.size() == g.size());
  CHECK((r.points - g.points).cwiseAbs().maxCoeff() == 0.0);
  for (int n = 0; n < g.size(); ++n) {
    CHECK(r.prov[n].i == g.prov[n].i);
    CHECK(r.prov[n].j == g.prov[n].j);
    CHECK(r.prov[n].k == g.prov[n].k);
  }
  std::remove(pp.c_str());
  std::remove(vp.c_str());
}
