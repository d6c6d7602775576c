#include <doctest.h>

#include <cmath>

#include "fhjb/problems.hpp"

using namespace fhjb;

TEST_CASE("default configs carry the reference parameters") {
  TestConfig c1 = default_config("test1");
  CHECK(c1.d == 63);
  CHECK(c1.s == 0.75);
  CHECK(c1.alpha == 1.0);
  CHECK(c1.gamma == 0.01);
  CHECK(c1.lambda == 0.5);
  CHECK(c1.T0 == 3.0);
  REQUIRE(c1.U.size() == 1);
  CHECK(c1.U[0].first == 0.0);
  CHECK(c1.U[0].second == 1.0);
  CHECK(c1.grid_controls == 7);
  CHECK(c1.vi_controls == 21);
  CHECK(c1.synth_controls == 1681);
  CHECK(c1.dt_bar == 0.0125);
  CHECK(c1.dt_vi == 0.01);
  CHECK(c1.dt_sim == 0.0125);
  CHECK(c1.T_grid == 4.0);
  CHECK(c1.T_sim == 4.0);
  CHECK(c1.theta_scan);
  CHECK(c1.theta_min == 0.1);
  CHECK(c1.theta_max == 0.3);
  CHECK(c1.theta_step == 0.02);

  TestConfig c2 = default_config("test2");
  REQUIRE(c2.U.size() == 2);
  CHECK(c2.U[0].first == -0.5);
  CHECK(c2.U[0].second == 0.0);
  CHECK(c2.grid_controls == 5);
  CHECK(c2.synth_controls == 41);
  CHECK(c2.dt_bar == 0.025);
  CHECK(c2.T_grid == 6.0);
  CHECK(c2.T_sim == 10.0);
  CHECK(!c2.theta_scan);
  CHECK(c2.theta_fixed == 0.01);

  TestConfig c3 = default_config("test3");
  CHECK(c3.alpha == 0.01);
  REQUIRE(c3.U.size() == 1);
  CHECK(c3.U[0].first == -0.5);
  CHECK(c3.U[0].second == 0.0);
  CHECK(c3.grid_controls == 11);
  CHECK(c3.synth_controls == 81);
  CHECK(c3.theta_min == 0.08);
  CHECK(c3.theta_max == 0.12);
  CHECK(c3.theta_step == 0.01);

  CHECK_THROWS_AS(default_config("test9"), std::invalid_argument);
}

TEST_CASE("config json round trip and overrides") {
  TestConfig c = default_config("test3");
  c.d = 31;
  c.theta_fixed = 0.11;
  TestConfig r = config_from_json(config_to_json(c));
  CHECK(r.name == c.name);
  CHECK(r.d == 31);
  CHECK(r.alpha == c.alpha);
  CHECK(r.theta_fixed == 0.11);
  CHECK(r.U == c.U);
  CHECK(r.scan_iters == c.scan_iters);

  TestConfig o = config_from_json(R"({"name":"test1","d":15,"T_grid":0.5})");
  CHECK(o.d == 15);
  CHECK(o.T_grid == 0.5);
  CHECK(o.gamma == 0.01);  // untouched default
}

TEST_CASE("make_problem: control grids and initial states") {
  TestConfig cfg = default_config("test1");
  cfg.d = 15;
  ProblemSetup ps = make_problem(cfg);
  CHECK((int)ps.grid_ctrls.size() == 7);
  CHECK(ps.grid_ctrls.front()(0) == 0.0);
  CHECK(ps.grid_ctrls.back()(0) == 1.0);
  CHECK((int)ps.vi_ctrls.size() == 21);
  CHECK((int)ps.synth_ctrls.size() == 1681);
  // transformed initial state and the inverse map
  Vec x0p = ps.x0_physical();
  CHECK((x0p - ps.q_nodal).cwiseAbs().maxCoeff() == 0.0);
  CHECK((ps.transform(x0p, 0.0) - ps.x0).cwiseAbs().maxCoeff() == 0.0);
  Vec back = ps.untransform(ps.x0, 0.0);
  CHECK((back - x0p).cwiseAbs().maxCoeff() < 1e-15);

  TestConfig cfg2 = default_config("test2");
  cfg2.d = 15;
  ProblemSetup ps2 = make_problem(cfg2);
  CHECK((int)ps2.vi_ctrls.size() == 25);    // 5 x 5 pairs
  CHECK((int)ps2.synth_ctrls.size() == 1681);  // 41 x 41 pairs
  CHECK(ps2.Q.size() == 2);
  CHECK(ps2.x0.cwiseAbs().maxCoeff() == 0.0);

  TestConfig cfg3 = default_config("test3");
  cfg3.d = 15;
  ProblemSetup ps3 = make_problem(cfg3);
  CHECK((ps3.x0 - ps3.q_nodal).cwiseAbs().maxCoeff() == 0.0);
  CHECK((int)ps3.synth_ctrls.size() == 81);
}

TEST_CASE("test2 cost only sees the target window plus control effort") {
  TestConfig cfg = default_config("test2");
  cfg.d = 31;
  ProblemSetup ps = make_problem(cfg);
  Vec x = Vec::Zero(31);
  for (int i = 0; i < 31; ++i)
    if (ps.mesh.node(i) > 0.8) x(i) = 5.0;  // outside (-0.5, 0.5)
  Vec u = Vec::Zero(2);
  CHECK(ps.cost(x, u) == doctest::Approx(0.0));
  Vec u2(2);
  u2 << -0.5, -0.5;
  CHECK(ps.cost(x, u2) ==
        doctest::Approx(0.5 * cfg.gamma * 0.25 * 0.5));
}

TEST_CASE("transformed dynamics hold the constructed optimum") {
  // under u = u_d the transformed state started at the exact transformed
  // optimum x*(t) = y*(t) - y_d(t) stays within O(dt) of it
  TestConfig cfg = default_config("test1");
  cfg.d = 31;
  ProblemSetup ps = make_problem(cfg);
  AnalyticPair pr = ps.pair;
  double dt = 0.0125;
  SimResult r = simulate_control_transformed(
      ps, [pr](double t) { return Vec(Vec::Constant(1, pr.u_d(t))); }, dt, 4.0,
      ps.x0_physical(), 0.0, 0);
  for (size_t k = 0; k < r.traj.size(); ++k) {
    double t = k * dt;
    Vec y_star = pr.phi(t) * ps.q_nodal;
    double err = (r.traj[k] - y_star).cwiseAbs().maxCoeff();
    CHECK(err < 0.02);  // transformed replay integrates y_d exactly
  }
}

TEST_CASE("cost functional partial sums form the discounted series") {
  CostFn c = [](const Vec&, const Vec&) { return 2.0; };
  std::vector<Vec> traj(6, Vec::Zero(1));
  std::vector<Vec> ctrl(5, Vec::Zero(1));
  std::vector<double> J = evaluate_cost_functional(traj, ctrl, c, 0.5, 0.1);
  REQUIRE(J.size() == 6);
  CHECK(J[0] == 0.0);
  double expect = 0.0;
  for (int i = 0; i < 5; ++i) expect += 0.1 * std::exp(-0.5 * i * 0.1) * 2.0;
  CHECK(J[5] == doctest::Approx(expect).epsilon(1e-12));
  for (size_t k = 1; k < J.size(); ++k) CHECK(J[k] >= J[k - 1]);
}

TEST_CASE("convergence study requires the analytic pair") {
  TestConfig cfg = default_config("test3");
  cfg.d = 15;
  ProblemSetup ps = make_problem(cfg);
  ScatteredGrid g;
  g.points = Mat::Zero(1, 15);
  g.prov = {Provenance{1, 1, 1}};
  g.h_min = g.h_scale = 1.0;
  CHECK_THROWS_AS(
      convergence_study(ps, g, Vec::Zero(1), 1.0, {0.05}),
      std::invalid_argument);
}
