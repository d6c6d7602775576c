#pragma once
#include <memory>
#include <string>
#include <vector>

#include "fhjb/analytic.hpp"
#include "fhjb/dynamics.hpp"
#include "fhjb/grid.hpp"
#include "fhjb/hjb.hpp"

namespace fhjb {

// Fully resolved parameter set of one benchmark problem; defaults reproduce
// the three reference experiments (tracking with known optimum, two-control
// target steering, nonlinear stabilization).
struct TestConfig {
  std::string name = "test1";  // test1 | test2 | test3
  int d = 63;
  double s = 0.75;
  double alpha = 1.0;
  double gamma = 0.01;
  double lambda = 0.5;
  double T0 = 3.0;                              // test1 switch-off time
  double target_lo = -0.5, target_hi = 0.5;     // test2 target interval
  std::vector<std::pair<double, double>> U;     // control box per component
  int grid_controls = 7;    // per control component, grid generation
  int vi_controls = 21;     // per component, value iteration
  int synth_controls = 1681;  // total (per component for multi-input)
  double dt_bar = 0.0125;
  double dt_vi = 0.01;
  double dt_sim = 0.0125;
  double T_grid = 4.0;
  double T_sim = 4.0;
  bool theta_scan = true;
  double theta_min = 0.1, theta_max = 0.3, theta_step = 0.02;
  double theta_fixed = 0.2;  // used when theta_scan is false
  std::string scheme = "imex";  // imex | explicit
  double vi_tol = 1e-6;
  int scan_iters = 200;  // fixed sweep budget per theta during the scan
  int kernel_ell = 0;    // Wendland smoothness; 0 = dimension-based (dim/2 + 3)
};

TestConfig default_config(const std::string& name);
std::string config_to_json(const TestConfig& cfg);
TestConfig config_from_json(const std::string& text);
int vi_max_iter(const TestConfig& cfg);  // 10 * ceil(log tol / log(1-dt*lambda))

// Assembled problem: matrices, dynamics at the three step sizes, running
// cost, control grids, and (test 1) the transformed-variable helpers.
struct ProblemSetup {
  TestConfig cfg;
  FeMesh mesh;
  Mat M, A;
  std::vector<Vec> Q;
  Mat M_cost;  // M, or the target-restricted mass for test2
  AnalyticPair pair;
  Vec q_nodal;
  Vec x0;  // initial state (transformed variables for test1)
  std::shared_ptr<DiscreteDynamics> dyn_grid;  // at dt_bar
  std::shared_ptr<DiscreteDynamics> dyn_vi;    // at dt_vi
  CostFn cost;
  std::vector<Vec> grid_ctrls, vi_ctrls, synth_ctrls;

  // test1 only: nodal target state and the transform helpers.
  std::function<Vec(double)> y_d_nodal;  // empty unless test1
  Vec untransform(const Vec& x, double t) const {
    return y_d_nodal ? Vec(x + y_d_nodal(t)) : x;
  }

  std::shared_ptr<DiscreteDynamics> dynamics_at(double dt) const;
  // Original-variable dynamics (test1: forcing from the constructed data b
  // instead of the transformed right-hand side; identical otherwise).
  std::shared_ptr<DiscreteDynamics> dynamics_at_physical(double dt) const;
  Vec x0_physical() const { return y_d_nodal ? q_nodal : x0; }
  // State fed to the running cost / value function at time t.
  Vec transform(const Vec& y, double t) const {
    return y_d_nodal ? Vec(y - y_d_nodal(t)) : y;
  }
  FlowFn flow_of(const std::shared_ptr<DiscreteDynamics>& dyn) const;
  HjbProblem hjb_problem() const;  // at dt_vi, affine split populated
  FeedbackPolicy policy(const ScatteredGrid& grid, const Vec& values,
                        double sigma, double dt) const;
};

ProblemSetup make_problem(const TestConfig& cfg);

// Closed-loop run stepping the original (physical) dynamics; at each step the
// state is mapped to the solver's (transformed) frame to synthesize the
// feedback and accumulate the running cost.  For test2/test3 the transform is
// the identity.
SimResult simulate_feedback_physical(const ProblemSetup& ps,
                                     const ScatteredGrid& grid, const Vec& V,
                                     double sigma, double dt, double T,
                                     const Vec& y0, double noise_std,
                                     unsigned seed);

// Prescribed-control run stepped in the original variables (exercises the
// original discrete dynamics, including their time-discretization error).
SimResult simulate_control_physical(const ProblemSetup& ps,
                                    const std::function<Vec(double)>& control,
                                    double dt, double T, const Vec& y0,
                                    double noise_std, unsigned seed);

// Prescribed-control run stepped in the transformed variables, the same frame
// as simulate_feedback_physical; baseline for like-for-like cost comparisons.
SimResult simulate_control_transformed(const ProblemSetup& ps,
                                       const std::function<Vec(double)>& control,
                                       double dt, double T, const Vec& y0,
                                       double noise_std, unsigned seed);

// Partial sums J_k = sum_{i<k} dt e^{-lambda i dt} g(x_i, u_i).
std::vector<double> evaluate_cost_functional(const std::vector<Vec>& traj,
                                             const std::vector<Vec>& controls,
                                             const CostFn& cost, double lambda,
                                             double dt);

struct TableRow {
  double dt;
  double e_hjb_star;  // |y_HJB - y*|
  double e_hjb_u;     // |y_HJB - y(u*)|
  double e_star_u;    // |y* - y(u*)|
};

// Closed-loop runs of test1 at each dt against the analytic optimum and the
// exact-control replay, measured in the discounted space-time norm.
std::vector<TableRow> convergence_study(const ProblemSetup& ps,
                                        const ScatteredGrid& grid,
                                        const Vec& values, double sigma,
                                        const std::vector<double>& dts);

}  // namespace fhjb
