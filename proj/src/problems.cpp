#include "fhjb/problems.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace fhjb {

using nlohmann::json;

TestConfig default_config(const std::string& name) {
  TestConfig c;
  c.name = name;
  if (name == "test1") {
    c.U = {{0.0, 1.0}};
    // Low-smoothness kernel: the feedback argmin needs the interpolant to
    // blend several nodes; sharper kernels degenerate to nearest-neighbor
    // and the synthesized control undershoots.
    c.kernel_ell = 1;
    c.scan_iters = 60;
  } else if (name == "test2") {
    c.gamma = 1e-6;
    c.U = {{-0.5, 0.0}, {-0.5, 0.0}};
    c.grid_controls = 5;
    c.vi_controls = 5;
    c.synth_controls = 41;  // per component: 41 x 41 pairs
    c.dt_bar = 0.025;
    c.dt_sim = 0.025;
    c.T_grid = 6.0;
    c.T_sim = 10.0;
    c.theta_scan = false;
    c.theta_fixed = 0.01;
  } else if (name == "test3") {
    c.alpha = 0.01;
    c.U = {{-0.5, 0.0}};
    c.grid_controls = 11;
    c.vi_controls = 21;
    c.synth_controls = 81;
    c.dt_bar = 0.025;
    c.dt_sim = 0.025;
    c.T_grid = 6.0;
    c.T_sim = 6.0;
    c.theta_min = 0.08;
    c.theta_max = 0.12;
    c.theta_step = 0.01;
    c.theta_fixed = 0.09;
    c.scan_iters = 40;
  } else {
    throw std::invalid_argument("default_config: unknown test '" + name + "'");
  }
  return c;
}

std::string config_to_json(const TestConfig& c) {
  json j;
  j["name"] = c.name;
  j["d"] = c.d;
  j["s"] = c.s;
  j["alpha"] = c.alpha;
  j["gamma"] = c.gamma;
  j["lambda"] = c.lambda;
  j["T0"] = c.T0;
  j["target"] = {c.target_lo, c.target_hi};
  j["U"] = json::array();
  for (auto& [lo, hi] : c.U) j["U"].push_back({lo, hi});
  j["grid_controls"] = c.grid_controls;
  j["vi_controls"] = c.vi_controls;
  j["synth_controls"] = c.synth_controls;
  j["dt_bar"] = c.dt_bar;
  j["dt_vi"] = c.dt_vi;
  j["dt_sim"] = c.dt_sim;
  j["T_grid"] = c.T_grid;
  j["T_sim"] = c.T_sim;
  j["theta_scan"] = c.theta_scan;
  j["theta_min"] = c.theta_min;
  j["theta_max"] = c.theta_max;
  j["theta_step"] = c.theta_step;
  j["theta_fixed"] = c.theta_fixed;
  j["scheme"] = c.scheme;
  j["vi_tol"] = c.vi_tol;
  j["scan_iters"] = c.scan_iters;
  j["kernel_ell"] = c.kernel_ell;
  return j.dump(2);
}

TestConfig config_from_json(const std::string& text) {
  json j = json::parse(text);
  TestConfig c = default_config(j.at("name").get<std::string>());
  auto opt = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  opt("d", c.d);
  opt("s", c.s);
  opt("alpha", c.alpha);
  opt("gamma", c.gamma);
  opt("lambda", c.lambda);
  opt("T0", c.T0);
  if (j.contains("target")) {
    c.target_lo = j["target"][0];
    c.target_hi = j["target"][1];
  }
  if (j.contains("U")) {
    c.U.clear();
    for (auto& box : j["U"]) c.U.emplace_back(box[0], box[1]);
  }
  opt("grid_controls", c.grid_controls);
  opt("vi_controls", c.vi_controls);
  opt("synth_controls", c.synth_controls);
  opt("dt_bar", c.dt_bar);
  opt("dt_vi", c.dt_vi);
  opt("dt_sim", c.dt_sim);
  opt("T_grid", c.T_grid);
  opt("T_sim", c.T_sim);
  opt("theta_scan", c.theta_scan);
  opt("theta_min", c.theta_min);
  opt("theta_max", c.theta_max);
  opt("theta_step", c.theta_step);
  opt("theta_fixed", c.theta_fixed);
  opt("scheme", c.scheme);
  opt("vi_tol", c.vi_tol);
  opt("scan_iters", c.scan_iters);
  opt("kernel_ell", c.kernel_ell);
  return c;
}

int vi_max_iter(const TestConfig& cfg) {
  double q = 1.0 - cfg.dt_vi * cfg.lambda;
  return 10 * static_cast<int>(std::ceil(std::log(cfg.vi_tol) / std::log(q)));
}

namespace {

std::vector<Vec> control_box_grid(const std::vector<std::pair<double, double>>& U,
                                  int per_dim) {
  // Cartesian product of per_dim uniform samples per component; the last
  // component varies fastest and indices increase lexicographically.
  const int m = static_cast<int>(U.size());
  std::vector<Vec> out;
  std::vector<int> idx(m, 0);
  while (true) {
    Vec u(m);
    for (int k = 0; k < m; ++k) {
      auto [lo, hi] = U[k];
      u(k) = per_dim == 1 ? lo : lo + (hi - lo) * idx[k] / (per_dim - 1);
    }
    out.push_back(u);
    int k = m - 1;
    while (k >= 0 && ++idx[k] == per_dim) idx[k--] = 0;
    if (k < 0) break;
  }
  return out;
}

}  // namespace

std::shared_ptr<DiscreteDynamics> ProblemSetup::dynamics_at(double dt) const {
  Scheme sc = cfg.scheme == "explicit" ? Scheme::ExplicitEuler : Scheme::ImexEuler;
  // The cubic reaction enters through its Galerkin load vector (the stated
  // componentwise form, unweighted by the mass matrix, makes the reaction
  // ~1/h stronger than the admissible controls and the system uncontrollable).
  Nonlinearity nl =
      cfg.name == "test3" ? Nonlinearity::CubicGalerkin : Nonlinearity::None;
  std::function<Vec(double)> forcing;
  if (cfg.name == "test1") {
    // Transformed-variable forcing B(t) - M y_d'(t) - A y_d(t).
    Mat Mc = M, Ac = A;
    Vec qv = q_nodal;
    Vec Lq = Q[0];
    double h = mesh.h;
    double bt = pair.b_tilde();
    AnalyticPair pr = pair;
    int dd = cfg.d;
    forcing = [Mc, Ac, qv, Lq, h, bt, pr, dd](double t) {
      Vec Lbt = Vec::Constant(dd, bt * h);
      Vec B = pr.phi_dot(t) * Lq + pr.phi(t) * Lbt - pr.u_d(t) * Lq;
      Vec yd = pr.phi(t) * qv - pr.gamma * pr.kappa_dot(t) * qv +
               Vec::Constant(dd, pr.gamma * pr.kappa(t) * bt) +
               pr.lambda * pr.gamma * pr.kappa(t) * qv;
      Vec ydd = pr.phi_dot(t) * qv - pr.gamma * pr.kappa_ddot(t) * qv +
                Vec::Constant(dd, pr.gamma * pr.kappa_dot(t) * bt) +
                pr.lambda * pr.gamma * pr.kappa_dot(t) * qv;
      return Vec(B - Mc * ydd - Ac * yd);
    };
  } else if (cfg.name == "test2") {
    Vec Lb = assemble_load_indicator(mesh, -1.0, -0.75);
    forcing = [Lb](double t) { return Vec((1.0 - std::cos(t)) * Lb); };
  } else {
    int dd = cfg.d;
    forcing = [dd](double) { return Vec(Vec::Zero(dd)); };
  }
  return std::make_shared<DiscreteDynamics>(mesh, M, A, cfg.alpha, Q, nl,
                                            forcing, sc, dt);
}

std::shared_ptr<DiscreteDynamics> ProblemSetup::dynamics_at_physical(
    double dt) const {
  if (cfg.name != "test1") return dynamics_at(dt);
  Scheme sc = cfg.scheme == "explicit" ? Scheme::ExplicitEuler : Scheme::ImexEuler;
  Vec Lq = Q[0];
  double h = mesh.h;
  double bt = pair.b_tilde();
  AnalyticPair pr = pair;
  int dd = cfg.d;
  auto forcing = [Lq, h, bt, pr, dd](double t) {
    Vec Lbt = Vec::Constant(dd, bt * h);
    return Vec(pr.phi_dot(t) * Lq + pr.phi(t) * Lbt - pr.u_d(t) * Lq);
  };
  return std::make_shared<DiscreteDynamics>(mesh, M, A, cfg.alpha, Q,
                                            Nonlinearity::None, forcing, sc, dt);
}

FlowFn ProblemSetup::flow_of(const std::shared_ptr<DiscreteDynamics>& dyn) const {
  return [dyn](const Vec& x, const Vec& u, double t) { return dyn->step(x, u, t); };
}

HjbProblem ProblemSetup::hjb_problem() const {
  HjbProblem p;
  p.flow = flow_of(dyn_vi);
  p.cost = cost;
  p.lambda = cfg.lambda;
  p.control_grid = vi_ctrls;
  p.dt = cfg.dt_vi;
  auto dyn = dyn_vi;
  p.flow_base = [dyn](const Vec& x, double t) { return dyn->step_base(x, t); };
  for (int k = 0; k < dyn->num_controls(); ++k)
    p.flow_dirs.push_back(dyn->control_dir(k));
  p.ell = cfg.kernel_ell;
  return p;
}

FeedbackPolicy ProblemSetup::policy(const ScatteredGrid& grid, const Vec& values,
                                    double sigma, double dt) const {
  FeedbackPolicy pol;
  pol.grid = &grid;
  pol.values = values;
  pol.sigma = sigma;
  pol.synth_controls = synth_ctrls;
  pol.dt = dt;
  pol.lambda = cfg.lambda;
  auto dyn = dynamics_at(dt);
  pol.flow = flow_of(dyn);
  pol.cost = cost;
  pol.flow_base = [dyn](const Vec& x, double t) { return dyn->step_base(x, t); };
  for (int k = 0; k < dyn->num_controls(); ++k)
    pol.flow_dirs.push_back(dyn->control_dir(k));
  pol.ell = cfg.kernel_ell;
  return pol;
}

ProblemSetup make_problem(const TestConfig& cfg) {
  ProblemSetup ps;
  ps.cfg = cfg;
  ps.mesh = build_mesh(cfg.d, -1.0, 1.0);
  ps.M = assemble_mass(ps.mesh);
  ps.A = assemble_fractional_stiffness(ps.mesh, cfg.s);
  ps.pair = analytic_pair(cfg.s, cfg.T0, cfg.gamma, cfg.lambda,
                          cfg.name == "test1" ? cfg.U[0].first : 0.0,
                          cfg.name == "test1" ? cfg.U[0].second : 1.0);
  ps.q_nodal = Vec(cfg.d);
  for (int i = 0; i < cfg.d; ++i)
    ps.q_nodal(i) = ps.pair.q(ps.mesh.node(i));

  if (cfg.name == "test2") {
    ps.Q.push_back(assemble_load_indicator(ps.mesh, -0.75, -0.5));
    ps.Q.push_back(assemble_load_indicator(ps.mesh, 0.5, 0.75));
    ps.M_cost = assemble_target_mass(ps.mesh, cfg.target_lo, cfg.target_hi);
    ps.x0 = Vec::Zero(cfg.d);
    Mat MT = ps.M_cost;
    double gamma = cfg.gamma;
    // |u1 q1 + u2 q2|^2 = (u1^2 + u2^2)/4 for the disjoint unit indicators.
    ps.cost = [MT, gamma](const Vec& x, const Vec& u) {
      return 0.5 * (x.dot(MT * x) +
                    gamma * 0.25 * (u(0) * u(0) + u(1) * u(1)));
    };
  } else {
    AnalyticPair pr = ps.pair;
    ps.Q.push_back(assemble_load(ps.mesh, [pr](double x) { return pr.q(x); }));
    ps.M_cost = ps.M;
    Mat Mm = ps.M;
    double gamma = cfg.gamma;
    ps.cost = [Mm, gamma](const Vec& x, const Vec& u) {
      return 0.5 * (x.dot(Mm * x) + gamma * u(0) * u(0));  // |q|_L2 = 1
    };
    if (cfg.name == "test1") {
      Vec qv = ps.q_nodal;
      AnalyticPair p2 = ps.pair;
      int dd = cfg.d;
      double bt = p2.b_tilde();
      ps.y_d_nodal = [qv, p2, dd, bt](double t) {
        return Vec(p2.phi(t) * qv - p2.gamma * p2.kappa_dot(t) * qv +
                   Vec::Constant(dd, p2.gamma * p2.kappa(t) * bt) +
                   p2.lambda * p2.gamma * p2.kappa(t) * qv);
      };
      ps.x0 = ps.q_nodal - ps.y_d_nodal(0.0);
    } else {
      ps.x0 = ps.q_nodal;
    }
  }

  ps.grid_ctrls = control_box_grid(cfg.U, cfg.grid_controls);
  ps.vi_ctrls = control_box_grid(cfg.U, cfg.vi_controls);
  ps.synth_ctrls = control_box_grid(cfg.U, cfg.synth_controls);
  ps.dyn_grid = ps.dynamics_at(cfg.dt_bar);
  ps.dyn_vi = ps.dynamics_at(cfg.dt_vi);
  return ps;
}

SimResult simulate_feedback_physical(const ProblemSetup& ps,
                                     const ScatteredGrid& grid, const Vec& V,
                                     double sigma, double dt, double T,
                                     const Vec& y0, double noise_std,
                                     unsigned seed) {
  // The loop steps the original (physical) system; the feedback and the
  // running cost are evaluated on the transformed state, the frame the value
  // function was trained on.  For test2/test3 the map is the identity.
  FeedbackPolicy pol = ps.policy(grid, V, sigma, dt);
  auto dyn = ps.dynamics_at_physical(dt);
  SimResult res;
  const int L = static_cast<int>(std::lround(T / dt));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, noise_std > 0 ? noise_std : 1.0);
  Vec y = y0;
  res.traj.push_back(y);
  res.cost.push_back(0.0);
  double J = 0.0;
  for (int i = 0; i < L; ++i) {
    double t = i * dt;
    Vec x = ps.transform(y, t);
    Vec u = synthesize_feedback(pol, x, t);
    J += dt * std::exp(-ps.cfg.lambda * t) * ps.cost(x, u);
    y = dyn->step(y, u, t);
    if (noise_std > 0)
      for (Eigen::Index c = 0; c < y.size(); ++c) y(c) += dist(rng);
    res.traj.push_back(y);
    res.controls.push_back(u);
    res.cost.push_back(J);
  }
  return res;
}

SimResult simulate_control_physical(const ProblemSetup& ps,
                                    const std::function<Vec(double)>& control,
                                    double dt, double T, const Vec& y0,
                                    double noise_std, unsigned seed) {
  auto dyn = ps.dynamics_at_physical(dt);
  SimResult res;
  const int L = static_cast<int>(std::lround(T / dt));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, noise_std > 0 ? noise_std : 1.0);
  Vec y = y0;
  res.traj.push_back(y);
  res.cost.push_back(0.0);
  double J = 0.0;
  for (int i = 0; i < L; ++i) {
    double t = i * dt;
    Vec u = control(t);
    J += dt * std::exp(-ps.cfg.lambda * t) * ps.cost(ps.transform(y, t), u);
    y = dyn->step(y, u, t);
    if (noise_std > 0)
      for (Eigen::Index c = 0; c < y.size(); ++c) y(c) += dist(rng);
    res.traj.push_back(y);
    res.controls.push_back(u);
    res.cost.push_back(J);
  }
  return res;
}

SimResult simulate_control_transformed(const ProblemSetup& ps,
                                       const std::function<Vec(double)>& control,
                                       double dt, double T, const Vec& y0,
                                       double noise_std, unsigned seed) {
  auto dyn = ps.dynamics_at(dt);
  SimResult res;
  const int L = static_cast<int>(std::lround(T / dt));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, noise_std > 0 ? noise_std : 1.0);
  Vec x = ps.transform(y0, 0.0);
  res.traj.push_back(y0);
  res.cost.push_back(0.0);
  double J = 0.0;
  for (int i = 0; i < L; ++i) {
    double t = i * dt;
    Vec u = control(t);
    J += dt * std::exp(-ps.cfg.lambda * t) * ps.cost(x, u);
    x = dyn->step(x, u, t);
    if (noise_std > 0)
      for (Eigen::Index c = 0; c < x.size(); ++c) x(c) += dist(rng);
    res.traj.push_back(ps.untransform(x, (i + 1) * dt));
    res.controls.push_back(u);
    res.cost.push_back(J);
  }
  return res;
}

std::vector<double> evaluate_cost_functional(const std::vector<Vec>& traj,
                                             const std::vector<Vec>& controls,
                                             const CostFn& cost, double lambda,
                                             double dt) {
  if (traj.size() < controls.size())
    throw std::invalid_argument("evaluate_cost_functional: length mismatch");
  std::vector<double> J(controls.size() + 1, 0.0);
  for (size_t i = 0; i < controls.size(); ++i)
    J[i + 1] = J[i] + dt * std::exp(-lambda * i * dt) * cost(traj[i], controls[i]);
  return J;
}

std::vector<TableRow> convergence_study(const ProblemSetup& ps,
                                        const ScatteredGrid& grid,
                                        const Vec& values, double sigma,
                                        const std::vector<double>& dts) {
  if (ps.cfg.name != "test1")
    throw std::invalid_argument("convergence_study: needs the analytic pair");
  std::vector<TableRow> rows;
  for (double dt : dts) {
    AnalyticPair pr = ps.pair;
    SimResult hjb = simulate_feedback_physical(ps, grid, values, sigma, dt,
                                               ps.cfg.T_sim, ps.x0_physical(),
                                               0.0, 0);
    SimResult replay = simulate_control_physical(
        ps, [pr](double t) { return Vec(Vec::Constant(1, pr.u_d(t))); }, dt,
        ps.cfg.T_sim, ps.x0_physical(), 0.0, 0);
    // Analytic-optimum trajectory y* = phi(t) q at the same time grid.
    size_t L = hjb.traj.size();
    const std::vector<Vec>& y_hjb = hjb.traj;
    const std::vector<Vec>& y_u = replay.traj;
    std::vector<Vec> y_star(L);
    for (size_t k = 0; k < L; ++k) y_star[k] = pr.phi(k * dt) * ps.q_nodal;
    TableRow row;
    row.dt = dt;
    row.e_hjb_star = discounted_l2_distance(y_hjb, y_star, ps.M, ps.cfg.lambda, dt);
    row.e_hjb_u = discounted_l2_distance(y_hjb, y_u, ps.M, ps.cfg.lambda, dt);
    row.e_star_u = discounted_l2_distance(y_star, y_u, ps.M, ps.cfg.lambda, dt);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace fhjb
