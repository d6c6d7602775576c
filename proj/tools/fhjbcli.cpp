#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "fhjb/csv.hpp"
#include "fhjb/problems.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fhjb;

namespace {

constexpr const char* kVersion = "fhjb 0.1.0";

std::string timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

TestConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

void write_manifest(const std::string& path, json j) {
  j["version"] = kVersion;
  j["timestamp"] = timestamp();
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

struct GridBundle {
  ScatteredGrid grid;
};

ScatteredGrid run_gridgen(const ProblemSetup& ps) {
  GridSpec spec;
  spec.initial_states = {ps.x0};
  spec.control_samples = ps.grid_ctrls;
  spec.dt_bar = ps.cfg.dt_bar;
  spec.K_bar = static_cast<int>(std::lround(ps.cfg.T_grid / ps.cfg.dt_bar)) + 1;
  return generate_grid(spec, ps.flow_of(ps.dyn_grid));
}

int cmd_gridgen(const std::string& cfg_path, const std::string& out_dir) {
  TestConfig cfg = load_config(cfg_path);
  ProblemSetup ps = make_problem(cfg);
  auto t0 = std::chrono::steady_clock::now();
  ScatteredGrid grid = run_gridgen(ps);
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  fs::create_directories(out_dir);
  std::string gp = out_dir + "/grid.csv", pp = out_dir + "/grid_prov.csv";
  write_grid_csv(grid, gp, pp);
  json j;
  j["config"] = json::parse(config_to_json(cfg));
  j["n_nodes"] = grid.size();
  j["h_min"] = grid.h_min;
  j["h_scale"] = grid.h_scale;
  j["dt_bar"] = grid.dt_bar;
  j["outputs"] = {gp, pp};
  j["wall_seconds"] = wall;
  write_manifest(out_dir + "/gridgen_manifest.json", j);
  std::cout << "grid: " << grid.size() << " nodes, h_min=" << grid.h_min
            << ", h_scale=" << grid.h_scale << "\n";
  return 0;
}

ScatteredGrid load_grid(const std::string& dir) {
  std::ifstream in(dir + "/gridgen_manifest.json");
  if (!in) throw std::runtime_error("missing gridgen manifest in " + dir);
  json j = json::parse(in);
  return read_grid_csv(dir + "/grid.csv", dir + "/grid_prov.csv",
                       j.at("dt_bar").get<double>(),
                       j.at("h_scale").get<double>());
}

int cmd_solve(const std::string& cfg_path, const std::string& out_dir,
              double theta_override) {
  TestConfig cfg = load_config(cfg_path);
  ProblemSetup ps = make_problem(cfg);
  fs::create_directories(out_dir);
  ScatteredGrid grid;
  if (fs::exists(out_dir + "/grid.csv")) {
    grid = load_grid(out_dir);
  } else {
    grid = run_gridgen(ps);
    write_grid_csv(grid, out_dir + "/grid.csv", out_dir + "/grid_prov.csv");
    json gj;
    gj["config"] = json::parse(config_to_json(cfg));
    gj["n_nodes"] = grid.size();
    gj["h_min"] = grid.h_min;
    gj["h_scale"] = grid.h_scale;
    gj["dt_bar"] = grid.dt_bar;
    write_manifest(out_dir + "/gridgen_manifest.json", gj);
  }
  HjbProblem hp = ps.hjb_problem();
  auto t0 = std::chrono::steady_clock::now();
  double theta;
  std::vector<std::vector<double>> scan_rows;
  if (theta_override > 0) {
    theta = theta_override;
  } else if (cfg.theta_scan) {
    ShapeScan scan = select_shape(hp, grid, cfg.theta_min, cfg.theta_max,
                                  cfg.theta_step, cfg.vi_tol, vi_max_iter(cfg),
                                  cfg.scan_iters);
    theta = scan.theta_bar;
    for (auto& [th, R] : scan.table) scan_rows.push_back({th, R});
  } else {
    theta = cfg.theta_fixed;
  }
  double sigma = theta / grid.h_scale;
  ValueFunction vf = vi_solve(hp, grid, sigma, cfg.vi_tol, vi_max_iter(cfg));
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (scan_rows.empty())
    scan_rows.push_back({theta, vi_residual(hp, grid, sigma, vf.values)});
  write_csv(out_dir + "/residual_scan.csv", {"theta", "residual"}, scan_rows);
  std::vector<std::vector<double>> vrows(grid.size());
  for (int n = 0; n < grid.size(); ++n)
    vrows[n] = {static_cast<double>(n), vf.values(n)};
  write_csv(out_dir + "/value_function.csv", {"node", "value"}, vrows);
  json j;
  j["config"] = json::parse(config_to_json(cfg));
  j["theta"] = theta;
  j["sigma"] = sigma;
  j["iterations"] = vf.iterations;
  j["final_update"] = vf.final_update;
  j["non_converged"] = !vf.converged;
  j["outputs"] = {out_dir + "/value_function.csv", out_dir + "/residual_scan.csv"};
  j["wall_seconds"] = wall;
  write_manifest(out_dir + "/solve_manifest.json", j);
  if (!vf.converged)
    std::cerr << "warning: value iteration hit max_iter (final update "
              << vf.final_update << ")\n";
  std::cout << "theta=" << theta << " sigma=" << sigma
            << " iterations=" << vf.iterations << "\n";
  return 0;
}

int cmd_simulate(const std::string& cfg_path, const std::string& out_dir,
                 double noise_std, unsigned seed, bool open_loop, double dt_arg) {
  TestConfig cfg = load_config(cfg_path);
  ProblemSetup ps = make_problem(cfg);
  double dt = dt_arg > 0 ? dt_arg : cfg.dt_sim;
  SimResult res;
  double sigma = 0.0;
  if (open_loop) {
    AnalyticPair pr = ps.pair;
    int m = static_cast<int>(cfg.U.size());
    std::function<Vec(double)> ctrl;
    if (cfg.name == "test1")
      ctrl = [pr](double t) { return Vec(Vec::Constant(1, pr.u_d(t))); };
    else
      ctrl = [m](double) { return Vec(Vec::Zero(m)); };
    res = simulate_control_physical(ps, ctrl, dt, cfg.T_sim, ps.x0_physical(),
                                    noise_std, seed);
  } else {
    ScatteredGrid grid = load_grid(out_dir);
    auto vrows = read_csv(out_dir + "/value_function.csv", true);
    Vec V(vrows.size());
    for (size_t n = 0; n < vrows.size(); ++n) V(n) = vrows[n][1];
    std::ifstream in(out_dir + "/solve_manifest.json");
    if (!in) throw std::runtime_error("missing solve manifest in " + out_dir);
    sigma = json::parse(in).at("sigma").get<double>();
    res = simulate_feedback_physical(ps, grid, V, sigma, dt, cfg.T_sim,
                                     ps.x0_physical(), noise_std, seed);
  }
  fs::create_directories(out_dir);
  std::string tag = open_loop ? "openloop" : "closedloop";
  std::vector<std::vector<double>> trows, urows, crows;
  for (const Vec& x : res.traj)
    trows.emplace_back(x.data(), x.data() + x.size());
  for (const Vec& u : res.controls)
    urows.emplace_back(u.data(), u.data() + u.size());
  for (size_t k = 0; k < res.cost.size(); ++k)
    crows.push_back({static_cast<double>(k) * dt, res.cost[k]});
  write_csv(out_dir + "/trajectory_" + tag + ".csv", {}, trows);
  write_csv(out_dir + "/controls_" + tag + ".csv", {}, urows);
  write_csv(out_dir + "/cost_" + tag + ".csv", {"t", "J"}, crows);
  json j;
  j["config"] = json::parse(config_to_json(cfg));
  j["seed"] = seed;
  j["noise_std"] = noise_std;
  j["open_loop"] = open_loop;
  j["dt"] = dt;
  j["sigma"] = sigma;
  j["final_cost"] = res.cost.back();
  j["outputs"] = {out_dir + "/trajectory_" + tag + ".csv",
                  out_dir + "/controls_" + tag + ".csv",
                  out_dir + "/cost_" + tag + ".csv"};
  write_manifest(out_dir + "/simulate_" + tag + "_manifest.json", j);
  std::cout << "final cumulative cost: " << res.cost.back() << "\n";
  return 0;
}

int cmd_table(const std::string& cfg_path, const std::string& out_dir,
              std::vector<double> dts, double theta_override) {
  TestConfig cfg = load_config(cfg_path);
  if (cfg.name != "test1")
    throw std::runtime_error("table: only test1 has an analytic solution");
  if (dts.empty()) dts = {0.05, 0.025, 0.0125};
  ProblemSetup ps = make_problem(cfg);
  fs::create_directories(out_dir);
  ScatteredGrid grid = run_gridgen(ps);
  HjbProblem hp = ps.hjb_problem();
  double theta = theta_override > 0 ? theta_override
                 : cfg.theta_scan
                     ? select_shape(hp, grid, cfg.theta_min, cfg.theta_max,
                                    cfg.theta_step, cfg.vi_tol,
                                    vi_max_iter(cfg), cfg.scan_iters)
                           .theta_bar
                     : cfg.theta_fixed;
  double sigma = theta / grid.h_scale;
  ValueFunction vf = vi_solve(hp, grid, sigma, cfg.vi_tol, vi_max_iter(cfg));
  auto rows = convergence_study(ps, grid, vf.values, sigma, dts);
  std::vector<std::vector<double>> out;
  for (size_t r = 0; r < rows.size(); ++r) {
    auto rate = [&](double prev, double cur) {
      return r == 0 ? std::nan("") : std::log2(prev / cur);
    };
    out.push_back({rows[r].dt, rows[r].e_hjb_star,
                   rate(r ? rows[r - 1].e_hjb_star : 0, rows[r].e_hjb_star),
                   rows[r].e_hjb_u,
                   rate(r ? rows[r - 1].e_hjb_u : 0, rows[r].e_hjb_u),
                   rows[r].e_star_u,
                   rate(r ? rows[r - 1].e_star_u : 0, rows[r].e_star_u)});
  }
  write_csv(out_dir + "/table.csv",
            {"dt", "e_hjb_star", "rate1", "e_hjb_u", "rate2", "e_star_u", "rate3"},
            out);
  json j;
  j["config"] = json::parse(config_to_json(cfg));
  j["theta"] = theta;
  j["sigma"] = sigma;
  j["iterations"] = vf.iterations;
  j["outputs"] = {out_dir + "/table.csv"};
  write_manifest(out_dir + "/table_manifest.json", j);
  for (auto& row : out) {
    for (size_t c = 0; c < row.size(); ++c)
      std::cout << (c ? "  " : "") << format_double(row[c]);
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feedback control of fractional reaction-diffusion systems via "
               "semi-Lagrangian value iteration on scattered grids"};
  app.require_subcommand(1);
  std::string cfg_path, out_dir = "out";
  int threads = 0;
  unsigned seed = 0;
  double noise_std = 0.0, dt = 0.0, theta = 0.0;
  bool open_loop = false;
  std::string dt_list;

  app.add_option("--threads", threads, "OpenMP thread cap (0 = default)");

  auto* g = app.add_subcommand("gridgen", "generate the scattered grid");
  g->add_option("--config", cfg_path, "config JSON")->required();
  g->add_option("--out", out_dir, "output directory");

  auto* s = app.add_subcommand("solve", "shape scan + value iteration");
  s->add_option("--config", cfg_path, "config JSON")->required();
  s->add_option("--out", out_dir, "output directory");
  s->add_option("--theta", theta, "fixed shape parameter (skips the scan)");

  auto* m = app.add_subcommand("simulate", "closed- or open-loop simulation");
  m->add_option("--config", cfg_path, "config JSON")->required();
  m->add_option("--out", out_dir, "output directory");
  m->add_option("--noise-std", noise_std, "per-step Gaussian noise std");
  m->add_option("--seed", seed, "RNG seed");
  m->add_flag("--open-loop", open_loop, "replay the reference control");
  m->add_option("--dt", dt, "simulation step override");

  auto* t = app.add_subcommand("table", "convergence table (test1)");
  t->add_option("--config", cfg_path, "config JSON")->required();
  t->add_option("--out", out_dir, "output directory");
  t->add_option("--dt", dt_list, "comma-separated dt list");
  t->add_option("--theta", theta, "fixed shape parameter (skips the scan)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 2 : 0;
  }

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    if (g->parsed()) return cmd_gridgen(cfg_path, out_dir);
    if (s->parsed()) return cmd_solve(cfg_path, out_dir, theta);
    if (m->parsed())
      return cmd_simulate(cfg_path, out_dir, noise_std, seed, open_loop, dt);
    if (t->parsed()) {
      std::vector<double> dts;
      std::stringstream ss(dt_list);
      std::string tok;
      while (std::getline(ss, tok, ','))
        if (!tok.empty()) dts.push_back(parse_double(tok));
      return cmd_table(cfg_path, out_dir, dts, theta);
    }
  } catch (const NumericalBlowup& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
