#include "fhjb/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "fhjb/dynamics.hpp"

namespace fhjb {

namespace {

// Foot point of the semi-Lagrangian step; the affine split, when provided,
// is the single source of truth so cached and uncached paths agree bitwise.
Vec foot_point(const HjbProblem& p, const Vec& x, const Vec& u, double t) {
  if (p.flow_base) {
    Vec f = p.flow_base(x, t);
    for (size_t k = 0; k < p.flow_dirs.size(); ++k) f += u(k) * p.flow_dirs[k];
    return f;
  }
  return p.flow(x, u, t);
}

// Interpolation stencil of one query point: nodes inside the support radius
// in index order with their kernel weights, plus the global nearest node for
// the empty/underflow fallback (computed lazily, full scans are rare).
struct Stencil {
  std::vector<int> idx;
  std::vector<double> w;
  double den = 0.0;
  int nearest = -1;
};

double eval_stencil(const Stencil& s, const Vec& V) {
  if (s.den < 1e-300) return V(s.nearest);
  double num = 0.0;
  for (size_t i = 0; i < s.idx.size(); ++i) num += s.w[i] * V(s.idx[i]);
  return num / s.den;
}

int nearest_node(const Mat& nodes, const Vec& x) {
  double best = std::numeric_limits<double>::infinity();
  int bi = 0;
  for (Eigen::Index i = 0; i < nodes.rows(); ++i) {
    double d2 = (nodes.row(i).transpose() - x).squaredNorm();
    if (d2 < best) {
      best = d2;
      bi = static_cast<int>(i);
    }
  }
  return bi;
}

// Builds the stencil from a candidate list (indices in ascending order whose
// GEMM-prefiltered distance may be inside the radius); membership and weights
// use the exact pairwise distance so results match shepard_eval bitwise.
Stencil build_stencil(const Mat& nodes, const WendlandKernel& k, const Vec& x,
                      const int* cand, int ncand) {
  Stencil s;
  const double rad2 = (1.0 / k.sigma) * (1.0 / k.sigma);
  for (int c = 0; c < ncand; ++c) {
    int i = cand[c];
    double d2 = (nodes.row(i).transpose() - x).squaredNorm();
    if (d2 < rad2) {
      double w = wendland_eval(k, std::sqrt(d2));
      s.idx.push_back(i);
      s.w.push_back(w);
      s.den += w;
    }
  }
  if (s.den < 1e-300) s.nearest = nearest_node(nodes, x);
  return s;
}

// Precomputed footpoints and per-(node, control) running costs; stencils are
// (re)built per shape parameter with a block GEMM distance prefilter.
class ViWorkspace {
 public:
  ViWorkspace(const HjbProblem& p, const ScatteredGrid& grid)
      : p_(p), grid_(grid), m_(static_cast<int>(p.control_grid.size())) {
    const int N = grid.size();
    feet_.resize(static_cast<Eigen::Index>(N) * m_, grid.dim());
    gcost_.resize(static_cast<size_t>(N) * m_);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < N; ++j) {
      Vec xj = grid.points.row(j).transpose();
      double tj = grid.node_time(j);
      for (int u = 0; u < m_; ++u) {
        feet_.row(static_cast<Eigen::Index>(j) * m_ + u) =
            foot_point(p_, xj, p_.control_grid[u], tj).transpose();
        gcost_[static_cast<size_t>(j) * m_ + u] =
            p_.dt * p_.cost(xj, p_.control_grid[u]);
      }
    }
    node_n2_ = grid.points.rowwise().squaredNorm();
  }

  void set_sigma(double sigma) {
    kernel_.ell = p_.ell > 0 ? p_.ell : wendland_ell(grid_.dim());
    kernel_.sigma = sigma;
    const Eigen::Index F = feet_.rows();
    const Eigen::Index N = grid_.points.rows();
    sten_.assign(F, Stencil{});
    const double rad = 1.0 / sigma;
    const double pre2 = (rad + 1e-6) * (rad + 1e-6);
    const Eigen::Index B = 256;
    Vec feet_n2 = feet_.rowwise().squaredNorm();
#pragma omp parallel
    {
      std::vector<int> cand;
      Mat block;
#pragma omp for schedule(dynamic)
      for (Eigen::Index b0 = 0; b0 < F; b0 += B) {
        Eigen::Index nb = std::min(B, F - b0);
        block.noalias() = feet_.middleRows(b0, nb) * grid_.points.transpose();
        for (Eigen::Index r = 0; r < nb; ++r) {
          cand.clear();
          for (Eigen::Index i = 0; i < N; ++i) {
            double d2 = feet_n2(b0 + r) + node_n2_(i) - 2.0 * block(r, i);
            if (d2 < pre2) cand.push_back(static_cast<int>(i));
          }
          sten_[b0 + r] =
              build_stencil(grid_.points, kernel_, feet_.row(b0 + r).transpose(),
                            cand.data(), static_cast<int>(cand.size()));
        }
      }
    }
  }

  Vec sweep(const Vec& V) const {
    const int N = grid_.size();
    const double q = 1.0 - p_.dt * p_.lambda;
    Vec out(N);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < N; ++j) {
      double best = std::numeric_limits<double>::infinity();
      for (int u = 0; u < m_; ++u) {
        size_t id = static_cast<size_t>(j) * m_ + u;
        double val = gcost_[id] + q * eval_stencil(sten_[id], V);
        if (val < best) best = val;
      }
      out(j) = best;
    }
    return out;
  }

 private:
  const HjbProblem& p_;
  const ScatteredGrid& grid_;
  int m_;
  Mat feet_;
  std::vector<double> gcost_;
  Vec node_n2_;
  WendlandKernel kernel_;
  std::vector<Stencil> sten_;
};

ValueFunction vi_solve_ws(ViWorkspace& ws, const ScatteredGrid& grid,
                          double sigma, double tol, int max_iter) {
  ValueFunction vf;
  vf.sigma = sigma;
  Vec V = Vec::Zero(grid.size());
  double upd = std::numeric_limits<double>::infinity();
  int it = 0;
  while (it < max_iter) {
    Vec Vn = ws.sweep(V);
    upd = (Vn - V).lpNorm<Eigen::Infinity>();
    V = std::move(Vn);
    ++it;
    if (upd < tol) break;
  }
  vf.values = std::move(V);
  vf.iterations = it;
  vf.final_update = upd;
  vf.converged = upd < tol;
  return vf;
}

}  // namespace

Vec vi_operator(const HjbProblem& p, const ScatteredGrid& grid, double sigma,
                const Vec& V) {
  const int N = grid.size();
  const int m = static_cast<int>(p.control_grid.size());
  const double q = 1.0 - p.dt * p.lambda;
  WendlandKernel kernel{p.ell > 0 ? p.ell : wendland_ell(grid.dim()), sigma};
  ShepardInterpolant itp{&grid.points, V, kernel};
  Vec out(N);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < N; ++j) {
    Vec xj = grid.points.row(j).transpose();
    double tj = grid.node_time(j);
    double best = std::numeric_limits<double>::infinity();
    for (int u = 0; u < m; ++u) {
      Vec foot = foot_point(p, xj, p.control_grid[u], tj);
      double val = p.dt * p.cost(xj, p.control_grid[u]) +
                   q * shepard_eval(itp, foot);
      if (val < best) best = val;
    }
    out(j) = best;
  }
  return out;
}

ValueFunction vi_solve(const HjbProblem& p, const ScatteredGrid& grid,
                       double sigma, double tol, int max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("vi_solve: tol must be > 0");
  ViWorkspace ws(p, grid);
  ws.set_sigma(sigma);
  return vi_solve_ws(ws, grid, sigma, tol, max_iter);
}

double vi_residual(const HjbProblem& p, const ScatteredGrid& grid, double sigma,
                   const Vec& V) {
  return (V - vi_operator(p, grid, sigma, V)).lpNorm<Eigen::Infinity>();
}

ShapeScan select_shape(const HjbProblem& p, const ScatteredGrid& grid,
                       double theta_min, double theta_max, double theta_step,
                       double tol, int max_iter, int scan_iters) {
  if (!(theta_min > 0.0 && theta_step > 0.0))
    throw std::invalid_argument("select_shape: bad theta range");
  if (!(grid.h_scale > 0.0))
    throw std::invalid_argument("select_shape: grid has no spacing scale");
  ViWorkspace ws(p, grid);
  ShapeScan scan;
  bool any_converged = false;
  int nsteps = static_cast<int>(std::floor((theta_max - theta_min) / theta_step + 1e-9));
  for (int i = 0; i <= nsteps; ++i) {
    double theta = theta_min + i * theta_step;
    double sigma = theta / grid.h_scale;
    ws.set_sigma(sigma);
    int budget = scan_iters > 0 ? scan_iters : max_iter;
    ValueFunction vf = vi_solve_ws(ws, grid, sigma, tol, budget);
    any_converged |= vf.converged;
    double R = (vf.values - ws.sweep(vf.values)).lpNorm<Eigen::Infinity>();
    scan.table.emplace_back(theta, R);
  }
  if (scan_iters == 0 && !any_converged)
    throw std::runtime_error("select_shape: no scan run converged");
  scan.theta_bar = scan.table[0].first;
  double best = scan.table[0].second;
  for (const auto& [theta, R] : scan.table)
    if (R < best) {
      best = R;
      scan.theta_bar = theta;
    }
  return scan;
}

Vec synthesize_feedback(const FeedbackPolicy& p, const Vec& x, double t) {
  const Mat& nodes = p.grid->points;
  const Eigen::Index N = nodes.rows();
  const int m = static_cast<int>(p.synth_controls.size());
  const double q = 1.0 - p.lambda * p.dt;
  WendlandKernel kernel{p.ell > 0 ? p.ell : wendland_ell(p.grid->dim()), p.sigma};
  ShepardInterpolant itp{&nodes, p.values, kernel};
  int best_u = 0;
  double best = std::numeric_limits<double>::infinity();

  if (p.flow_base && !p.flow_dirs.empty()) {
    // One distance pass from the control-independent base point, then each
    // control only rescans nodes that can enter the (shifted) support.
    Vec base = p.flow_base(x, t);
    double maxshift = 0.0;
    for (const Vec& u : p.synth_controls) {
      double sh = 0.0;
      for (size_t k = 0; k < p.flow_dirs.size(); ++k)
        sh += std::abs(u(k)) * p.flow_dirs[k].norm();
      maxshift = std::max(maxshift, sh);
    }
    const double rad = 1.0 / p.sigma;
    const double crad2 = (rad + maxshift + 1e-6) * (rad + maxshift + 1e-6);
    std::vector<int> cand;
    for (Eigen::Index i = 0; i < N; ++i)
      if ((nodes.row(i).transpose() - base).squaredNorm() < crad2)
        cand.push_back(static_cast<int>(i));
    std::vector<double> objs(m);
#pragma omp parallel for schedule(static)
    for (int u = 0; u < m; ++u) {
      Vec foot = base;
      for (size_t k = 0; k < p.flow_dirs.size(); ++k)
        foot += p.synth_controls[u](k) * p.flow_dirs[k];
      Stencil s = build_stencil(nodes, kernel, foot, cand.data(),
                                static_cast<int>(cand.size()));
      objs[u] = p.dt * p.cost(x, p.synth_controls[u]) +
                q * eval_stencil(s, p.values);
    }
    for (int u = 0; u < m; ++u)
      if (objs[u] < best) {
        best = objs[u];
        best_u = u;
      }
  } else {
    for (int u = 0; u < m; ++u) {
      Vec foot = p.flow(x, p.synth_controls[u], t);
      double val =
          p.dt * p.cost(x, p.synth_controls[u]) + q * shepard_eval(itp, foot);
      if (val < best) {
        best = val;
        best_u = u;
      }
    }
  }
  return p.synth_controls[best_u];
}

SimResult simulate_closed_loop(const FeedbackPolicy& p, const Vec& x0, double T,
                               double noise_std, unsigned seed) {
  SimResult res;
  const int L = static_cast<int>(std::lround(T / p.dt));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, noise_std > 0 ? noise_std : 1.0);
  Vec x = x0;
  res.traj.push_back(x);
  res.cost.push_back(0.0);
  double J = 0.0;
  for (int i = 0; i < L; ++i) {
    double t = i * p.dt;
    Vec u = synthesize_feedback(p, x, t);
    J += p.dt * std::exp(-p.lambda * t) * p.cost(x, u);
    x = p.flow(x, u, t);
    if (noise_std > 0)
      for (Eigen::Index c = 0; c < x.size(); ++c) x(c) += dist(rng);
    if (!x.allFinite()) throw NumericalBlowup(t);
    res.traj.push_back(x);
    res.controls.push_back(u);
    res.cost.push_back(J);
  }
  return res;
}

SimResult simulate_open_loop(const FlowFn& flow, const CostFn& cost,
                             double lambda, double dt,
                             const std::function<Vec(double)>& control,
                             const Vec& x0, double T, double noise_std,
                             unsigned seed) {
  SimResult res;
  const int L = static_cast<int>(std::lround(T / dt));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, noise_std > 0 ? noise_std : 1.0);
  Vec x = x0;
  res.traj.push_back(x);
  res.cost.push_back(0.0);
  double J = 0.0;
  for (int i = 0; i < L; ++i) {
    double t = i * dt;
    Vec u = control(t);
    J += dt * std::exp(-lambda * t) * cost(x, u);
    x = flow(x, u, t);
    if (noise_std > 0)
      for (Eigen::Index c = 0; c < x.size(); ++c) x(c) += dist(rng);
    if (!x.allFinite()) throw NumericalBlowup(t);
    res.traj.push_back(x);
    res.controls.push_back(u);
    res.cost.push_back(J);
  }
  return res;
}

}  // namespace fhjb
