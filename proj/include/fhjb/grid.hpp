#pragma once
#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "fhjb/fem.hpp"

namespace fhjb {

using FlowFn = std::function<Vec(const Vec&, const Vec&, double)>;

struct GridSpec {
  std::vector<Vec> initial_states;   // L entries
  std::vector<Vec> control_samples;  // M entries, inside the admissible box
  double dt_bar = 0.025;
  int K_bar = 1;  // points per trajectory, including the initial state
};

struct Provenance {
  int i;  // initial-state index, 1-based
  int j;  // control index, 1-based
  int k;  // step index along the trajectory, 1-based (k=1 is the start)
};

struct ScatteredGrid {
  Mat points;  // N x d, row per node
  std::vector<Provenance> prov;
  double dt_bar = 0.0;
  double h_min = 0.0;    // exact minimum pairwise distance
  double h_scale = 0.0;  // robust spacing scale used for kernel shape (see
                         // README: the literal minimum degenerates near
                         // steady states)

  int size() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
  // Physical time attached to node n for time-dependent dynamics.
  double node_time(int n) const { return (prov[n].k - 1) * dt_bar; }
};

// Union of all constant-control trajectory points with exact (bitwise)
// duplicates removed; trajectories stepped with t = (k-1) dt_bar from the
// k-th point.  Deterministic: nodes appear in (i, j, k) order.
ScatteredGrid generate_grid(const GridSpec& spec, const FlowFn& flow);

// Exact minimum pairwise Euclidean distance, O(N^2).
double separation_distance(const Mat& points);

// 75th percentile (linear interpolation) of the consecutive-step distances of
// the raw trajectories; ignores the near-stationary tails that drive the
// literal minimum separation toward zero.
double spacing_scale(const std::vector<double>& step_lengths);

void write_grid_csv(const ScatteredGrid& grid, const std::string& points_path,
                    const std::string& prov_path);
ScatteredGrid read_grid_csv(const std::string& points_path,
                            const std::string& prov_path, double dt_bar,
                            double h_scale);

}  // namespace fhjb
