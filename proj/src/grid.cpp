#include "fhjb/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <unordered_set>

#include "fhjb/csv.hpp"

namespace fhjb {

namespace {
std::string key_of(const Vec& x) {
  return std::string(reinterpret_cast<const char*>(x.data()),
                     x.size() * sizeof(double));
}
}  // namespace

ScatteredGrid generate_grid(const GridSpec& spec, const FlowFn& flow) {
  if (spec.initial_states.empty() || spec.control_samples.empty() ||
      spec.K_bar < 1)
    throw std::invalid_argument("generate_grid: empty spec");
  std::vector<Vec> pts;
  std::vector<Provenance> prov;
  std::vector<double> steps;
  std::unordered_set<std::string> seen;
  for (int i = 0; i < static_cast<int>(spec.initial_states.size()); ++i) {
    for (int j = 0; j < static_cast<int>(spec.control_samples.size()); ++j) {
      Vec x = spec.initial_states[i];
      for (int k = 1; k <= spec.K_bar; ++k) {
        if (seen.insert(key_of(x)).second) {
          pts.push_back(x);
          prov.push_back({i + 1, j + 1, k});
        }
        if (k < spec.K_bar) {
          Vec next = flow(x, spec.control_samples[j], (k - 1) * spec.dt_bar);
          if (!next.allFinite())
            throw std::runtime_error("generate_grid: blowup at trajectory (" +
                                     std::to_string(i) + "," + std::to_string(j) +
                                     "," + std::to_string(k) + ")");
          steps.push_back((next - x).norm());
          x = std::move(next);
        }
      }
    }
  }
  ScatteredGrid g;
  g.points.resize(static_cast<Eigen::Index>(pts.size()), pts[0].size());
  for (size_t n = 0; n < pts.size(); ++n) g.points.row(n) = pts[n].transpose();
  g.prov = std::move(prov);
  g.dt_bar = spec.dt_bar;
  g.h_min = g.size() > 1 ? separation_distance(g.points) : 0.0;
  g.h_scale = steps.empty() ? g.h_min : spacing_scale(steps);
  return g;
}

double separation_distance(const Mat& points) {
  const Eigen::Index n = points.rows();
  if (n < 2)
    throw std::invalid_argument("separation_distance: need at least 2 points");
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double d2 = (points.row(i) - points.row(j)).squaredNorm();
      if (d2 < best) best = d2;
    }
  return std::sqrt(best);
}

double spacing_scale(const std::vector<double>& step_lengths) {
  if (step_lengths.empty())
    throw std::invalid_argument("spacing_scale: empty input");
  std::vector<double> s = step_lengths;
  std::sort(s.begin(), s.end());
  double pos = 0.75 * (s.size() - 1);
  size_t lo = static_cast<size_t>(pos);
  size_t hi = std::min(lo + 1, s.size() - 1);
  double frac = pos - lo;
  return s[lo] + frac * (s[hi] - s[lo]);
}

void write_grid_csv(const ScatteredGrid& grid, const std::string& points_path,
                    const std::string& prov_path) {
  std::vector<std::vector<double>> rows(grid.size());
  for (int n = 0; n < grid.size(); ++n) {
    rows[n].resize(grid.dim());
    for (int c = 0; c < grid.dim(); ++c) rows[n][c] = grid.points(n, c);
  }
  write_csv(points_path, {}, rows);
  std::vector<std::vector<double>> prows(grid.size());
  for (int n = 0; n < grid.size(); ++n)
    prows[n] = {static_cast<double>(grid.prov[n].i),
                static_cast<double>(grid.prov[n].j),
                static_cast<double>(grid.prov[n].k)};
  write_csv(prov_path, {"i", "j", "k"}, prows);
}

ScatteredGrid read_grid_csv(const std::string& points_path,
                            const std::string& prov_path, double dt_bar,
                            double h_scale) {
  auto rows = read_csv(points_path, false);
  auto prows = read_csv(prov_path, true);
  if (rows.empty() || rows.size() != prows.size())
    throw std::runtime_error("read_grid_csv: inconsistent files");
  ScatteredGrid g;
  g.points.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(rows[0].size()));
  for (size_t n = 0; n < rows.size(); ++n)
    for (size_t c = 0; c < rows[n].size(); ++c) g.points(n, c) = rows[n][c];
  g.prov.resize(prows.size());
  for (size_t n = 0; n < prows.size(); ++n)
    g.prov[n] = {static_cast<int>(prows[n][0]), static_cast<int>(prows[n][1]),
                 static_cast<int>(prows[n][2])};
  g.dt_bar = dt_bar;
  g.h_min = g.size() > 1 ? separation_distance(g.points) : 0.0;
  g.h_scale = h_scale;
  return g;
}

}  // namespace fhjb
