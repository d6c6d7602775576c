// Timing comparison of the serial reference kernels against the OpenMP ones.
#include <chrono>
#include <cstdio>

#include "fhjb/fem.hpp"
#include "fhjb/grid.hpp"
#include "fhjb/hjb.hpp"

using namespace fhjb;
using Clock = std::chrono::steady_clock;

namespace {

template <typename F>
double time_of(F&& f, int reps) {
  auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) f();
  return std::chrono::duration<double>(Clock::now() - t0).count() / reps;
}

}  // namespace

int main() {
  printf("%-34s %12s %12s %8s\n", "kernel", "serial [s]", "parallel [s]",
         "speedup");
  for (int d : {63, 127, 255}) {
    FeMesh mesh = build_mesh(d);
    int reps = d <= 127 ? 3 : 1;
    Mat As, Ap;
    double ts = time_of([&] { As = assemble_fractional_stiffness_serial(mesh, 0.75); }, reps);
    double tp = time_of([&] { Ap = assemble_fractional_stiffness(mesh, 0.75); }, reps);
    double diff = (As - Ap).cwiseAbs().maxCoeff();
    char name[64];
    snprintf(name, sizeof(name), "stiffness assembly d=%d", d);
    printf("%-34s %12.4f %12.4f %8.2fx   (max |diff| = %g)\n", name, ts, tp,
           ts / tp, diff);
  }

  // one Bellman sweep on a synthetic scattered grid
  {
    int N = 2000, dim = 63;
    ScatteredGrid g;
    g.points = Mat(N, dim);
    unsigned long long state = 88172645463325252ull;
    auto rnd = [&state]() {
      state ^= state << 13;
      state ^= state >> 7;
      state ^= state << 17;
      return 2.0 * (double)(state >> 11) / (double)(1ull << 53) - 1.0;
    };
    for (int n = 0; n < N; ++n)
      for (int c = 0; c < dim; ++c) g.points(n, c) = 0.2 * rnd();
    g.prov.assign(N, Provenance{1, 1, 1});
    g.h_min = g.h_scale = 0.02;
    HjbProblem p;
    p.dt = 0.01;
    p.lambda = 0.5;
    for (int k = 0; k < 21; ++k)
      p.control_grid.push_back(Vec::Constant(1, k / 20.0));
    p.flow = [](const Vec& x, const Vec& u, double) {
      return Vec(0.99 * x + Vec::Constant(x.size(), 0.001 * u(0)));
    };
    p.cost = [](const Vec& x, const Vec& u) {
      return x.squaredNorm() + 0.01 * u(0) * u(0);
    };
    double sigma = 0.2 / g.h_scale;
    Vec V = Vec::Ones(N);
    Vec out;
    double t1 = time_of([&] { out = vi_operator(p, g, sigma, V); }, 2);
    printf("%-34s %12s %12.4f   (threaded; informational)\n",
           "bellman sweep N=2000 d=63", "-", t1);
  }
  return 0;
}
