#include "fhjb/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fhjb/quadrature.hpp"

namespace fhjb {

FeMesh build_mesh(int d, double a, double b) {
  if (d < 1) throw std::invalid_argument("build_mesh: d must be >= 1");
  if (!(a < b)) throw std::invalid_argument("build_mesh: need a < b");
  FeMesh m;
  m.a = a;
  m.b = b;
  m.d = d;
  m.h = (b - a) / (d + 1);
  return m;
}

double fractional_constant(double s) {
  return std::pow(4.0, s) * s * std::tgamma(s + 0.5) /
         (std::sqrt(M_PI) * std::tgamma(1.0 - s));
}

Mat assemble_mass(const FeMesh& mesh) {
  const int d = mesh.d;
  const double h = mesh.h;
  Mat M = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    M(i, i) = 2.0 * h / 3.0;
    if (i + 1 < d) M(i, i + 1) = M(i + 1, i) = h / 6.0;
  }
  return M;
}

namespace {

// Hat function of interior node i (1-based, node at a + i h).
double hat(int i, double x, double a, double h) {
  return std::max(0.0, 1.0 - std::abs(x - (a + i * h)) / h);
}

// A contribution of one element pair (or one complement term): a small set of
// (i, j, value) triples with i <= j, both 1-based interior node indices.
struct Contrib {
  int n = 0;
  int i[10];
  int j[10];
  double v[10];
  void add(int ii, int jj, double vv) {
    if (ii > jj) std::swap(ii, jj);
    i[n] = ii;
    j[n] = jj;
    v[n] = vv;
    ++n;
  }
};

struct StiffnessCtx {
  int d;
  double a, h, s, C;
  double J20, J11, J02;  // adjacent-pair kernel moments
};

// Interior dofs of element l (0-based element, nodes l and l+1 in 1..d).
inline int elem_dofs(const StiffnessCtx& c, int l, int out[2], bool right[2]) {
  int n = 0;
  if (l >= 1 && l <= c.d) {
    out[n] = l;
    right[n] = false;  // decreasing slope on this element
    ++n;
  }
  if (l + 1 >= 1 && l + 1 <= c.d) {
    out[n] = l + 1;
    right[n] = true;
    ++n;
  }
  return n;
}

// Double-integral part over element pair (l, m), l <= m, with the symmetry
// weight (2 for l < m) and the global C/2 factor folded in.
Contrib pair_contribution(const StiffnessCtx& c, int l, int m) {
  Contrib out;
  const double h = c.h, s = c.s;
  const double w = (l == m) ? 1.0 : 2.0;
  const double fac = w * 0.5 * c.C;
  if (l == m) {
    const double val =
        2.0 * std::pow(h, 3.0 - 2.0 * s) / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s));
    int dofs[2];
    bool right[2];
    int nd = elem_dofs(c, l, dofs, right);
    for (int a = 0; a < nd; ++a)
      for (int b = a; b < nd; ++b) {
        double gi = right[a] ? 1.0 / h : -1.0 / h;
        double gj = right[b] ? 1.0 / h : -1.0 / h;
        out.add(dofs[a], dofs[b], fac * gi * gj * val);
      }
  } else if (m == l + 1) {
    // Shared vertex v: substitute x = v - p, y = v + q; the three involved
    // hats have slope coefficients (c_p, c_q) listed below, and the kernel
    // moments J were precomputed.
    int idx[3];
    double cp[3], cq[3];
    int n = 0;
    if (l >= 1 && l <= c.d) {
      idx[n] = l;
      cp[n] = 1.0 / h;
      cq[n] = 0.0;
      ++n;
    }
    if (l + 1 >= 1 && l + 1 <= c.d) {
      idx[n] = l + 1;
      cp[n] = -1.0 / h;
      cq[n] = 1.0 / h;
      ++n;
    }
    if (l + 2 >= 1 && l + 2 <= c.d) {
      idx[n] = l + 2;
      cp[n] = 0.0;
      cq[n] = -1.0 / h;
      ++n;
    }
    const double scale = std::pow(h, 3.0 - 2.0 * s);
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        double val = scale * (cp[a] * cp[b] * c.J20 +
                              (cp[a] * cq[b] + cq[a] * cp[b]) * c.J11 +
                              cq[a] * cq[b] * c.J02);
        out.add(idx[a], idx[b], fac * val);
      }
  } else {
    // Distant pair: smooth integrand, 16-point tensor Gauss.
    const GaussRule& g = gauss_rule(16);
    const int ng = 16;
    const double x0 = c.a + l * h, x1 = c.a + (l + 1) * h;
    const double y0 = c.a + m * h, y1 = c.a + (m + 1) * h;
    double xs[16], wx[16], ys[16], wy[16];
    for (int k = 0; k < ng; ++k) {
      xs[k] = 0.5 * (x1 - x0) * g.x[k] + 0.5 * (x0 + x1);
      wx[k] = 0.5 * (x1 - x0) * g.w[k];
      ys[k] = 0.5 * (y1 - y0) * g.x[k] + 0.5 * (y0 + y1);
      wy[k] = 0.5 * (y1 - y0) * g.w[k];
    }
    int dl[2], dm[2];
    bool rl[2], rm[2];
    int nl = elem_dofs(c, l, dl, rl);
    int nm = elem_dofs(c, m, dm, rm);
    int nodes[4];
    int nn = 0;
    for (int k = 0; k < nl; ++k) nodes[nn++] = dl[k];
    for (int k = 0; k < nm; ++k) {
      bool dup = false;
      for (int p = 0; p < nn; ++p) dup |= (nodes[p] == dm[k]);
      if (!dup) nodes[nn++] = dm[k];
    }
    std::sort(nodes, nodes + nn);
    for (int a = 0; a < nn; ++a)
      for (int b = a; b < nn; ++b) {
        double tot = 0.0;
        for (int p = 0; p < ng; ++p) {
          double hia = hat(nodes[a], xs[p], c.a, h);
          double hib = hat(nodes[b], xs[p], c.a, h);
          for (int q = 0; q < ng; ++q) {
            double K = std::pow(std::abs(xs[p] - ys[q]), -1.0 - 2.0 * s);
            double da = hia - hat(nodes[a], ys[q], c.a, h);
            double db = hib - hat(nodes[b], ys[q], c.a, h);
            tot += wx[p] * wy[q] * da * db * K;
          }
        }
        out.add(nodes[a], nodes[b], fac * tot);
      }
  }
  return out;
}

// Complement tail of element l: C * int_E phi_i phi_j rho with
// rho(x) = ((x-a)^{-2s} + (b-x)^{-2s}) / (2s); polynomial-times-power
// antiderivatives, with the log special case at exponent -1 (s = 1/2).
Contrib complement_contribution(const StiffnessCtx& c, int l, double blen) {
  Contrib out;
  const double h = c.h, s = c.s;
  const double t0 = l * h, t1 = (l + 1) * h;  // t = x - a
  int dofs[2];
  bool right[2];
  int nd = elem_dofs(c, l, dofs, right);
  auto integrate = [&](double lo, double hi, const double P[3]) {
    double tot = 0.0;
    for (int k = 0; k < 3; ++k) {
      if (P[k] == 0.0) continue;
      double e = k - 2.0 * s;
      if (std::abs(e + 1.0) < 1e-14)
        tot += P[k] * std::log(hi / lo);
      else
        tot += P[k] * (std::pow(hi, e + 1.0) - std::pow(lo, e + 1.0)) / (e + 1.0);
    }
    return tot;
  };
  for (int a = 0; a < nd; ++a)
    for (int b = a; b < nd; ++b) {
      // Hats as linear polynomials in t: left dof (t1 - t)/h, right (t - t0)/h.
      double a0 = right[a] ? -t0 / h : t1 / h;
      double a1 = right[a] ? 1.0 / h : -1.0 / h;
      double b0 = right[b] ? -t0 / h : t1 / h;
      double b1 = right[b] ? 1.0 / h : -1.0 / h;
      double P[3] = {a0 * b0, a0 * b1 + a1 * b0, a1 * b1};
      double tot = integrate(t0, t1, P);
      // Mirror term (b-x)^{-2s}: substitute u = (b-a) - t.
      double a0u = right[a] ? (blen - t0) / h : (t1 - blen) / h;
      double a1u = right[a] ? -1.0 / h : 1.0 / h;
      double b0u = right[b] ? (blen - t0) / h : (t1 - blen) / h;
      double b1u = right[b] ? -1.0 / h : 1.0 / h;
      double Pu[3] = {a0u * b0u, a0u * b1u + a1u * b0u, a1u * b1u};
      tot += integrate(blen - t1, blen - t0, Pu);
      out.add(dofs[a], dofs[b], c.C * tot / (2.0 * s));
    }
  return out;
}

StiffnessCtx make_ctx(const FeMesh& mesh, double s) {
  StiffnessCtx c;
  c.d = mesh.d;
  c.a = mesh.a;
  c.h = mesh.h;
  c.s = s;
  c.C = fractional_constant(s);
  // K_j = int_0^1 t^j (1+t)^{-1-2s} dt, J_{ij} = (K_i + K_j)/(3-2s).
  const GaussRule& g = gauss_rule(40);
  double K[3] = {0.0, 0.0, 0.0};
  for (size_t p = 0; p < g.x.size(); ++p) {
    double t = 0.5 * (g.x[p] + 1.0);
    double w = 0.5 * g.w[p];
    double ker = std::pow(1.0 + t, -1.0 - 2.0 * s);
    K[0] += w * ker;
    K[1] += w * t * ker;
    K[2] += w * t * t * ker;
  }
  c.J20 = (K[2] + K[0]) / (3.0 - 2.0 * s);
  c.J11 = (K[1] + K[1]) / (3.0 - 2.0 * s);
  c.J02 = (K[0] + K[2]) / (3.0 - 2.0 * s);
  return c;
}

void accumulate(Mat& A, const Contrib& cb) {
  for (int k = 0; k < cb.n; ++k) {
    A(cb.i[k] - 1, cb.j[k] - 1) += cb.v[k];
    if (cb.i[k] != cb.j[k]) A(cb.j[k] - 1, cb.i[k] - 1) += cb.v[k];
  }
}

Mat assemble_stiffness_impl(const FeMesh& mesh, double s, bool parallel) {
  if (!(s > 0.0 && s < 1.0))
    throw std::invalid_argument("assemble_fractional_stiffness: s must be in (0,1)");
  const StiffnessCtx c = make_ctx(mesh, s);
  const int nel = mesh.d + 1;
  const double blen = mesh.b - mesh.a;

  // Enumerate pairs (l, m), l <= m, then the complement terms, in a fixed
  // order; contributions are pure so the parallel path fills the same buffer
  // and the serial accumulation below is bitwise-identical either way.
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(nel * (nel + 1) / 2);
  for (int l = 0; l < nel; ++l)
    for (int m = l; m < nel; ++m) pairs.emplace_back(l, m);
  const int np = static_cast<int>(pairs.size());
  std::vector<Contrib> buf(np + nel);

  if (parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (int k = 0; k < np; ++k)
      buf[k] = pair_contribution(c, pairs[k].first, pairs[k].second);
#pragma omp parallel for schedule(static)
    for (int l = 0; l < nel; ++l)
      buf[np + l] = complement_contribution(c, l, blen);
  } else {
    for (int k = 0; k < np; ++k)
      buf[k] = pair_contribution(c, pairs[k].first, pairs[k].second);
    for (int l = 0; l < nel; ++l)
      buf[np + l] = complement_contribution(c, l, blen);
  }

  Mat A = Mat::Zero(mesh.d, mesh.d);
  for (const Contrib& cb : buf) accumulate(A, cb);
  return A;
}

}  // namespace

Mat assemble_fractional_stiffness(const FeMesh& mesh, double s) {
  return assemble_stiffness_impl(mesh, s, true);
}

Mat assemble_fractional_stiffness_serial(const FeMesh& mesh, double s) {
  return assemble_stiffness_impl(mesh, s, false);
}

Vec assemble_load(const FeMesh& mesh, const std::function<double(double)>& g,
                  int quad_order) {
  const int d = mesh.d;
  const double h = mesh.h;
  const GaussRule& gr = gauss_rule(quad_order);
  Vec L = Vec::Zero(d);
  for (int l = 0; l <= d; ++l) {
    double x0 = mesh.a + l * h, x1 = x0 + h;
    for (size_t p = 0; p < gr.x.size(); ++p) {
      double x = 0.5 * (x1 - x0) * gr.x[p] + 0.5 * (x0 + x1);
      double w = 0.5 * (x1 - x0) * gr.w[p];
      double gv = g(x);
      if (l >= 1) L(l - 1) += w * gv * (x1 - x) / h;   // left node of element
      if (l + 1 <= d) L(l) += w * gv * (x - x0) / h;   // right node
    }
  }
  return L;
}

Vec assemble_load_indicator(const FeMesh& mesh, double lo, double hi) {
  const int d = mesh.d;
  const double h = mesh.h;
  Vec L = Vec::Zero(d);
  // Per element, integrate each hat exactly over [lo,hi] ∩ element.
  for (int l = 0; l <= d; ++l) {
    double x0 = mesh.a + l * h, x1 = x0 + h;
    double c0 = std::max(x0, lo), c1 = std::min(x1, hi);
    if (c0 >= c1) continue;
    // int_{c0}^{c1} (x1 - x)/h dx and int (x - x0)/h dx, exact.
    double left = ((x1 - c0) * (x1 - c0) - (x1 - c1) * (x1 - c1)) / (2.0 * h);
    double right = ((c1 - x0) * (c1 - x0) - (c0 - x0) * (c0 - x0)) / (2.0 * h);
    if (l >= 1) L(l - 1) += left;
    if (l + 1 <= d) L(l) += right;
  }
  return L;
}

Mat assemble_target_mass(const FeMesh& mesh, double lo, double hi) {
  if (!(lo < hi))
    throw std::invalid_argument("assemble_target_mass: need lo < hi");
  const int d = mesh.d;
  const double h = mesh.h;
  Mat M = Mat::Zero(d, d);
  // Order-4 Gauss is exact for the quadratic integrands on each clipped piece.
  const GaussRule& gr = gauss_rule(4);
  for (int l = 0; l <= d; ++l) {
    double x0 = mesh.a + l * h, x1 = x0 + h;
    double c0 = std::max(x0, lo), c1 = std::min(x1, hi);
    if (c0 >= c1) continue;
    double vLL = 0, vLR = 0, vRR = 0;
    for (size_t p = 0; p < gr.x.size(); ++p) {
      double x = 0.5 * (c1 - c0) * gr.x[p] + 0.5 * (c0 + c1);
      double w = 0.5 * (c1 - c0) * gr.w[p];
      double pl = (x1 - x) / h, pr = (x - x0) / h;
      vLL += w * pl * pl;
      vLR += w * pl * pr;
      vRR += w * pr * pr;
    }
    if (l >= 1) M(l - 1, l - 1) += vLL;
    if (l >= 1 && l + 1 <= d) {
      M(l - 1, l) += vLR;
      M(l, l - 1) += vLR;
    }
    if (l + 1 <= d) M(l, l) += vRR;
  }
  return M;
}

double l2_error_vs(const FeMesh& mesh, const Vec& y,
                   const std::function<double(double)>& ref) {
  const int d = mesh.d;
  const double h = mesh.h;
  const GaussRule& gr = gauss_rule(12);
  double tot = 0.0;
  for (int l = 0; l <= d; ++l) {
    double x0 = mesh.a + l * h, x1 = x0 + h;
    double yl = (l >= 1) ? y(l - 1) : 0.0;
    double yr = (l + 1 <= d) ? y(l) : 0.0;
    for (size_t p = 0; p < gr.x.size(); ++p) {
      double x = 0.5 * (x1 - x0) * gr.x[p] + 0.5 * (x0 + x1);
      double w = 0.5 * (x1 - x0) * gr.w[p];
      double yh = yl + (yr - yl) * (x - x0) / h;
      double e = yh - ref(x);
      tot += w * e * e;
    }
  }
  return std::sqrt(tot);
}

}  // namespace fhjb
