#pragma once
#include <Eigen/Dense>
#include <functional>

namespace fhjb {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Uniform P1 mesh of (a,b) with d interior nodes and homogeneous volume
// constraint (functions vanish on the complement of the domain).
struct FeMesh {
  double a = -1.0;
  double b = 1.0;
  int d = 1;
  double h = 1.0;  // element width (b-a)/(d+1)

  double node(int i) const { return a + (i + 1) * h; }  // i in 0..d-1
};

FeMesh build_mesh(int d, double a = -1.0, double b = 1.0);

// Normalization constant of the integral fractional Laplacian in 1D,
// C_{1,s} = 4^s s Gamma(s+1/2) / (sqrt(pi) Gamma(1-s)).
double fractional_constant(double s);

// Tridiagonal P1 mass matrix (2h/3 diagonal, h/6 off-diagonal).
Mat assemble_mass(const FeMesh& mesh);

// Dense stiffness matrix of the bilinear form of (-Delta)^s with functions
// extended by zero outside (a,b).  Element-pair quadrature: closed forms for
// coincident/adjacent pairs, tensor Gauss for distant pairs, analytic
// complement tail.  The _serial variant is the reference implementation; the
// default parallelizes the element-pair loop with OpenMP and produces
// bitwise-identical entries.
Mat assemble_fractional_stiffness(const FeMesh& mesh, double s);
Mat assemble_fractional_stiffness_serial(const FeMesh& mesh, double s);

// Load vector <g, phi_i> by per-element Gauss quadrature (order >= 5).
Vec assemble_load(const FeMesh& mesh, const std::function<double(double)>& g,
                  int quad_order = 6);

// Load vector of an indicator function chi_[lo,hi], exact sub-interval
// integration at the discontinuities.
Vec assemble_load_indicator(const FeMesh& mesh, double lo, double hi);

// Mass matrix restricted to [lo,hi], exact on partially covered elements.
Mat assemble_target_mass(const FeMesh& mesh, double lo, double hi);

// L2(a,b) norm of the P1 interpolant minus a reference function.
double l2_error_vs(const FeMesh& mesh, const Vec& y,
                   const std::function<double(double)>& ref);

}  // namespace fhjb
