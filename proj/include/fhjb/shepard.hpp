#pragma once
#include <Eigen/Dense>

#include "fhjb/fem.hpp"

namespace fhjb {

// Compactly supported Wendland kernel, smoothness tied to the ambient
// dimension via ell = floor(d/2) + 3:
//   phi(r) = max{0, (1 - s r)^(ell+2) ((ell^2+4ell+3) s^2 r^2 + (3ell+6) s r + 3)}
struct WendlandKernel {
  int ell = 3;
  double sigma = 1.0;
};

int wendland_ell(int dim);
double wendland_eval(const WendlandKernel& k, double r);

// Shepard operator: convex combination of nodal values with normalized kernel
// weights; queries with no node inside the support radius 1/sigma (or with a
// fully underflowed denominator) fall back to the nearest node's value, which
// keeps the operator norm at 1.
struct ShepardInterpolant {
  const Mat* nodes = nullptr;  // N x d, not owned
  Vec values;
  WendlandKernel kernel;
};

double shepard_eval(const ShepardInterpolant& itp, const Vec& x);
Vec shepard_eval_batch(const ShepardInterpolant& itp, const Mat& queries);

}  // namespace fhjb
