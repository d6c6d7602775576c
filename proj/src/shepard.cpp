#include "fhjb/shepard.hpp"

#include <cmath>
#include <limits>

namespace fhjb {

int wendland_ell(int dim) { return dim / 2 + 3; }

double wendland_eval(const WendlandKernel& k, double r) {
  double sr = k.sigma * r;
  if (sr >= 1.0) return 0.0;
  double base = std::pow(1.0 - sr, k.ell + 2);
  double poly = (static_cast<double>(k.ell) * k.ell + 4.0 * k.ell + 3.0) * sr * sr +
                (3.0 * k.ell + 6.0) * sr + 3.0;
  return base * poly;
}

double shepard_eval(const ShepardInterpolant& itp, const Vec& x) {
  const Mat& nodes = *itp.nodes;
  const Eigen::Index n = nodes.rows();
  const double rad = 1.0 / itp.kernel.sigma;
  double num = 0.0, den = 0.0;
  double best_d2 = std::numeric_limits<double>::infinity();
  Eigen::Index best = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double d2 = (nodes.row(i).transpose() - x).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
    if (d2 < rad * rad) {
      double w = wendland_eval(itp.kernel, std::sqrt(d2));
      num += w * itp.values(i);
      den += w;
    }
  }
  if (den < 1e-300) return itp.values(best);
  return num / den;
}

Vec shepard_eval_batch(const ShepardInterpolant& itp, const Mat& queries) {
  Vec out(queries.rows());
  for (Eigen::Index q = 0; q < queries.rows(); ++q)
    out(q) = shepard_eval(itp, queries.row(q).transpose());
  return out;
}

}  // namespace fhjb
