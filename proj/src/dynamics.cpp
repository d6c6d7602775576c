#include "fhjb/dynamics.hpp"

#include <cmath>

#include "fhjb/quadrature.hpp"

namespace fhjb {

DiscreteDynamics::DiscreteDynamics(FeMesh mesh, Mat M, Mat A, double alpha,
                                   std::vector<Vec> Q, Nonlinearity nl,
                                   std::function<Vec(double)> forcing,
                                   Scheme scheme, double dt)
    : mesh_(mesh),
      M_(std::move(M)),
      A_(std::move(A)),
      alpha_(alpha),
      Q_(std::move(Q)),
      nl_(nl),
      forcing_(std::move(forcing)),
      scheme_(scheme),
      dt_(dt) {
  if (!forcing_) {
    Eigen::Index d = M_.rows();
    forcing_ = [d](double) { return Vec(Vec::Zero(d)); };
  }
  if (scheme_ == Scheme::ImexEuler)
    solver_.compute(M_ + dt_ * alpha_ * A_);
  else
    solver_.compute(M_);
  dirs_.reserve(Q_.size());
  for (const Vec& q : Q_) dirs_.push_back(dt_ * solver_.solve(q));
}

Vec DiscreteDynamics::reaction(const Vec& x) const {
  switch (nl_) {
    case Nonlinearity::None:
      return Vec::Zero(x.size());
    case Nonlinearity::CubicComponentwise: {
      Vec f(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i)
        f(i) = x(i) * x(i) - x(i) * x(i) * x(i);
      return f;
    }
    case Nonlinearity::CubicGalerkin: {
      // <y_h^2 - y_h^3, phi_i> with y_h the P1 interpolant of x.
      const int d = mesh_.d;
      const double h = mesh_.h;
      const GaussRule& gr = gauss_rule(6);
      Vec f = Vec::Zero(d);
      for (int l = 0; l <= d; ++l) {
        double yl = (l >= 1) ? x(l - 1) : 0.0;
        double yr = (l + 1 <= d) ? x(l) : 0.0;
        for (size_t p = 0; p < gr.x.size(); ++p) {
          double r = 0.5 * (gr.x[p] + 1.0);  // local coordinate in [0,1]
          double w = 0.5 * h * gr.w[p];
          double y = yl + (yr - yl) * r;
          double val = y * y - y * y * y;
          if (l >= 1) f(l - 1) += w * val * (1.0 - r);
          if (l + 1 <= d) f(l) += w * val * r;
        }
      }
      return f;
    }
  }
  return Vec::Zero(x.size());
}

Vec DiscreteDynamics::step_base(const Vec& x, double t) const {
  Vec rhs;
  if (scheme_ == Scheme::ImexEuler) {
    rhs = M_ * x + dt_ * (reaction(x) + forcing_(t));
    return solver_.solve(rhs);
  }
  rhs = -alpha_ * (A_ * x) + reaction(x) + forcing_(t);
  return x + dt_ * solver_.solve(rhs);
}

Vec DiscreteDynamics::step(const Vec& x, const Vec& u, double t) const {
  Vec out = step_base(x, t);
  for (int k = 0; k < num_controls(); ++k) out += u(k) * dirs_[k];
  if (!out.allFinite()) throw NumericalBlowup(t);
  return out;
}

double discounted_l2_distance(const std::vector<Vec>& traj1,
                              const std::vector<Vec>& traj2, const Mat& M,
                              double lambda, double dt) {
  if (traj1.size() != traj2.size())
    throw std::invalid_argument("discounted_l2_distance: length mismatch");
  double tot = 0.0;
  for (size_t k = 0; k + 1 < traj1.size(); ++k) {
    Vec e = traj1[k] - traj2[k];
    tot += dt * std::exp(-lambda * k * dt) * e.dot(M * e);
  }
  return std::sqrt(tot);
}

}  // namespace fhjb
