#include "fhjb/analytic.hpp"

#include <algorithm>
#include <cmath>

namespace fhjb {

double AnalyticPair::q(double xi) const {
  double c = std::sqrt(std::tgamma(2.0 * s + 1.5) /
                       (std::tgamma(2.0 * s + 1.0) * std::tgamma(0.5)));
  return c * std::pow(std::max(0.0, 1.0 - xi * xi), s);
}

double AnalyticPair::b_tilde() const {
  double c = std::sqrt(std::tgamma(2.0 * s + 1.5) /
                       (std::tgamma(2.0 * s + 1.0) * std::tgamma(0.5)));
  return std::pow(2.0, 2.0 * s) * std::tgamma(1.0 + s) * std::tgamma(s + 0.5) /
         std::tgamma(0.5) * c;
}

double AnalyticPair::phi(double t) const { return std::cos(t); }
double AnalyticPair::phi_dot(double t) const { return -std::sin(t); }

double AnalyticPair::kappa(double t) const {
  return t <= T0 ? (T0 - t) * (T0 - t) : 0.0;
}
double AnalyticPair::kappa_dot(double t) const {
  return t <= T0 ? -2.0 * (T0 - t) : 0.0;
}
double AnalyticPair::kappa_ddot(double t) const { return t <= T0 ? 2.0 : 0.0; }

double AnalyticPair::u_d(double t) const {
  return std::clamp(kappa(t), u_lo, u_hi);
}

double AnalyticPair::y_d(double xi, double t) const {
  return phi(t) * q(xi) - gamma * kappa_dot(t) * q(xi) +
         gamma * kappa(t) * b_tilde() + lambda * gamma * kappa(t) * q(xi);
}

double AnalyticPair::y_d_dot(double xi, double t) const {
  return phi_dot(t) * q(xi) - gamma * kappa_ddot(t) * q(xi) +
         gamma * kappa_dot(t) * b_tilde() + lambda * gamma * kappa_dot(t) * q(xi);
}

double AnalyticPair::b(double xi, double t) const {
  return phi_dot(t) * q(xi) + phi(t) * b_tilde() - u_d(t) * q(xi);
}

AnalyticPair analytic_pair(double s, double T0, double gamma, double lambda,
                           double u_lo, double u_hi) {
  AnalyticPair p;
  p.s = s;
  p.T0 = T0;
  p.gamma = gamma;
  p.lambda = lambda;
  p.u_lo = u_lo;
  p.u_hi = u_hi;
  return p;
}

}  // namespace fhjb
