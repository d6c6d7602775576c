#pragma once

namespace fhjb {

// Closed-form solution pair for the manufactured tracking problem on (-1,1):
// the fractional Poisson solution q(xi) = c_s (1-xi^2)_+^s with constant
// right-hand side b_tilde, the switch-off profile kappa(t) = (T0-t)^2 1{t<=T0},
// the target control u_d = proj_U(kappa) and the induced target state y_d and
// forcing b.
struct AnalyticPair {
  double s = 0.75;
  double T0 = 3.0;
  double gamma = 0.01;
  double lambda = 0.5;
  double u_lo = 0.0;
  double u_hi = 1.0;

  double q(double xi) const;
  double b_tilde() const;  // constant in xi
  double phi(double t) const;
  double phi_dot(double t) const;
  double kappa(double t) const;
  double kappa_dot(double t) const;
  double kappa_ddot(double t) const;
  double u_d(double t) const;
  // y_d(xi,t) = phi q - gamma kappa' q + gamma kappa b~ + lambda gamma kappa q
  double y_d(double xi, double t) const;
  double y_d_dot(double xi, double t) const;  // time derivative
  // b(xi,t) = phi' q + phi b~ - u_d q
  double b(double xi, double t) const;
};

AnalyticPair analytic_pair(double s, double T0, double gamma, double lambda,
                           double u_lo, double u_hi);

}  // namespace fhjb
