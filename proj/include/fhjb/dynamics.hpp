#pragma once
#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <vector>

#include "fhjb/fem.hpp"

namespace fhjb {

struct NumericalBlowup : std::runtime_error {
  double t;
  explicit NumericalBlowup(double t_)
      : std::runtime_error("numerical blowup at t=" + std::to_string(t_)), t(t_) {}
};

enum class Scheme { ExplicitEuler, ImexEuler };

enum class Nonlinearity {
  None,
  CubicComponentwise,  // F_i = y_i^2 - y_i^3 applied to the coefficient vector
  CubicGalerkin,       // F_i = <F(y_h), phi_i> for the P1 interpolant y_h
};

// One-step map of the semi-discrete system M y' = -alpha A y + F(y) + B(t)
// + sum_k u_k Q_k.  Explicit Euler inverts M; IMEX Euler treats the stiff
// fractional part implicitly and everything else explicitly:
//   (M + dt alpha A) y+ = M y + dt (F(y) + B(t) + sum u_k Q_k).
// The forcing is evaluated at the left endpoint t of the step; an empty
// forcing function means zero.
class DiscreteDynamics {
 public:
  DiscreteDynamics(FeMesh mesh, Mat M, Mat A, double alpha,
                   std::vector<Vec> Q, Nonlinearity nl,
                   std::function<Vec(double)> forcing, Scheme scheme, double dt);

  Vec step(const Vec& x, const Vec& u, double t) const;

  // Affine-in-control split: step(x,u,t) == step_base(x,t) + sum u_k dir(k),
  // bitwise when assembled in that order (the full step uses the same split
  // internally).  Valid because F and B do not depend on u.
  Vec step_base(const Vec& x, double t) const;
  const Vec& control_dir(int k) const { return dirs_[k]; }
  int num_controls() const { return static_cast<int>(Q_.size()); }

  double dt() const { return dt_; }
  const Mat& mass() const { return M_; }
  const Mat& stiffness() const { return A_; }
  const FeMesh& mesh() const { return mesh_; }
  Scheme scheme() const { return scheme_; }

  // Reaction term in assembled (load-vector) form, used by step().
  Vec reaction(const Vec& x) const;

 private:
  FeMesh mesh_;
  Mat M_, A_;
  double alpha_;
  std::vector<Vec> Q_;
  Nonlinearity nl_;
  std::function<Vec(double)> forcing_;
  Scheme scheme_;
  double dt_;
  Eigen::LLT<Mat> solver_;       // (M + dt alpha A) for IMEX, M for explicit
  std::vector<Vec> dirs_;        // dt * solver^{-1} Q_k
};

// Discounted space-time distance sqrt(sum_k dt e^{-lambda k dt} e_k' M e_k)
// over k = 0..L-2 (left-endpoint rule), e_k the trajectory difference.
double discounted_l2_distance(const std::vector<Vec>& traj1,
                              const std::vector<Vec>& traj2, const Mat& M,
                              double lambda, double dt);

}  // namespace fhjb
