#pragma once

#include <optional>
#include <vector>

#include "ioid/model.hpp"

namespace ioid {

/// Regressor/output pair with y = theta * phi for exact data.
struct RegressorSample {
  Vector phi;
  Vector y;
};

/// Estimator state: theta is p x d, P is d x d.
struct RlsState {
  Matrix theta;
  Matrix P;
  long k = 0;
  std::optional<Matrix> P_inv;  // information matrix, maintained when requested

  /// theta0 with P0; `track_information` keeps P_inv = P0^-1 + sum phi phi^T.
  static RlsState initial(Matrix theta0, Matrix P0, bool track_information = false);

  /// Largest asymmetry |P - P^T| entry.
  double asymmetry() const;
  /// Smallest eigenvalue of P.
  double min_eigenvalue() const;
};

/// Sum of phi phi^T and y phi^T, enough to solve the regularized problem.
struct NormalEquations {
  Matrix gram;   // d x d
  Matrix cross;  // p x d

  NormalEquations(int p, int d) : gram(Matrix::Zero(d, d)), cross(Matrix::Zero(p, d)) {}
  void add(const RegressorSample& sample);
};

/// Scaled identity P0 = scale * I of the right size for an order-n fit.
Matrix default_P0(int n, int p, int m, double scale = 1e3);

/// phi_k = [-y_{k-1}; ..; -y_{k-n}; u_k; ..; u_{k-n}] with y = y_k.
RegressorSample build_regressor(const Trajectory& traj, long k, int order);

/// First index whose order-n regressor window lies inside the trajectory.
long first_regressor_index(const Trajectory& traj, int order);

/// Every regressor of the given order from first_regressor_index to the end.
std::vector<RegressorSample> build_regressors(const Trajectory& traj, int order);

/// z = y - theta * phi.
Vector residual(const Matrix& theta, const RegressorSample& sample);

/// sum z^T z + tr[(theta - theta0) P0^-1 (theta - theta0)^T].
double cost(const Matrix& theta_hat, const std::vector<RegressorSample>& samples,
            const Matrix& theta0, const Matrix& P0);

/// The regularization term alone.
double regularizer(const Matrix& theta_hat, const Matrix& theta0, const Matrix& P0);

/// Unique minimizer of cost(); solved by factorization.
Matrix batch_solve(const std::vector<RegressorSample>& samples, const Matrix& theta0,
                   const Matrix& P0);
Matrix batch_solve(const NormalEquations& normal, const Matrix& theta0, const Matrix& P0);

/// One recursive update: rank-one downdate of P, then the theta correction.
RlsState rls_step(RlsState state, const RegressorSample& sample);

}  // namespace ioid
