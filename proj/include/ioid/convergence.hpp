#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ioid/equivalence.hpp"
#include "ioid/model.hpp"

namespace ioid {

/// Limit of over-parameterized RLS: the order-n_hat model equivalent to the
/// truth that is closest to theta0 in the P0^-1 metric.
struct ProjectedLimit {
  Matrix theta_star;  // p x d_hat
  Matrix theta_true;  // zero-padded truth, p x d_hat
  Matrix H;           // d_hat x d_hat, H = M W^-1 M^T P0
  Matrix W;           // M^T P0 M
  Matrix M;           // lift matrix in regressor coordinates
};

/// [F_1..F_n 0 G_0..G_n 0] padded to order n_hat.
Matrix lift_true(const IOModel& model, int n_hat);

ProjectedLimit projected_limit(const IOModel& model, int n_hat, const Matrix& theta0,
                               const Matrix& P0);

/// ||(theta_hat - theta_true) M||_F relative to 1 + max(||theta_hat||, ||theta_true||).
/// For n_hat = n the lift is the identity.
double theta_equivalence_residual(const Matrix& theta_hat, const IOModel& model, int n_hat);

bool equivalence_via_theta(const Matrix& theta_hat, const IOModel& model, int n_hat,
                           double tol = kDefaultEquivalenceTol);

/// (theta0 - theta_true) P0^-1 C^-1: the limit of k (theta_k - theta_true)
/// when the fit order matches the truth.
Matrix predict_correct_order_asymptote(const Matrix& theta0, const Matrix& P0,
                                       const Matrix& theta_true, const Matrix& C);

/// (theta0 - theta_true) M W^-1 C^-1 W^-1 M^T P0: the limit of
/// k (theta_k - theta_star) for an over-parameterized fit, where C is the
/// Gram limit of the reduced regressor.
Matrix predict_overparam_asymptote(const Matrix& theta0, const Matrix& P0, const IOModel& model,
                                   int n_hat, const Matrix& C_reduced);

struct TraceRecord {
  long k = 0;
  std::vector<double> theta_flat;  // row-major theta_k
  double err_norm = 0.0;           // ||theta_k - theta_ref||_F
  double scaled_err_norm = 0.0;    // ||k (theta_k - theta_ref)||_F
  double residual_norm = 0.0;      // ||y_k - theta_k phi_k||
  double pmin_eig = 0.0;           // lambda_min(P_k)
};

struct TrackingOptions {
  std::vector<Vector> initial_outputs;  // defaults to zeros
  long stride = 1;                      // record every stride-th step (and the last)
  bool track_pmin = true;
};

struct ConvergenceTrace {
  int n = 0;
  int n_hat = 0;
  long steps = 0;
  std::string reference;  // "theta_true" or "theta_star"
  Matrix theta_ref;
  Matrix theta_final;
  std::vector<TraceRecord> records;

  Matrix gram_avg;  // empirical C (reduced regressor when n_hat > n)
  double gram_stabilization = 0.0;
  Matrix empirical_scaled_error;       // steps * (theta_final - theta_ref)
  std::optional<Matrix> predicted_asymptote;
  double asymptote_rel_error = 0.0;    // valid when predicted_asymptote is set
  double final_residual_norm = 0.0;
  std::string note;
};

/// Simulates `model` on `inputs`, runs `horizon` RLS steps at order n_hat and
/// logs the distance to theta_true (n_hat = n) or theta_star (n_hat > n).
/// Needs at least n_hat + horizon + 1 inputs.
ConvergenceTrace run_tracked_identification(const IOModel& model, int n_hat,
                                            const std::vector<Vector>& inputs, long horizon,
                                            const Matrix& theta0, const Matrix& P0,
                                            const TrackingOptions& options = {});

}  // namespace ioid
