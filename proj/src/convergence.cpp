#include "ioid/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "ioid/excitation.hpp"
#include "ioid/rls.hpp"

namespace ioid {

namespace {

Eigen::LLT<Matrix> factor(const Matrix& A, const char* what) {
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(std::string(what) + " is not positive definite");
  }
  return llt;
}

// X A^-1 for symmetric positive definite A.
Matrix right_solve(const Matrix& X, const Eigen::LLT<Matrix>& A) {
  return A.solve(X.transpose()).transpose();
}

void check_shapes(const Matrix& theta0, const Matrix& P0, int p, int d) {
  require(theta0.rows() == p && theta0.cols() == d, "theta0 shape does not match the fit order");
  require(P0.rows() == d && P0.cols() == d, "P0 size does not match the fit order");
}

}  // namespace

Matrix lift_true(const IOModel& model, int n_hat) {
  require(n_hat >= model.order(), "lift order must be at least the model order");
  return trivial_embed(model, n_hat).theta();
}

ProjectedLimit projected_limit(const IOModel& model, int n_hat, const Matrix& theta0,
                               const Matrix& P0) {
  require(n_hat > model.order(), "projected limit needs n_hat > n");
  check_shapes(theta0, P0, model.p(), regressor_dim(n_hat, model.p(), model.m()));
  factor(P0, "P0");

  ProjectedLimit out;
  out.M = build_lift_matrix(model, n_hat).regressor_form();
  out.theta_true = lift_true(model, n_hat);
  const Matrix P0M = P0 * out.M;
  out.W = out.M.transpose() * P0M;
  const auto W_llt = factor(out.W, "W = M^T P0 M");
  out.H = out.M * W_llt.solve(P0M.transpose());
  out.theta_star = theta0 + (out.theta_true - theta0) * out.H;
  return out;
}

double theta_equivalence_residual(const Matrix& theta_hat, const IOModel& model, int n_hat) {
  require(n_hat >= model.order(), "fit order must be at least the model order");
  require(theta_hat.rows() == model.p() &&
              theta_hat.cols() == regressor_dim(n_hat, model.p(), model.m()),
          "theta shape does not match the fit order");
  const Matrix truth = lift_true(model, n_hat);
  const double scale = 1.0 + std::max(theta_hat.norm(), truth.norm());
  if (n_hat == model.order()) return (theta_hat - truth).norm() / scale;
  const Matrix M = build_lift_matrix(model, n_hat).regressor_form();
  return ((theta_hat - truth) * M).norm() / scale;
}

bool equivalence_via_theta(const Matrix& theta_hat, const IOModel& model, int n_hat, double tol) {
  return theta_equivalence_residual(theta_hat, model, n_hat) <= tol;
}

Matrix predict_correct_order_asymptote(const Matrix& theta0, const Matrix& P0,
                                       const Matrix& theta_true, const Matrix& C) {
  require(theta0.rows() == theta_true.rows() && theta0.cols() == theta_true.cols(),
          "theta0 and theta_true shapes differ");
  require(P0.rows() == theta0.cols() && C.rows() == theta0.cols() && C.cols() == C.rows(),
          "P0 and C must match the regressor dimension");
  const auto P0_llt = factor(P0, "P0");
  const auto C_llt = factor(C, "Gram limit C");
  return right_solve(right_solve(theta0 - theta_true, P0_llt), C_llt);
}

Matrix predict_overparam_asymptote(const Matrix& theta0, const Matrix& P0, const IOModel& model,
                                   int n_hat, const Matrix& C_reduced) {
  require(n_hat > model.order(), "over-parameterized prediction needs n_hat > n");
  check_shapes(theta0, P0, model.p(), regressor_dim(n_hat, model.p(), model.m()));
  const Matrix M = build_lift_matrix(model, n_hat).regressor_form();
  require(C_reduced.rows() == M.cols() && C_reduced.cols() == M.cols(),
          "C must match the reduced regressor dimension");
  factor(P0, "P0");
  const auto W_llt = factor(M.transpose() * P0 * M, "W = M^T P0 M");
  const auto C_llt = factor(C_reduced, "Gram limit C");
  const Matrix left = (theta0 - lift_true(model, n_hat)) * M;
  return right_solve(right_solve(right_solve(left, W_llt), C_llt), W_llt) * M.transpose() * P0;
}

ConvergenceTrace run_tracked_identification(const IOModel& model, int n_hat,
                                            const std::vector<Vector>& inputs, long horizon,
                                            const Matrix& theta0, const Matrix& P0,
                                            const TrackingOptions& options) {
  const int n = model.order();
  const int p = model.p();
  const int m = model.m();
  require(n_hat >= n, "fit order below the true order is not supported");
  require(horizon >= n_hat, "horizon must be at least the fit order");
  require(options.stride >= 1, "trace stride must be positive");
  const int d = regressor_dim(n_hat, p, m);
  check_shapes(theta0, P0, p, d);

  const auto length = static_cast<std::size_t>(n_hat + horizon + 1);
  require(inputs.size() >= length, "run needs n_hat + horizon + 1 inputs");
  std::vector<Vector> ics = options.initial_outputs;
  if (ics.empty()) ics.assign(static_cast<std::size_t>(n), Vector::Zero(p));
  const Trajectory traj = simulate(model, ics, inputs, length);

  ConvergenceTrace trace;
  trace.n = n;
  trace.n_hat = n_hat;
  trace.steps = horizon;
  if (n_hat == n) {
    trace.reference = "theta_true";
    trace.theta_ref = model.theta();
  } else {
    trace.reference = "theta_star";
    trace.theta_ref = projected_limit(model, n_hat, theta0, P0).theta_star;
  }

  const int d_gram = n_hat == n ? d : p * n + m * (n_hat + 1);
  Matrix gram = Matrix::Zero(d_gram, d_gram);
  Matrix gram_half = gram;

  RlsState state = RlsState::initial(theta0, P0);
  auto record = [&](long k, const RegressorSample& sample) {
    TraceRecord r;
    r.k = k;
    r.theta_flat.resize(static_cast<std::size_t>(p * d));
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        r.theta_flat.data(), p, d) = state.theta;
    const Matrix err = state.theta - trace.theta_ref;
    r.err_norm = err.norm();
    r.scaled_err_norm = static_cast<double>(k) * r.err_norm;
    r.residual_norm = residual(state.theta, sample).norm();
    r.pmin_eig = options.track_pmin ? state.min_eigenvalue() : 0.0;
    trace.records.push_back(std::move(r));
  };

  const long first = first_regressor_index(traj, n_hat);
  for (long k = 0; k <= horizon; ++k) {
    const RegressorSample sample = build_regressor(traj, first + k, n_hat);
    if (k % options.stride == 0 || k == horizon) record(k, sample);
    if (k == horizon) {
      trace.final_residual_norm = residual(state.theta, sample).norm();
      break;
    }
    const Vector gram_phi =
        n_hat == n ? sample.phi : build_reduced_regressor(traj, first + k, n, n_hat);
    gram.noalias() += gram_phi * gram_phi.transpose();
    if (k + 1 == std::max<long>(1, horizon / 2)) gram_half = gram / static_cast<double>(k + 1);
    state = rls_step(std::move(state), sample);
  }

  trace.theta_final = state.theta;
  trace.gram_avg = gram / static_cast<double>(horizon);
  const double gnorm = trace.gram_avg.norm();
  trace.gram_stabilization = gnorm > 0.0 ? (trace.gram_avg - gram_half).norm() / gnorm : 0.0;
  trace.empirical_scaled_error = static_cast<double>(horizon) * (state.theta - trace.theta_ref);

  try {
    Matrix predicted =
        n_hat == n ? predict_correct_order_asymptote(theta0, P0, trace.theta_ref, trace.gram_avg)
                   : predict_overparam_asymptote(theta0, P0, model, n_hat, trace.gram_avg);
    const double pnorm = predicted.norm();
    const double diff = (trace.empirical_scaled_error - predicted).norm();
    trace.asymptote_rel_error = pnorm > 0.0 ? diff / pnorm : diff;
    trace.predicted_asymptote = std::move(predicted);
  } catch (const NumericalError& e) {
    trace.note = std::string("no asymptote prediction: ") + e.what();
  }
  return trace;
}

}  // namespace ioid
