#include "ioid/excitation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ioid/rls.hpp"

namespace ioid {

double min_eigenvalue(const Matrix& symmetric) {
  if (symmetric.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetric, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

Vector build_reduced_regressor(const Trajectory& traj, long k, int n, int n_hat) {
  require(n >= 0 && n_hat > n, "reduced regressor needs n_hat > n >= 0");
  require(k - n_hat >= static_cast<long>(traj.input_start) && k - n_hat >= 0,
          "reduced regressor window starts before the recorded data");
  require(k < static_cast<long>(traj.size()), "regressor index beyond the trajectory");
  const int p = traj.p();
  const int m = traj.m();
  Vector phi(p * n + m * (n_hat + 1));
  phi.head(p * n) = -stack_outputs(traj, k - n_hat + n - 1, n);
  phi.tail(m * (n_hat + 1)) = stack_inputs(traj, k, n_hat + 1);
  return phi;
}

double lift_identity_check(const Trajectory& traj, const IOModel& model, int n_hat, long k_begin,
                           long k_end) {
  require(traj.p() == model.p() && traj.m() == model.m(),
          "trajectory dimensions do not match the model");
  const Matrix M = build_lift_matrix(model, n_hat).regressor_form();
  const long first = first_regressor_index(traj, n_hat);
  const long begin = std::max(k_begin, first);
  const long end = k_end < 0 ? static_cast<long>(traj.size())
                             : std::min(k_end, static_cast<long>(traj.size()));
  double worst = 0.0;
  for (long k = begin; k < end; ++k) {
    const Vector full = build_regressor(traj, k, n_hat).phi;
    const Vector reduced = build_reduced_regressor(traj, k, model.order(), n_hat);
    worst = std::max(worst, (full - M * reduced).norm());
  }
  return worst;
}

ExcitationReport excitation_report(const std::vector<Vector>& regressors,
                                   const ExcitationOptions& options) {
  require(!regressors.empty(), "excitation report needs at least one regressor");
  require(options.pe_slope_tol > 0.0, "pe_slope_tol must be positive");
  const auto d = regressors.front().size();
  const std::size_t N = regressors.size();

  ExcitationReport report;
  report.window_begin = 0;
  report.window_end = N;
  report.min_eig_curve.reserve(N);
  report.avg_min_eig_curve.reserve(N);

  Matrix sum = Matrix::Zero(d, d);
  Matrix half_avg = sum;
  const std::size_t half = std::max<std::size_t>(1, N / 2);
  for (std::size_t i = 0; i < N; ++i) {
    require(regressors[i].size() == d, "regressors have inconsistent dimensions");
    sum.noalias() += regressors[i] * regressors[i].transpose();
    const double lam = min_eigenvalue(sum);
    report.min_eig_curve.push_back(lam);
    report.avg_min_eig_curve.push_back(lam / static_cast<double>(i + 1));
    if (i + 1 == half) half_avg = sum / static_cast<double>(half);
  }
  report.gram_avg = sum / static_cast<double>(N);
  report.gram_avg_min_eig = min_eigenvalue(report.gram_avg);

  const double trace = sum.trace();
  report.threshold = options.weak_pe_threshold.value_or(
      10.0 * std::numeric_limits<double>::epsilon() * trace);
  const double avg_norm = report.gram_avg.norm();
  report.stabilization =
      avg_norm > 0.0 ? (report.gram_avg - half_avg).norm() / avg_norm : 0.0;

  const double final_lam = report.min_eig_curve.back();
  const double half_lam = report.min_eig_curve[half - 1];
  report.weak_pe = final_lam > report.threshold && final_lam - half_lam > report.threshold;
  report.pe = report.weak_pe &&
              report.gram_avg_min_eig > report.threshold / static_cast<double>(N) &&
              report.stabilization <= options.pe_slope_tol;
  return report;
}

GramLimitEstimate estimate_gram_limit(const std::vector<Vector>& regressors) {
  require(!regressors.empty(), "gram limit needs at least one regressor");
  const auto d = regressors.front().size();
  const std::size_t N = regressors.size();
  const std::size_t half = std::max<std::size_t>(1, N / 2);
  GramLimitEstimate est;
  Matrix sum = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < N; ++i) {
    require(regressors[i].size() == d, "regressors have inconsistent dimensions");
    sum.noalias() += regressors[i] * regressors[i].transpose();
    if (i + 1 == half) est.half = sum / static_cast<double>(half);
  }
  est.C = sum / static_cast<double>(N);
  est.count = N;
  const double norm = est.C.norm();
  est.stabilization = norm > 0.0 ? (est.C - est.half).norm() / norm : 0.0;
  return est;
}

}  // namespace ioid
