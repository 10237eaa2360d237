#include "ioid/rls.hpp"

#include <cmath>
#include <utility>

namespace ioid {

namespace {

Eigen::LLT<Matrix> factor_spd(const Matrix& P0, const char* what) {
  require(P0.rows() == P0.cols(), std::string(what) + " must be square");
  Eigen::LLT<Matrix> llt(P0);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(std::string(what) + " is not positive definite");
  }
  return llt;
}

}  // namespace

RlsState RlsState::initial(Matrix theta0, Matrix P0, bool track_information) {
  require(theta0.cols() == P0.rows() && P0.rows() == P0.cols(),
          "theta0 columns must match the size of P0");
  const auto llt = factor_spd(P0, "P0");
  RlsState s;
  s.theta = std::move(theta0);
  s.P = std::move(P0);
  if (track_information) s.P_inv = llt.solve(Matrix::Identity(s.P.rows(), s.P.cols()));
  return s;
}

double RlsState::asymmetry() const { return (P - P.transpose()).cwiseAbs().maxCoeff(); }

double RlsState::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(P, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

void NormalEquations::add(const RegressorSample& sample) {
  require(sample.phi.size() == gram.rows() && sample.y.size() == cross.rows(),
          "sample dimensions do not match the normal equations");
  gram.noalias() += sample.phi * sample.phi.transpose();
  cross.noalias() += sample.y * sample.phi.transpose();
}

Matrix default_P0(int n, int p, int m, double scale) {
  require(scale > 0.0, "P0 scale must be positive");
  const int d = regressor_dim(n, p, m);
  return scale * Matrix::Identity(d, d);
}

long first_regressor_index(const Trajectory& traj, int order) {
  return static_cast<long>(traj.input_start) + order;
}

RegressorSample build_regressor(const Trajectory& traj, long k, int order) {
  require(order >= 0, "regressor order must be non-negative");
  require(k - order >= 0 && k - order >= static_cast<long>(traj.input_start),
          "regressor window starts before the recorded data");
  require(k < static_cast<long>(traj.size()), "regressor index beyond the trajectory");
  const int p = traj.p();
  const int m = traj.m();
  RegressorSample s;
  s.phi.resize(p * order + m * (order + 1));
  s.phi.head(p * order) = -stack_outputs(traj, k - 1, order);
  s.phi.tail(m * (order + 1)) = stack_inputs(traj, k, order + 1);
  s.y = traj.y[static_cast<std::size_t>(k)];
  return s;
}

std::vector<RegressorSample> build_regressors(const Trajectory& traj, int order) {
  std::vector<RegressorSample> out;
  const long first = first_regressor_index(traj, order);
  for (long k = first; k < static_cast<long>(traj.size()); ++k) {
    out.push_back(build_regressor(traj, k, order));
  }
  return out;
}

Vector residual(const Matrix& theta, const RegressorSample& sample) {
  require(theta.cols() == sample.phi.size() && theta.rows() == sample.y.size(),
          "theta shape does not match the sample");
  return sample.y - theta * sample.phi;
}

double regularizer(const Matrix& theta_hat, const Matrix& theta0, const Matrix& P0) {
  require(theta_hat.rows() == theta0.rows() && theta_hat.cols() == theta0.cols(),
          "theta and theta0 shapes differ");
  require(P0.rows() == theta0.cols(), "P0 size does not match theta");
  const auto llt = factor_spd(P0, "P0");
  const Matrix diff_t = (theta_hat - theta0).transpose();
  return (diff_t.array() * llt.solve(diff_t).array()).sum();
}

double cost(const Matrix& theta_hat, const std::vector<RegressorSample>& samples,
            const Matrix& theta0, const Matrix& P0) {
  double total = regularizer(theta_hat, theta0, P0);
  for (const auto& s : samples) total += residual(theta_hat, s).squaredNorm();
  return total;
}

Matrix batch_solve(const NormalEquations& normal, const Matrix& theta0, const Matrix& P0) {
  require(normal.gram.rows() == P0.rows() && theta0.cols() == P0.rows() &&
              theta0.rows() == normal.cross.rows(),
          "batch_solve shapes are inconsistent");
  const auto llt = factor_spd(P0, "P0");
  const Matrix P0_inv = llt.solve(Matrix::Identity(P0.rows(), P0.cols()));
  const Matrix A = normal.gram + P0_inv;
  const Matrix rhs = (normal.cross + theta0 * P0_inv).transpose();
  Eigen::LDLT<Matrix> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw NumericalError("normal equations are singular");
  return ldlt.solve(rhs).transpose();
}

Matrix batch_solve(const std::vector<RegressorSample>& samples, const Matrix& theta0,
                   const Matrix& P0) {
  NormalEquations normal(static_cast<int>(theta0.rows()), static_cast<int>(theta0.cols()));
  for (const auto& s : samples) normal.add(s);
  return batch_solve(normal, theta0, P0);
}

RlsState rls_step(RlsState state, const RegressorSample& sample) {
  require(sample.phi.size() == state.P.rows() && sample.y.size() == state.theta.rows(),
          "sample dimensions do not match the estimator");
  if (!sample.phi.allFinite() || !sample.y.allFinite()) {
    throw ValidationError("sample contains non-finite values");
  }
  const Vector Pphi = state.P * sample.phi;
  const double denom = 1.0 + sample.phi.dot(Pphi);
  state.P.noalias() -= (Pphi / denom) * Pphi.transpose();
  state.P = (0.5 * (state.P + state.P.transpose())).eval();
  const Vector innovation = sample.y - state.theta * sample.phi;
  state.theta.noalias() += innovation * (state.P * sample.phi).transpose();
  if (state.P_inv) state.P_inv->noalias() += sample.phi * sample.phi.transpose();
  ++state.k;
  return state;
}

}  // namespace ioid
