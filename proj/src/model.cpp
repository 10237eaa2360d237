#include "ioid/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace ioid {

IOModel::IOModel(int p, int m, std::vector<Matrix> F, std::vector<Matrix> G)
    : p_(p), m_(m), F_(std::move(F)), G_(std::move(G)) {
  require(p_ >= 1, "model output dimension p must be positive");
  require(m_ >= 1, "model input dimension m must be positive");
  require(G_.size() == F_.size() + 1, "model needs exactly n+1 G blocks for n F blocks");
  for (std::size_t i = 0; i < F_.size(); ++i) {
    require(F_[i].rows() == p_ && F_[i].cols() == p_,
            "F_" + std::to_string(i + 1) + " must be p x p");
  }
  for (std::size_t i = 0; i < G_.size(); ++i) {
    require(G_[i].rows() == p_ && G_[i].cols() == m_,
            "G_" + std::to_string(i) + " must be p x m");
  }
}

IOModel IOModel::zero(int n, int p, int m) {
  require(n >= 0, "model order must be non-negative");
  return IOModel(p, m, std::vector<Matrix>(static_cast<std::size_t>(n), Matrix::Zero(p, p)),
                 std::vector<Matrix>(static_cast<std::size_t>(n + 1), Matrix::Zero(p, m)));
}

IOModel IOModel::from_theta(int n, int p, int m, const Matrix& theta) {
  require(n >= 0, "model order must be non-negative");
  require(theta.rows() == p && theta.cols() == ioid::regressor_dim(n, p, m),
          "theta shape does not match p x (pn + m(n+1))");
  std::vector<Matrix> F;
  std::vector<Matrix> G;
  for (int i = 0; i < n; ++i) F.emplace_back(theta.block(0, i * p, p, p));
  for (int i = 0; i <= n; ++i) G.emplace_back(theta.block(0, n * p + i * m, p, m));
  return IOModel(p, m, std::move(F), std::move(G));
}

Matrix IOModel::stacked_F() const {
  Matrix out(p_, p_ * order());
  for (int i = 0; i < order(); ++i) out.block(0, i * p_, p_, p_) = F_[static_cast<std::size_t>(i)];
  return out;
}

Matrix IOModel::stacked_G() const {
  Matrix out(p_, m_ * (order() + 1));
  for (int i = 0; i <= order(); ++i) out.block(0, i * m_, p_, m_) = G_[static_cast<std::size_t>(i)];
  return out;
}

Matrix IOModel::theta() const {
  Matrix out(p_, regressor_dim());
  out << stacked_F(), stacked_G();
  return out;
}

Trajectory simulate(const IOModel& model, const std::vector<Vector>& initial_outputs,
                    const std::vector<Vector>& inputs, std::size_t horizon) {
  const int n = model.order();
  const auto un = static_cast<std::size_t>(n);
  require(initial_outputs.size() == un, "simulate needs exactly n initial outputs");
  require(horizon >= un, "simulate horizon must be at least the model order");
  require(inputs.size() >= horizon, "simulate needs at least `horizon` inputs");
  for (const auto& y : initial_outputs) {
    require(y.size() == model.p(), "initial output dimension does not match p");
  }
  for (std::size_t i = 0; i < horizon; ++i) {
    require(inputs[i].size() == model.m(), "input dimension does not match m");
  }

  Trajectory traj;
  traj.u.assign(inputs.begin(), inputs.begin() + static_cast<std::ptrdiff_t>(horizon));
  traj.y.reserve(horizon);
  traj.y.assign(initial_outputs.begin(), initial_outputs.end());
  for (std::size_t k = un; k < horizon; ++k) {
    Vector next = model.G(0) * traj.u[k];
    for (int i = 1; i <= n; ++i) {
      const auto back = static_cast<std::size_t>(i);
      next.noalias() -= model.F(i) * traj.y[k - back];
      next.noalias() += model.G(i) * traj.u[k - back];
    }
    traj.y.push_back(std::move(next));
  }
  return traj;
}

Matrix shift_block(const IOModel& model, int j) {
  const int n = model.order();
  const int p = model.p();
  require(j >= 0, "shift offset must be non-negative");
  Matrix out = Matrix::Zero(p, p * n);
  for (int i = j + 1; i <= n; ++i) out.block(0, (i - j - 1) * p, p, p) = model.F(i);
  return out;
}

std::vector<TransitionPair> transition_sequence(const IOModel& model, int j_max) {
  require(j_max >= 0, "transition step must be non-negative");
  require(j_max <= kMaxTransitionStep, "transition step exceeds the configured cap of 10^4");
  const int n = model.order();
  const int p = model.p();
  const int m = model.m();
  const Matrix G0 = model.stacked_G();

  std::vector<TransitionPair> seq;
  seq.reserve(static_cast<std::size_t>(j_max) + 1);
  seq.push_back({0, model.stacked_F(), G0});
  for (int j = 1; j <= j_max; ++j) {
    TransitionPair next;
    next.j = j;
    next.Fj = shift_block(model, j);
    next.Gj = Matrix::Zero(p, m * (n + 1 + j));
    next.Gj.leftCols(G0.cols()) = G0;
    for (int i = 1; i <= std::min(j, n); ++i) {
      const TransitionPair& prev = seq[static_cast<std::size_t>(j - i)];
      next.Fj.noalias() -= model.F(i) * prev.Fj;
      next.Gj.rightCols(prev.Gj.cols()).noalias() -= model.F(i) * prev.Gj;
    }
    seq.push_back(std::move(next));
  }
  return seq;
}

TransitionPair transition_pair(const IOModel& model, int j) {
  return std::move(transition_sequence(model, j).back());
}

Vector output_transition(const IOModel& model, const Vector& stacked_outputs,
                         const Vector& stacked_inputs, int j) {
  const TransitionPair tp = transition_pair(model, j);
  require(stacked_outputs.size() == tp.Fj.cols(), "stacked output window must have length pn");
  require(stacked_inputs.size() == tp.Gj.cols(), "stacked input window must have length m(n+1+j)");
  return -tp.Fj * stacked_outputs + tp.Gj * stacked_inputs;
}

Vector stack_outputs(const Trajectory& traj, long newest, int count) {
  const int p = traj.p();
  require(count >= 0, "window length must be non-negative");
  if (count == 0) return Vector(0);
  require(newest - count + 1 >= 0 && newest < static_cast<long>(traj.size()),
          "output window falls outside the trajectory");
  Vector out(p * count);
  for (int i = 0; i < count; ++i) out.segment(i * p, p) = traj.y[static_cast<std::size_t>(newest - i)];
  return out;
}

Vector stack_inputs(const Trajectory& traj, long newest, int count) {
  const int m = traj.m();
  require(count >= 0, "window length must be non-negative");
  if (count == 0) return Vector(0);
  require(newest - count + 1 >= static_cast<long>(traj.input_start) &&
              newest < static_cast<long>(traj.u.size()),
          "input window falls outside the defined inputs");
  Vector out(m * count);
  for (int i = 0; i < count; ++i) out.segment(i * m, m) = traj.u[static_cast<std::size_t>(newest - i)];
  return out;
}

}  // namespace ioid
