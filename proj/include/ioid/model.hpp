#pragma once

#include <cstddef>
#include <vector>

#include "ioid/types.hpp"

namespace ioid {

/// Discrete-time MIMO input/output model of order n:
///
///   y[k+n] = -sum_{i=1..n} F_i y[k+n-i] + sum_{i=0..n} G_i u[k+n-i]
///
/// with F_i p-by-p and G_i p-by-m. Immutable once constructed.
class IOModel {
 public:
  IOModel(int p, int m, std::vector<Matrix> F, std::vector<Matrix> G);

  /// Order-n model with every coefficient zero.
  static IOModel zero(int n, int p, int m);

  /// Decode the flattened layout [F_1 .. F_n G_0 .. G_n].
  static IOModel from_theta(int n, int p, int m, const Matrix& theta);

  int order() const { return static_cast<int>(F_.size()); }
  int p() const { return p_; }
  int m() const { return m_; }

  const std::vector<Matrix>& F() const { return F_; }
  const std::vector<Matrix>& G() const { return G_; }
  const Matrix& F(int i) const { return F_.at(static_cast<std::size_t>(i - 1)); }
  const Matrix& G(int i) const { return G_.at(static_cast<std::size_t>(i)); }

  /// [F_1 .. F_n], p x pn.
  Matrix stacked_F() const;
  /// [G_0 .. G_n], p x m(n+1).
  Matrix stacked_G() const;
  /// [F_1 .. F_n G_0 .. G_n], p x (pn + m(n+1)).
  Matrix theta() const;

  /// Length of the regressor for this order: pn + m(n+1).
  int regressor_dim() const { return p_ * order() + m_ * (order() + 1); }

 private:
  int p_;
  int m_;
  std::vector<Matrix> F_;
  std::vector<Matrix> G_;
};

/// Regressor length pn + m(n+1) for an order-n model.
inline int regressor_dim(int n, int p, int m) { return p * n + m * (n + 1); }

/// Input/output record. Index i of `u` and `y` is time k0 + i. Entries of
/// `u` before `input_start` are undefined (NaN) and never read.
struct Trajectory {
  long k0 = 0;
  std::vector<Vector> u;
  std::vector<Vector> y;
  std::size_t input_start = 0;

  std::size_t size() const { return y.size(); }
  int p() const { return y.empty() ? 0 : static_cast<int>(y.front().size()); }
  int m() const { return u.empty() ? 0 : static_cast<int>(u.front().size()); }
};

/// Coefficients of the j-step output transition
///   y[k+n+j] = -Fj * Y_{k,n} + Gj * U_{k,n+j}.
struct TransitionPair {
  int j = 0;
  Matrix Fj;  // p x pn
  Matrix Gj;  // p x m(n+1+j)
};

/// Largest step offset accepted by transition_pair.
inline constexpr int kMaxTransitionStep = 10000;

/// Runs the difference equation for `horizon` time steps. The first n outputs
/// are the initial conditions; outputs n..horizon-1 are simulated. Inputs
/// must cover indices 0..horizon-1.
Trajectory simulate(const IOModel& model, const std::vector<Vector>& initial_outputs,
                    const std::vector<Vector>& inputs, std::size_t horizon);

/// The j-step shift of [F_1 .. F_n]: [F_{j+1} .. F_n 0] for j < n, zero otherwise.
Matrix shift_block(const IOModel& model, int j);

TransitionPair transition_pair(const IOModel& model, int j);

/// All transition pairs for offsets 0..j_max, sharing one pass of the recursion.
std::vector<TransitionPair> transition_sequence(const IOModel& model, int j_max);

/// Evaluates the j-step transition from a newest-first output window
/// (length pn) and input window (length m(n+1+j)).
Vector output_transition(const IOModel& model, const Vector& stacked_outputs,
                         const Vector& stacked_inputs, int j);

/// [y[newest]; y[newest-1]; ...] with `count` blocks.
Vector stack_outputs(const Trajectory& traj, long newest, int count);
/// [u[newest]; u[newest-1]; ...] with `count` blocks.
Vector stack_inputs(const Trajectory& traj, long newest, int count);

}  // namespace ioid
