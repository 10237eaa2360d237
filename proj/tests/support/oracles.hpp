#pragma once

// Independent reference computations for tests. Nothing here calls the
// library routine it is meant to check.

#include <random>
#include <vector>

#include "ioid/model.hpp"
#include "ioid/rls.hpp"

namespace ioid::testing {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi);
Matrix random_matrix(Rng& rng, int rows, int cols, double lo = -1.0, double hi = 1.0);
Matrix random_normal(Rng& rng, int rows, int cols);
std::vector<Vector> random_inputs(Rng& rng, std::size_t count, int m);
/// Symmetric positive definite with eigenvalues in [lo, hi].
Matrix random_spd(Rng& rng, int d, double lo, double hi);

/// Spectral radius of the block companion matrix of the model's F coefficients.
double spectral_radius(const IOModel& model);
/// Entries uniform in [-1, 1], with F_i rescaled by s^i so that every pole
/// lies inside `radius`.
IOModel random_stable_model(Rng& rng, int n, int p, int m, double radius = 0.9);
/// p x p matrix with spectral radius below `radius`.
Matrix random_stable_square(Rng& rng, int p, double radius);

enum class OracleVerdict { kSame, kDifferent, kAmbiguous };

struct OracleResult {
  OracleVerdict verdict = OracleVerdict::kAmbiguous;
  double max_rel_diff = 0.0;
};

/// Equivalence by simulation: shared random inputs, the lower-order model
/// started from random initial outputs, the higher-order model started from
/// the lower-order model's first outputs. Reports kDifferent as soon as one
/// trial differs by more than `diverge_tol` (relative to 1 + max |y|), kSame
/// when every trial stays within `same_tol`.
OracleResult simulation_oracle(const IOModel& a, const IOModel& b, Rng& rng, int steps = 100,
                               int trials = 20, double same_tol = 1e-8, double diverge_tol = 1e-4);

/// Plain forward recursion of the difference equation, written independently
/// of ioid::simulate.
std::vector<Vector> naive_simulate(const IOModel& model, const std::vector<Vector>& ics,
                                   const std::vector<Vector>& inputs);

/// Argmin of tr[(theta - theta0) P0^-1 (theta - theta0)^T] subject to
/// theta M = theta_true M, from the KKT system of the equality-constrained QP.
Matrix kkt_projected_limit(const Matrix& theta0, const Matrix& P0, const Matrix& theta_true,
                           const Matrix& M);

/// Least-squares fit of the map from reduced to full regressors on a long
/// simulated trajectory; equals the lift matrix (regressor form) when the
/// reduced regressor is persistently exciting.
Matrix lift_matrix_from_data(const IOModel& model, int n_hat, Rng& rng, std::size_t length = 400);

/// Regularized least squares in long double on explicitly formed normal equations.
Matrix batch_solve_long_double(const std::vector<RegressorSample>& samples, const Matrix& theta0,
                               const Matrix& P0);

/// Scalar models only: smallest value over a grid of D in [lo, hi] of the
/// remainders left when dividing both model polynomials (in q^-1) by
/// (1 + D q^-1). Near zero iff a common factor exists near the grid.
double grid_min_reduction_residual(const IOModel& high, double lo, double hi, int steps);

}  // namespace ioid::testing
