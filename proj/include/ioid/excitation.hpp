#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "ioid/equivalence.hpp"
#include "ioid/model.hpp"

namespace ioid {

struct ExcitationOptions {
  /// Largest relative change of the running Gram average between k/2 and k
  /// for the persistent-excitation verdict.
  double pe_slope_tol = 5e-2;
  /// Floor on lambda_min of the partial sum; defaults to 10 eps trace.
  std::optional<double> weak_pe_threshold;
};

/// Finite-data excitation diagnostics. Both verdicts are heuristics: the
/// underlying definitions are limits as k goes to infinity.
struct ExcitationReport {
  std::vector<double> min_eig_curve;      // lambda_min(sum_{i<k} phi phi^T), k = 1..N
  std::vector<double> avg_min_eig_curve;  // lambda_min of the running average
  Matrix gram_avg;                        // (1/N) sum phi phi^T
  double gram_avg_min_eig = 0.0;
  double threshold = 0.0;                 // weak-PE floor actually used
  double stabilization = 0.0;             // ||avg_N - avg_{N/2}||_F / ||avg_N||_F
  bool weak_pe = false;
  bool pe = false;
  std::size_t window_begin = 0;
  std::size_t window_end = 0;
};

struct GramLimitEstimate {
  Matrix C;                   // running average at the last sample
  Matrix half;                // running average at half the samples
  double stabilization = 0.0; // ||C - half||_F / ||C||_F
  std::size_t count = 0;
};

/// [-y_{k-n_hat+n-1}; ..; -y_{k-n_hat}; u_k; ..; u_{k-n_hat}]: the n oldest
/// outputs of the n_hat window followed by the whole input window.
Vector build_reduced_regressor(const Trajectory& traj, long k, int n, int n_hat);

/// Max over k in [k_begin, k_end) of ||phi_{n_hat,k} - M phi_{n,n_hat,k}||.
/// An empty range means every k with a complete window.
double lift_identity_check(const Trajectory& traj, const IOModel& model, int n_hat,
                           long k_begin = 0, long k_end = -1);

ExcitationReport excitation_report(const std::vector<Vector>& regressors,
                                   const ExcitationOptions& options = {});

GramLimitEstimate estimate_gram_limit(const std::vector<Vector>& regressors);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& symmetric);

}  // namespace ioid
