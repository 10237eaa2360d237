#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ioid/model.hpp"

namespace ioid {

/// Lift matrix relating an order-n model to order n_hat > n.
///
/// `M` is the coefficient form: it maps an un-negated window [Y_{k,n}; U_{k,n_hat}]
/// to [Y_{k,n_hat}; U_{k,n_hat}] and is the matrix used in the cross-order
/// equivalence test [-F_hat G_hat] M = [-F_{n,q} G_{n,q}], q = n_hat - n.
///
/// Regressors negate their output entries, so the map from the reduced
/// regressor to the full regressor has its M2 block negated; that variant is
/// returned by regressor_form() and is the one paired with theta and P0.
struct LiftMatrix {
  int n = 0;
  int n_hat = 0;
  int p = 0;
  int m = 0;
  Matrix M;  // (p n_hat + m(n_hat+1)) x (p n + m(n_hat+1))

  int top_rows() const { return p * (n_hat - n); }
  Matrix M1() const { return M.topLeftCorner(top_rows(), p * n); }
  Matrix M2() const { return M.topRightCorner(top_rows(), m * (n_hat + 1)); }
  Matrix regressor_form() const;
};

/// Consolidated coefficients of an order-n_hat model expressed over an order-n window.
struct ConsolidatedCoeffs {
  Matrix F_cons;  // p x pn
  Matrix G_cons;  // p x m(n_hat+1)
};

enum class EquivalenceCondition { kSameOrderCoefficients, kCrossOrderLift };

struct EquivalenceCertificate {
  bool equivalent = false;
  EquivalenceCondition condition = EquivalenceCondition::kSameOrderCoefficients;
  int base_order = 0;
  int high_order = 0;
  double residual = 0.0;           // Frobenius norm relative to 1 + max ||theta||
  double absolute_residual = 0.0;  // Frobenius norm
  Matrix residual_matrix;
};

LiftMatrix build_lift_matrix(const IOModel& base, int n_hat);

ConsolidatedCoeffs consolidate(const IOModel& high, const IOModel& base);

/// Decides whether two models (orders in either order) produce identical
/// outputs from shared inputs and initial conditions.
EquivalenceCertificate is_equivalent(const IOModel& a, const IOModel& b,
                                     double tol = kDefaultEquivalenceTol);

/// Zero-pads a model to order n_hat >= n: [F 0 G 0].
IOModel trivial_embed(const IOModel& model, int n_hat);

/// Left-multiplies the model's polynomials by (I + D q^-1), giving an
/// equivalent model of order n+1. D is p x p.
IOModel lift_by_factor(const IOModel& model, const Matrix& D);

enum class ReductionStrategy { kVerifyCandidate, kScalarRootSearch, kNewtonSearch };

ReductionStrategy parse_reduction_strategy(std::string_view name);
std::string to_string(ReductionStrategy strategy);

struct ReductionOptions {
  double tol = kDefaultEquivalenceTol;
  std::optional<Matrix> candidate_F1;  // required by kVerifyCandidate
  std::uint64_t seed = 0;
  int random_starts = 32;
  int max_iterations = 200;
};

struct ReductionResult {
  std::optional<IOModel> reduced;
  Matrix witness_F1;   // best F_1 found (valid witness iff `reduced`)
  Matrix D;            // F_hat_1 - F_1
  double residual = 0.0;
  /// True when the search covered every candidate, so an empty result proves
  /// irreducibility. Only the scalar root search is exhaustive.
  bool exhaustive = false;
  bool diverged = false;
  std::string note;
};

/// Coefficients of the order n_hat-1 model built from a high-order model and
/// a candidate F_1, whether or not the candidate is a valid witness.
IOModel reduced_from_witness(const IOModel& high, const Matrix& F1);

/// Relative residual of the two reducibility conditions at D = F_hat_1 - F_1.
double reduction_residual(const IOModel& high, const Matrix& D);

/// One step of order reduction. Requires model order >= 1.
ReductionResult reduce_once(const IOModel& model, ReductionStrategy strategy,
                            const ReductionOptions& options = {});

struct ReducibilityReport {
  IOModel final_model;
  std::vector<IOModel> chain;      // input model first, final_model last
  std::vector<Matrix> witnesses;   // F_1 witness for each reduction
  bool reduced = false;            // at least one reduction succeeded
  bool proven_irreducible = false; // final model admits no lower order equivalent
  double last_residual = 0.0;      // best residual of the failed final attempt
  std::string note;
};

/// Repeats reduce_once until it fails. The scalar root search is used for
/// p = 1 and the Newton search otherwise, unless `strategy` says otherwise.
ReducibilityReport reducibility_check(const IOModel& model, const ReductionOptions& options = {},
                                      std::optional<ReductionStrategy> strategy = std::nullopt);

}  // namespace ioid
