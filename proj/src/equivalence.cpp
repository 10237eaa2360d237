#include "ioid/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <utility>

#include <unsupported/Eigen/Polynomials>

namespace ioid {

Matrix LiftMatrix::regressor_form() const {
  Matrix out = M;
  out.topRightCorner(top_rows(), m * (n_hat + 1)) *= -1.0;
  return out;
}

LiftMatrix build_lift_matrix(const IOModel& base, int n_hat) {
  const int n = base.order();
  const int p = base.p();
  const int m = base.m();
  require(n_hat > n, "lift order n_hat must exceed the base order");
  const int q = n_hat - n;
  const int rows = regressor_dim(n_hat, p, m);
  const int cols = p * n + m * (n_hat + 1);

  const auto seq = transition_sequence(base, q - 1);
  LiftMatrix lift{n, n_hat, p, m, Matrix::Zero(rows, cols)};
  // Row block i-1 (i = 1..q) predicts the output i steps before the newest
  // input: -F_{n,q-i} on the outputs, [0_{p x im} G_{n,q-i}] on the inputs.
  for (int i = 1; i <= q; ++i) {
    const TransitionPair& tp = seq[static_cast<std::size_t>(q - i)];
    const int r = (i - 1) * p;
    lift.M.block(r, 0, p, p * n) = -tp.Fj;
    lift.M.block(r, p * n + i * m, p, tp.Gj.cols()) = tp.Gj;
  }
  lift.M.bottomRows(cols).setIdentity();
  return lift;
}

ConsolidatedCoeffs consolidate(const IOModel& high, const IOModel& base) {
  require(high.p() == base.p() && high.m() == base.m(),
          "consolidate needs models with matching p and m");
  const int n = base.order();
  const int n_hat = high.order();
  require(n_hat > n, "consolidate needs high.order() > base.order()");
  const int p = base.p();
  const int m = base.m();
  const int q = n_hat - n;
  const auto seq = transition_sequence(base, q - 1);

  ConsolidatedCoeffs out;
  out.F_cons = Matrix::Zero(p, p * n);
  for (int i = q + 1; i <= n_hat; ++i) out.F_cons.block(0, (i - q - 1) * p, p, p) = high.F(i);
  out.G_cons = high.stacked_G();
  for (int i = 1; i <= q; ++i) {
    const TransitionPair& tp = seq[static_cast<std::size_t>(q - i)];
    out.F_cons.noalias() -= high.F(i) * tp.Fj;
    out.G_cons.block(0, i * m, p, tp.Gj.cols()).noalias() -= high.F(i) * tp.Gj;
  }
  return out;
}

EquivalenceCertificate is_equivalent(const IOModel& a, const IOModel& b, double tol) {
  require(a.p() == b.p(), "equivalence needs matching output dimension p");
  require(a.m() == b.m(), "equivalence needs matching input dimension m");
  require(tol >= 0.0, "tolerance must be non-negative");
  const IOModel& base = a.order() <= b.order() ? a : b;
  const IOModel& high = a.order() <= b.order() ? b : a;
  const double scale = 1.0 + std::max(a.theta().norm(), b.theta().norm());

  EquivalenceCertificate cert;
  cert.base_order = base.order();
  cert.high_order = high.order();
  if (base.order() == high.order()) {
    cert.condition = EquivalenceCondition::kSameOrderCoefficients;
    cert.residual_matrix = high.theta() - base.theta();
  } else {
    cert.condition = EquivalenceCondition::kCrossOrderLift;
    const int p = base.p();
    const int q = high.order() - base.order();
    const LiftMatrix lift = build_lift_matrix(base, high.order());
    Matrix high_row(p, lift.M.rows());
    high_row << -high.stacked_F(), high.stacked_G();
    const TransitionPair target = transition_pair(base, q);
    Matrix target_row(p, lift.M.cols());
    target_row << -target.Fj, target.Gj;
    cert.residual_matrix = high_row * lift.M - target_row;
  }
  cert.absolute_residual = cert.residual_matrix.norm();
  cert.residual = cert.absolute_residual / scale;
  cert.equivalent = cert.residual <= tol;
  return cert;
}

IOModel trivial_embed(const IOModel& model, int n_hat) {
  require(n_hat >= model.order(), "embedding order must be at least the model order");
  std::vector<Matrix> F = model.F();
  std::vector<Matrix> G = model.G();
  F.resize(static_cast<std::size_t>(n_hat), Matrix::Zero(model.p(), model.p()));
  G.resize(static_cast<std::size_t>(n_hat) + 1, Matrix::Zero(model.p(), model.m()));
  return IOModel(model.p(), model.m(), std::move(F), std::move(G));
}

IOModel lift_by_factor(const IOModel& model, const Matrix& D) {
  const int n = model.order();
  const int p = model.p();
  require(D.rows() == p && D.cols() == p, "lift factor D must be p x p");
  std::vector<Matrix> F;
  std::vector<Matrix> G;
  for (int i = 1; i <= n + 1; ++i) {
    const Matrix prev = i == 1 ? Matrix(Matrix::Identity(p, p)) : model.F(i - 1);
    F.emplace_back((i <= n ? model.F(i) : Matrix::Zero(p, p)) + D * prev);
  }
  G.push_back(model.G(0));
  for (int j = 1; j <= n + 1; ++j) {
    G.emplace_back((j <= n ? model.G(j) : Matrix::Zero(p, model.m())) + D * model.G(j - 1));
  }
  return IOModel(p, model.m(), std::move(F), std::move(G));
}

ReductionStrategy parse_reduction_strategy(std::string_view name) {
  if (name == "verify-candidate") return ReductionStrategy::kVerifyCandidate;
  if (name == "scalar-root-search") return ReductionStrategy::kScalarRootSearch;
  if (name == "newton-search") return ReductionStrategy::kNewtonSearch;
  throw ValidationError("unknown reduction strategy '" + std::string(name) + "'");
}

std::string to_string(ReductionStrategy strategy) {
  switch (strategy) {
    case ReductionStrategy::kVerifyCandidate: return "verify-candidate";
    case ReductionStrategy::kScalarRootSearch: return "scalar-root-search";
    case ReductionStrategy::kNewtonSearch: return "newton-search";
  }
  return "unknown";
}

namespace {

// Reduced coefficients for D = F_hat_1 - F_1, with F_0 taken as the identity
// so the order-1 to order-0 step uses the same recursion.
struct ReducedBlocks {
  std::vector<Matrix> F;  // F_0 .. F_{N-1}
  std::vector<Matrix> G;  // G_0 .. G_{N-1}
};

ReducedBlocks reduced_blocks(const IOModel& high, const Matrix& D) {
  const int N = high.order();
  const int p = high.p();
  ReducedBlocks b;
  b.F.emplace_back(Matrix::Identity(p, p));
  for (int i = 1; i < N; ++i) b.F.emplace_back(high.F(i) - D * b.F.back());
  b.G.push_back(high.G(0));
  for (int j = 1; j < N; ++j) b.G.emplace_back(high.G(j) - D * b.G.back());
  return b;
}

// Stacked residual [vec(D F_{N-1} - F_hat_N); vec(D G_{N-1} - G_hat_N)].
Vector residual_vector(const IOModel& high, const Matrix& D) {
  const int N = high.order();
  const ReducedBlocks b = reduced_blocks(high, D);
  const Matrix r1 = D * b.F.back() - high.F(N);
  const Matrix r2 = D * b.G.back() - high.G(N);
  Vector r(r1.size() + r2.size());
  r << Eigen::Map<const Vector>(r1.data(), r1.size()), Eigen::Map<const Vector>(r2.data(), r2.size());
  return r;
}

Matrix residual_jacobian(const IOModel& high, const Matrix& D) {
  const int N = high.order();
  const int p = high.p();
  const int m = high.m();
  const ReducedBlocks b = reduced_blocks(high, D);
  Matrix J(p * p + p * m, p * p);
  for (int col = 0; col < p; ++col) {
    for (int row = 0; row < p; ++row) {
      Matrix E = Matrix::Zero(p, p);
      E(row, col) = 1.0;
      Matrix dF = Matrix::Zero(p, p);
      Matrix dG = Matrix::Zero(p, m);
      for (int i = 1; i < N; ++i) {
        dF = -E * b.F[static_cast<std::size_t>(i - 1)] - D * dF;
        dG = -E * b.G[static_cast<std::size_t>(i - 1)] - D * dG;
      }
      const Matrix d1 = E * b.F.back() + D * dF;
      const Matrix d2 = E * b.G.back() + D * dG;
      const int c = col * p + row;
      J.col(c).head(p * p) = Eigen::Map<const Vector>(d1.data(), d1.size());
      J.col(c).tail(p * m) = Eigen::Map<const Vector>(d2.data(), d2.size());
    }
  }
  return J;
}

struct SearchOutcome {
  Matrix D;
  double residual = std::numeric_limits<double>::infinity();
  bool diverged = false;
};

// Levenberg-Marquardt on the reducibility residual starting from D0.
SearchOutcome levenberg_marquardt(const IOModel& high, Matrix D, int max_iterations) {
  const int p = high.p();
  const double scale = 1.0 + high.theta().norm();
  Vector r = residual_vector(high, D);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  SearchOutcome out;
  for (int it = 0; it < max_iterations && cost > 0.0; ++it) {
    const Matrix J = residual_jacobian(high, D);
    const Matrix JtJ = J.transpose() * J;
    const Vector g = J.transpose() * r;
    bool accepted = false;
    while (lambda < 1e12) {
      Matrix A = JtJ;
      A.diagonal().array() += lambda * (1.0 + JtJ.diagonal().array());
      const Vector step = A.ldlt().solve(-g);
      Matrix trial = D + Eigen::Map<const Matrix>(step.data(), p, p);
      const Vector r_trial = residual_vector(high, trial);
      const double c_trial = r_trial.squaredNorm();
      if (std::isfinite(c_trial) && c_trial < cost) {
        const double rel_step = step.norm() / (1.0 + D.norm());
        D = std::move(trial);
        r = r_trial;
        cost = c_trial;
        lambda = std::max(lambda / 3.0, 1e-15);
        accepted = true;
        if (rel_step < 1e-16) it = max_iterations;
        break;
      }
      lambda *= 4.0;
    }
    if (!accepted) break;
    if (!D.allFinite() || D.norm() > 1e8 * scale) {
      out.diverged = true;
      break;
    }
  }
  out.D = std::move(D);
  out.residual = std::sqrt(cost) / scale;
  if (!std::isfinite(out.residual)) out.diverged = true;
  return out;
}

// Coefficients (ascending powers of d) of the scalar polynomials in d whose
// common real roots are the reduction witnesses when p = 1.
std::vector<std::vector<double>> scalar_condition_polynomials(const IOModel& high) {
  using Poly = std::vector<double>;
  const int N = high.order();
  const int m = high.m();
  auto times_minus_d_plus = [](const Poly& prev, double c) {
    Poly out(prev.size() + 1, 0.0);
    out[0] = c;
    for (std::size_t i = 0; i < prev.size(); ++i) out[i + 1] -= prev[i];
    return out;
  };
  auto times_d_minus = [](const Poly& prev, double c) {
    Poly out(prev.size() + 1, 0.0);
    out[0] = -c;
    for (std::size_t i = 0; i < prev.size(); ++i) out[i + 1] += prev[i];
    return out;
  };

  std::vector<Poly> polys;
  Poly f{1.0};
  for (int i = 1; i < N; ++i) f = times_minus_d_plus(f, high.F(i)(0, 0));
  polys.push_back(times_d_minus(f, high.F(N)(0, 0)));
  for (int c = 0; c < m; ++c) {
    Poly g{high.G(0)(0, c)};
    for (int j = 1; j < N; ++j) g = times_minus_d_plus(g, high.G(j)(0, c));
    polys.push_back(times_d_minus(g, high.G(N)(0, c)));
  }
  return polys;
}

ReductionResult finish(const IOModel& model, const Matrix& D, double residual, double tol) {
  ReductionResult out;
  out.D = D;
  out.witness_F1 = model.F(1) - D;
  out.residual = residual;
  if (residual <= tol) {
    IOModel reduced = reduced_from_witness(model, out.witness_F1);
    const EquivalenceCertificate cert = is_equivalent(model, reduced, tol);
    if (cert.equivalent) {
      out.reduced = std::move(reduced);
    } else {
      out.note = "witness met the reducibility conditions but failed the equivalence check";
    }
  }
  return out;
}

}  // namespace

IOModel reduced_from_witness(const IOModel& high, const Matrix& F1) {
  require(high.order() >= 1, "reduction needs a model of order at least 1");
  require(F1.rows() == high.p() && F1.cols() == high.p(), "witness F_1 must be p x p");
  const Matrix D = high.F(1) - F1;
  ReducedBlocks b = reduced_blocks(high, D);
  b.F.erase(b.F.begin());
  return IOModel(high.p(), high.m(), std::move(b.F), std::move(b.G));
}

double reduction_residual(const IOModel& high, const Matrix& D) {
  require(high.order() >= 1, "reduction needs a model of order at least 1");
  require(D.rows() == high.p() && D.cols() == high.p(), "D must be p x p");
  return residual_vector(high, D).norm() / (1.0 + high.theta().norm());
}

ReductionResult reduce_once(const IOModel& model, ReductionStrategy strategy,
                            const ReductionOptions& options) {
  require(model.order() >= 1, "reduction needs a model of order at least 1");
  require(options.tol >= 0.0, "tolerance must be non-negative");
  const int p = model.p();

  switch (strategy) {
    case ReductionStrategy::kVerifyCandidate: {
      require(options.candidate_F1.has_value(), "verify-candidate needs a candidate F_1");
      const Matrix D = model.F(1) - *options.candidate_F1;
      ReductionResult out = finish(model, D, reduction_residual(model, D), options.tol);
      if (!out.reduced && out.note.empty()) out.note = "candidate F_1 is not a witness";
      return out;
    }

    case ReductionStrategy::kScalarRootSearch: {
      require(p == 1, "scalar-root-search applies only to p = 1 models");
      const auto polys = scalar_condition_polynomials(model);
      Eigen::VectorXd coeffs = Eigen::Map<const Eigen::VectorXd>(
          polys.front().data(), static_cast<Eigen::Index>(polys.front().size()));
      Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
      solver.compute(coeffs);

      SearchOutcome best;
      for (Eigen::Index i = 0; i < solver.roots().size(); ++i) {
        Matrix D0(1, 1);
        D0(0, 0) = solver.roots()[i].real();
        // Polishing on the joint residual recovers accuracy lost near repeated roots.
        SearchOutcome polished = levenberg_marquardt(model, D0, 50);
        const double raw = reduction_residual(model, D0);
        if (raw <= polished.residual || polished.diverged) {
          polished.D = D0;
          polished.residual = raw;
        }
        if (polished.residual < best.residual) best = std::move(polished);
      }
      ReductionResult out = finish(model, best.D, best.residual, options.tol);
      out.exhaustive = true;
      if (!out.reduced && out.note.empty()) {
        out.note = "no real common root of the reducibility polynomials";
      }
      return out;
    }

    case ReductionStrategy::kNewtonSearch: {
      std::mt19937_64 rng(options.seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      const double spread = 1.0 + model.F(1).norm();
      std::vector<Matrix> starts{model.F(1), Matrix::Zero(p, p)};
      for (int s = 0; s < options.random_starts; ++s) {
        Matrix D0(p, p);
        for (Eigen::Index i = 0; i < D0.size(); ++i) D0(i) = spread * normal(rng);
        starts.push_back(std::move(D0));
      }
      SearchOutcome best;
      bool any_converged_run = false;
      for (const Matrix& D0 : starts) {
        SearchOutcome run = levenberg_marquardt(model, D0, options.max_iterations);
        if (!run.diverged) any_converged_run = true;
        if (run.residual < best.residual) best = std::move(run);
        if (best.residual <= options.tol * 1e-3) break;
      }
      if (!std::isfinite(best.residual)) {
        best.D = Matrix::Zero(p, p);
        best.residual = reduction_residual(model, best.D);
      }
      ReductionResult out = finish(model, best.D, best.residual, options.tol);
      out.diverged = !any_converged_run;
      if (!out.reduced && out.note.empty()) {
        out.note = out.diverged ? "newton search diverged from every start"
                                : "no witness found (not a proof of irreducibility)";
      }
      return out;
    }
  }
  throw ValidationError("unknown reduction strategy");
}

ReducibilityReport reducibility_check(const IOModel& model, const ReductionOptions& options,
                                      std::optional<ReductionStrategy> strategy) {
  ReducibilityReport report{model, {model}, {}, false, false, 0.0, {}};
  const ReductionStrategy chosen =
      strategy.value_or(model.p() == 1 ? ReductionStrategy::kScalarRootSearch
                                       : ReductionStrategy::kNewtonSearch);
  require(chosen != ReductionStrategy::kVerifyCandidate || options.candidate_F1.has_value(),
          "verify-candidate needs a candidate F_1");
  ReductionOptions step_options = options;
  ReductionStrategy step_strategy = chosen;
  while (true) {
    if (report.final_model.order() == 0) {
      report.proven_irreducible = true;
      report.note = "order-0 models have no lower-order equivalent";
      break;
    }
    ReductionResult step = reduce_once(report.final_model, step_strategy, step_options);
    if (!step.reduced) {
      report.last_residual = step.residual;
      report.proven_irreducible = step.exhaustive;
      report.note = step.note;
      break;
    }
    report.reduced = true;
    report.witnesses.push_back(step.witness_F1);
    report.chain.push_back(*step.reduced);
    report.final_model = *step.reduced;
    // A user-supplied candidate only applies to the first step.
    if (step_strategy == ReductionStrategy::kVerifyCandidate) {
      step_strategy = report.final_model.p() == 1 ? ReductionStrategy::kScalarRootSearch
                                                  : ReductionStrategy::kNewtonSearch;
      step_options.candidate_F1.reset();
    }
  }
  return report;
}

}  // namespace ioid
