#include "helpers.hpp"

#include <Eigen/Eigenvalues>

#include "ioid/rls.hpp"

using namespace ioid;
using namespace ioid::testing;

namespace {

std::vector<RegressorSample> random_samples(Rng& rng, int p, int d, int count) {
  const Matrix gen = random_normal(rng, p, d);
  std::vector<RegressorSample> out;
  for (int i = 0; i < count; ++i) {
    const Vector phi = random_normal(rng, d, 1);
    out.push_back({phi, gen * phi + 0.1 * random_normal(rng, p, 1)});
  }
  return out;
}

double max_eig(const Matrix& A) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(A, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

}  // namespace

TEST_SUITE("rls") {
TEST_CASE("regressor stacking examples") {
  Trajectory t;
  t.u = scalar_seq({0, 5, 3});
  t.y = scalar_seq({7, 2, 0});
  const RegressorSample s1 = build_regressor(t, 2, 1);
  CHECK((s1.phi - Eigen::Vector3d(-2, 3, 5)).norm() == 0.0);
  const RegressorSample s2 = build_regressor(t, 2, 2);
  Vector expected(5);
  expected << -2, -7, 3, 5, 0;
  CHECK((s2.phi - expected).norm() == 0.0);

  Trajectory zero;
  zero.u.assign(5, Vector::Zero(2));
  zero.y.assign(5, Vector::Zero(3));
  CHECK(build_regressor(zero, 4, 2).phi.norm() == 0.0);
  CHECK(build_regressor(zero, 4, 2).phi.size() == regressor_dim(2, 3, 2));
}

TEST_CASE("regressors start at the first fully windowed index") {
  Trajectory t;
  t.u = scalar_seq({NAN, 1, 2, 3, 4});
  t.y = scalar_seq({1, 2, 3, 4, 5});
  t.input_start = 1;
  CHECK(first_regressor_index(t, 2) == 3);
  const auto samples = build_regressors(t, 2);
  CHECK(samples.size() == 2);
  CHECK_THROWS_AS(build_regressor(t, 2, 2), ValidationError);
  for (const auto& s : samples) CHECK(s.phi.allFinite());
}

TEST_CASE("cost examples") {
  CHECK(cost(s(2.0), {}, s(2.0), s(1.0)) == 0.0);
  CHECK(cost(s(2.0), {{vs(1.0), vs(5.0)}}, s(2.0), s(1.0)) == doctest::Approx(9.0));
  const Matrix a = mat({{1, 2, 3}}), b = mat({{0, 0, 1}});
  CHECK(cost(a, {}, b, Matrix::Identity(3, 3)) == doctest::Approx((a - b).squaredNorm()));
  CHECK(regularizer(a, b, Matrix::Identity(3, 3)) == doctest::Approx((a - b).squaredNorm()));
  CHECK_THROWS(cost(a, {}, b, -Matrix::Identity(3, 3)));
}

TEST_CASE("batch solve examples") {
  CHECK((batch_solve(std::vector<RegressorSample>{}, mat({{1, 2}}), Matrix::Identity(2, 2)) -
         mat({{1, 2}})).norm() == 0.0);
  CHECK(batch_solve({{vs(1.0), vs(1.0)}}, s(0.0), s(1.0))(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("batch solve agrees with the long double oracle and zeroes the gradient") {
  Rng rng(40);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 1 + trial % 3, d = 2 + trial % 7;
    const auto samples = random_samples(rng, p, d, 5 + 7 * trial);
    const Matrix theta0 = random_normal(rng, p, d);
    const Matrix P0 = random_spd(rng, d, 0.1, 100.0);
    const Matrix theta = batch_solve(samples, theta0, P0);
    const Matrix oracle = batch_solve_long_double(samples, theta0, P0);
    CHECK((theta - oracle).norm() <= 1e-10 * (1.0 + oracle.norm()));
    Matrix grad = (theta - theta0) * P0.inverse();
    for (const auto& s : samples) grad -= (s.y - theta * s.phi) * s.phi.transpose();
    CHECK(grad.norm() < 1e-8);
  }
}

TEST_CASE("exact data leaves zero residual at the generator") {
  Rng rng(41);
  const IOModel model = random_stable_model(rng, 2, 2, 1);
  const Trajectory traj = simulate(model, {Vector::Ones(2), -Vector::Ones(2)}, random_inputs(rng, 80, 1), 80);
  const auto samples = build_regressors(traj, 2);
  for (const auto& s : samples) CHECK(residual(model.theta(), s).norm() < 1e-12);
  const Matrix theta0 = Matrix::Zero(2, model.regressor_dim());
  const Matrix P0 = default_P0(2, 2, 1);
  const Matrix theta = batch_solve(samples, theta0, P0);
  CHECK(cost(theta, samples, theta0, P0) <= regularizer(model.theta(), theta0, P0) + 1e-12);
}

TEST_CASE("rls step examples") {
  RlsState st = RlsState::initial(s(0.0), s(1.0));
  st = rls_step(std::move(st), {vs(1.0), vs(1.0)});
  CHECK(st.P(0, 0) == doctest::Approx(0.5));
  CHECK(st.theta(0, 0) == doctest::Approx(0.5));
  CHECK(st.k == 1);
  CHECK(residual(st.theta, {vs(1.0), vs(1.0)})(0) == doctest::Approx(0.5));
  CHECK(residual(Matrix::Zero(2, 3), {Vector::Ones(3), Eigen::Vector2d(4, 5)}) == Eigen::Vector2d(4, 5));

  Rng rng(42);
  const Matrix theta = random_normal(rng, 2, 3);
  const Matrix P = random_spd(rng, 3, 0.5, 2.0);
  RlsState zero = rls_step(RlsState::initial(theta, P), {Vector::Zero(3), Vector::Zero(2)});
  CHECK((zero.theta - theta).norm() == 0.0);
  CHECK((zero.P - P).norm() < 1e-15);
  CHECK(zero.k == 1);

  const Vector phi = random_normal(rng, 3, 1);
  RlsState exact = rls_step(RlsState::initial(theta, P), {phi, theta * phi});
  CHECK((exact.theta - theta).norm() < 1e-14);
  CHECK(max_eig(P) - max_eig(exact.P) >= -1e-14);
  CHECK((exact.P - P).norm() > 1e-6);

  CHECK_THROWS_AS(rls_step(RlsState::initial(theta, P), {Vector::Constant(3, NAN), Vector::Zero(2)}),
                  ValidationError);
  CHECK_THROWS_AS(rls_step(RlsState::initial(theta, P), {Vector::Zero(2), Vector::Zero(2)}),
                  ValidationError);
}

TEST_CASE("recursive estimate equals the batch minimizer at every step") {
  Rng rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    const int p = 1 + trial % 3, d = 3 + trial;
    const auto samples = random_samples(rng, p, d, 300);
    const Matrix theta0 = random_normal(rng, p, d);
    const Matrix P0 = 1e3 * Matrix::Identity(d, d);
    RlsState st = RlsState::initial(theta0, P0, true);
    NormalEquations normal(p, d);
    for (const auto& s : samples) {
      const Matrix P_inv_before = *st.P_inv;
      st = rls_step(std::move(st), s);
      normal.add(s);
      const Matrix batch = batch_solve(normal, theta0, P0);
      CHECK((st.theta - batch).norm() <= 1e-8 * (1.0 + batch.norm()));
      // Information identity: P_{k+1}^-1 = P_k^-1 + phi phi^T.
      const Matrix expected = P_inv_before + s.phi * s.phi.transpose();
      CHECK((st.P.inverse() - expected).norm() <= 1e-8 * (1.0 + expected.norm()));
      CHECK(st.asymmetry() == 0.0);
    }
  }
}

TEST_CASE("covariance is monotone non-increasing") {
  Rng rng(44);
  const int d = 6;
  RlsState st = RlsState::initial(Matrix::Zero(1, d), random_spd(rng, d, 1.0, 1e3));
  for (int k = 0; k < 200; ++k) {
    const double before = max_eig(st.P);
    st = rls_step(std::move(st), {random_normal(rng, d, 1), random_normal(rng, 1, 1)});
    CHECK(max_eig(st.P) <= before + 1e-12);
    CHECK(st.min_eigenvalue() > 0.0);
  }
}

TEST_CASE("default P0 is a scaled identity of the regressor size") {
  const Matrix P0 = default_P0(2, 2, 3);
  CHECK(P0.rows() == 13);
  CHECK((P0 - 1e3 * Matrix::Identity(13, 13)).norm() == 0.0);
  CHECK_THROWS_AS(default_P0(1, 1, 1, -1.0), ValidationError);
}
}
