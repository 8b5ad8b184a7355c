#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "tts/matrix_core.hpp"

using Eigen::MatrixXd;

namespace {

MatrixXd m2(double a, double b, double c, double d) {
  MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST_CASE("lambda_of on small examples") {
  CHECK(tts::lambda_of(m2(-2, 0, 0, -3)).lambda_gap == doctest::Approx(2.0));
  CHECK(tts::lambda_of(m2(0, 1, -1, 0)).lambda_gap == doctest::Approx(0.0).epsilon(1e-14));

  // characteristic polynomial by hand
  const MatrixXd a = m2(-1, 4, 0.5, -1);
  const auto [l1, l2] = oracle::eig2(a);
  const double top = std::max(l1.real(), l2.real());
  const auto s = tts::lambda_of(a);
  CHECK(s.abscissa == doctest::Approx(top).epsilon(1e-12));
  CHECK(s.abscissa == doctest::Approx(-1 + std::sqrt(2.0)).epsilon(1e-12));
  CHECK(s.lambda_gap == -s.abscissa);
  CHECK(s.eigen_real_parts.size() == 2);

  CHECK_THROWS_AS(tts::lambda_of(MatrixXd::Zero(2, 3)), tts::DimensionError);
}

TEST_CASE("lambda_of is similarity invariant") {
  std::mt19937_64 g(11);
  for (int t = 0; t < 20; ++t) {
    const MatrixXd a = oracle::random_matrix(g, 4, 4);
    const MatrixXd s = oracle::random_matrix(g, 4, 4) + 3 * MatrixXd::Identity(4, 4);
    const MatrixXd b = s * a * s.inverse();
    CHECK(std::abs(tts::lambda_of(a).abscissa - tts::lambda_of(b).abscissa) < 1e-8);
  }
}

TEST_CASE("is_hurwitz") {
  CHECK(tts::is_hurwitz(MatrixXd(-MatrixXd::Identity(2, 2))));
  CHECK_FALSE(tts::is_hurwitz(MatrixXd(MatrixXd::Zero(2, 2))));
  CHECK(tts::is_hurwitz(m2(-0.1, 1, 0, -0.1), 0.05));
  CHECK_FALSE(tts::is_hurwitz(m2(-0.1, 1, 0, -0.1), 0.2));
  CHECK_THROWS_AS(tts::is_hurwitz(MatrixXd(3, 1)), tts::DimensionError);
}

TEST_CASE("mat_exp examples") {
  CHECK(tts::mat_exp(MatrixXd(MatrixXd::Zero(3, 3))).isApprox(MatrixXd::Identity(3, 3)));

  const MatrixXd e = tts::mat_exp(m2(0.3, 0, 0, -1.7));
  CHECK(e(0, 0) == doctest::Approx(std::exp(0.3)).epsilon(1e-14));
  CHECK(e(1, 1) == doctest::Approx(std::exp(-1.7)).epsilon(1e-14));
  CHECK(std::abs(e(0, 1)) < 1e-15);

  const MatrixXd nil = tts::mat_exp(m2(0, 1, 0, 0));
  CHECK((nil - m2(1, 1, 0, 1)).norm() < 1e-14);

  CHECK_THROWS_AS(tts::mat_exp(MatrixXd(2, 3)), tts::DimensionError);
}

TEST_CASE("mat_exp against the Taylor oracle") {
  std::mt19937_64 g(5);
  for (int t = 0; t < 30; ++t) {
    const auto d = 1 + t % 5;
    MatrixXd a = oracle::random_matrix(g, d, d);
    a /= std::max(1.0, a.operatorNorm());
    const MatrixXd ref = oracle::taylor_exp(a, 50);
    CHECK(oracle::rel_fro(tts::mat_exp(a), ref) <= 1e-12);
  }
}

TEST_CASE("mat_exp of commuting sum factors") {
  std::mt19937_64 g(9);
  for (int t = 0; t < 10; ++t) {
    const Eigen::VectorXd x = oracle::random_matrix(g, 3, 1);
    const Eigen::VectorXd y = oracle::random_matrix(g, 3, 1);
    const MatrixXd a = x.asDiagonal(), b = y.asDiagonal();
    const MatrixXd lhs = tts::mat_exp(MatrixXd(a + b));
    const MatrixXd rhs = tts::mat_exp(a) * tts::mat_exp(b);
    CHECK(oracle::rel_fro(lhs, rhs) <= 1e-12);
  }
}

TEST_CASE("solve_lyapunov closed forms") {
  std::mt19937_64 g(3);
  const MatrixXd q = oracle::random_psd(g, 3);
  const MatrixXd s = tts::solve_lyapunov(MatrixXd(-0.5 * MatrixXd::Identity(3, 3)), q);
  CHECK(oracle::rel_fro(s, q) < 1e-12);

  MatrixXd h(1, 1), qq(1, 1);
  h << -2.5;
  qq << 3.0;
  CHECK(tts::solve_lyapunov(h, qq)(0, 0) == doctest::Approx(3.0 / 5.0).epsilon(1e-14));
}

TEST_CASE("solve_lyapunov against the Kronecker oracle") {
  std::mt19937_64 g(17);
  for (int t = 0; t < 40; ++t) {
    const auto d = 1 + t % 8;
    const MatrixXd a = oracle::random_hurwitz(g, d, 0.3);
    const MatrixXd q = oracle::random_psd(g, d, 1 + t % d);
    const MatrixXd s = tts::solve_lyapunov(a, q);
    const MatrixXd ref = oracle::kronecker_lyapunov(a, q);
    CHECK(oracle::rel_fro(s, ref) <= 1e-8);
    CHECK(tts::lyapunov_residual(a, s, q) <= 1e-10 * std::max(1.0, q.norm()));
    CHECK((s - s.transpose()).norm() <= 1e-12);
    CHECK(tts::min_symmetric_eigenvalue(s) >= -1e-10 * std::max(1.0, s.norm()));
  }
}

TEST_CASE("solve_lyapunov matches the covariance integral") {
  std::mt19937_64 g(23);
  for (int t = 0; t < 6; ++t) {
    const auto d = 1 + t % 3;
    const MatrixXd a = oracle::random_hurwitz(g, d, 1.0);
    const MatrixXd q = oracle::random_psd(g, d);
    // the tail beyond T = 40 is below e^{-80}
    const MatrixXd ref = oracle::lyapunov_quadrature(a, q, 40.0, 1e-3);
    CHECK((tts::solve_lyapunov(a, q) - ref).norm() <= 1e-6 * std::max(1.0, ref.norm()));
  }
}

TEST_CASE("solve_lyapunov errors") {
  CHECK_THROWS_AS(tts::solve_lyapunov(MatrixXd(MatrixXd::Identity(2, 2)),
                                      MatrixXd(MatrixXd::Identity(2, 2))),
                  tts::InfeasibilityError);
  CHECK_THROWS_AS(tts::solve_lyapunov(MatrixXd(-MatrixXd::Identity(2, 2)),
                                      MatrixXd(MatrixXd::Identity(3, 3))),
                  tts::DimensionError);
}

TEST_CASE("invert") {
  CHECK(tts::invert(MatrixXd(MatrixXd::Identity(3, 3))).isApprox(MatrixXd::Identity(3, 3)));
  CHECK((tts::invert(m2(2, 0, 0, 4)) - m2(0.5, 0, 0, 0.25)).norm() < 1e-15);
  CHECK((tts::invert(m2(1, 1, 0, 1)) - m2(1, -1, 0, 1)).norm() < 1e-15);
  CHECK_THROWS_AS(tts::invert(m2(1, 2, 2, 4)), tts::SingularityError);

  std::mt19937_64 g(8);
  for (int t = 0; t < 10; ++t) {
    const MatrixXd a = oracle::random_matrix(g, 5, 5) + 4 * MatrixXd::Identity(5, 5);
    CHECK((a * tts::invert(a) - MatrixXd::Identity(5, 5)).norm() <= 1e-10);
  }
}

TEST_CASE("psd_factor reproduces its input") {
  std::mt19937_64 g(2);
  const MatrixXd q = oracle::random_psd(g, 4, 2);
  const MatrixXd f = tts::psd_factor(q);
  CHECK((f * f.transpose() - q).norm() < 1e-10);
  CHECK(tts::is_symmetric_psd(q));
  CHECK_FALSE(tts::is_symmetric_psd(m2(1, 0, 0, -1)));
}
