#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "tts/asymptotics.hpp"
#include "tts/errors.hpp"
#include "tts/matrix_core.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd s1(double x) { return MatrixXd::Constant(1, 1, x); }

tts::ProblemSpec scalar(double q11, double q12, double q21, double q22, double g11 = 1,
                        double g22 = 1, double g12 = 0) {
  tts::ProblemSpec p;
  p.d = p.d_prime = 1;
  p.theta_star = VectorXd::Zero(1);
  p.mu_star = VectorXd::Zero(1);
  p.Q11 = s1(q11);
  p.Q12 = s1(q12);
  p.Q21 = s1(q21);
  p.Q22 = s1(q22);
  p.noise.gamma = (MatrixXd(2, 2) << g11, g12, g12, g22).finished();
  return p;
}

tts::StepSchedule sched(double beta0, double b) {
  tts::StepSchedule s;
  s.beta0 = beta0;
  s.b = b;
  s.gamma0 = 1;
  s.a = 0.6;
  return s;
}

tts::ProblemSpec exchanged(const tts::ProblemSpec& p) {
  tts::ProblemSpec q;
  q.d = p.d_prime;
  q.d_prime = p.d;
  q.theta_star = p.mu_star;
  q.mu_star = p.theta_star;
  q.Q11 = p.Q22;
  q.Q22 = p.Q11;
  q.Q12 = p.Q21;
  q.Q21 = p.Q12;
  const auto d = p.d, dp = p.d_prime;
  q.noise.gamma.resize(d + dp, d + dp);
  q.noise.gamma << p.noise.block22(d), p.noise.block21(d), p.noise.block12(d), p.noise.block11(d);
  return q;
}

}  // namespace

TEST_CASE("sigma_theta closed forms") {
  // H = -h with no coupling, Gamma_theta = g
  const double h = 1.5, g = 0.8;
  const auto p = scalar(-h, 0, 0, -1, g, 1);
  CHECK(tts::sigma_theta(p, sched(2, 0.8))(0, 0) == doctest::Approx(g / (2 * h)).epsilon(1e-14));
  const double beta0 = 2.0;
  CHECK(tts::sigma_theta(p, sched(beta0, 1.0))(0, 0) ==
        doctest::Approx(g / (2 * h - 1 / beta0)).epsilon(1e-14));

  const auto bad = sched(1.0 / (2 * h) * 0.9, 1.0);
  try {
    (void)tts::sigma_theta(p, bad);
    FAIL("expected infeasibility");
  } catch (const tts::InfeasibilityError& e) {
    CHECK(std::string(e.what()).find("A3(ii)") != std::string::npos);
  }

  CHECK_THROWS_AS(tts::sigma_theta(scalar(0.5, 0, 0, -1), sched(2, 0.8)), tts::InfeasibilityError);
}

TEST_CASE("sigma_mu closed forms") {
  const auto p = scalar(-1, 0.3, 0.2, -2.5, 1, 0.7);
  CHECK(tts::sigma_mu(p)(0, 0) == doctest::Approx(0.7 / 5.0).epsilon(1e-14));
  auto z = tts::library_problem("linear-2x2");
  z.noise.gamma.bottomRightCorner(2, 2).setZero();
  z.noise.gamma.topRightCorner(2, 2).setZero();
  z.noise.gamma.bottomLeftCorner(2, 2).setZero();
  CHECK(tts::sigma_mu(z).norm() < 1e-15);
  CHECK_THROWS_AS(tts::sigma_mu(scalar(-1, 0, 0, 0.5)), tts::InfeasibilityError);
}

TEST_CASE("Sigma_theta and Sigma_mu against quadrature") {
  const auto p = tts::library_problem("linear-2x2");
  const MatrixXd k = p.Q12 * p.Q22.inverse();
  const MatrixXd h = p.Q11 - k * p.Q21;
  const MatrixXd g11 = p.noise.gamma.topLeftCorner(2, 2);
  const MatrixXd g12 = p.noise.gamma.topRightCorner(2, 2);
  const MatrixXd g22 = p.noise.gamma.bottomRightCorner(2, 2);
  const MatrixXd gt = g11 + k * g22 * k.transpose() - g12 * k.transpose() - k * g12.transpose();

  const MatrixXd ref_t = oracle::lyapunov_quadrature(h, gt, 40.0, 1e-3);
  CHECK((tts::sigma_theta(p, sched(2, 0.8)) - ref_t).norm() < 1e-6);

  const double beta0 = 3.0;
  const MatrixXd hs = h + MatrixXd::Identity(2, 2) / (2 * beta0);
  const MatrixXd ref_c = oracle::lyapunov_quadrature(hs, gt, 60.0, 1e-3);
  CHECK((tts::sigma_theta(p, sched(beta0, 1.0)) - ref_c).norm() < 1e-6);

  const MatrixXd ref_m = oracle::lyapunov_quadrature(p.Q22, g22, 40.0, 1e-3);
  CHECK((tts::sigma_mu(p) - ref_m).norm() < 1e-6);
}

TEST_CASE("Lyapunov residuals") {
  std::mt19937_64 rng(31);
  for (const auto& name : tts::library_problem_names()) {
    const auto p = tts::library_problem(name);
    for (double b : {0.8, 1.0}) {
      const auto s = sched(5.0, b);
      const auto r = tts::theory_report(p, s);
      const MatrixXd a = r.H + (b == 1.0 ? 1 / (2 * s.beta0) : 0.0) *
                                   MatrixXd::Identity(p.d, p.d);
      CHECK(tts::lyapunov_residual(a, r.Sigma_theta, r.Gamma_theta) <=
            1e-10 * std::max(1.0, r.Gamma_theta.norm()));
      const MatrixXd g22 = p.noise.block22(p.d);
      CHECK(tts::lyapunov_residual(p.Q22, r.Sigma_mu, g22) <= 1e-10 * std::max(1.0, g22.norm()));
      CHECK(r.critical == (b == 1.0));
      for (const MatrixXd* m : {&r.Sigma_theta, &r.Sigma_mu, &r.optimal_theta_cov,
                                &r.optimal_mu_cov, &r.averaged_cov}) {
        CHECK(tts::is_symmetric_psd(*m));
      }
    }
  }
}

TEST_CASE("critical shift vanishes as beta0 grows") {
  const auto p = scalar(-2, 1, 1, -1, 1.3, 0.6, 0.2);
  const double limit = tts::sigma_theta(p, sched(2, 0.8))(0, 0);
  double prev_gap = INFINITY;
  for (double beta0 : {2.0, 20.0, 200.0}) {
    const double gap = std::abs(tts::sigma_theta(p, sched(beta0, 1.0))(0, 0) - limit);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(prev_gap < 0.01 * limit);
}

TEST_CASE("optimal covariances") {
  const auto p = scalar(-1.5, 0, 0, -2, 0.9, 0.4);
  const auto [ct, cm] = tts::optimal_covariances(p);
  CHECK(ct(0, 0) == doctest::Approx(0.9 / (1.5 * 1.5)).epsilon(1e-14));
  CHECK(cm(0, 0) == doctest::Approx(0.4 / 4.0).epsilon(1e-14));

  auto q = tts::library_problem("linear-2x2");
  q.Q12.setZero();
  q.Q11 = -MatrixXd::Identity(2, 2);
  CHECK((tts::optimal_covariances(q).first - q.noise.block11(2)).norm() < 1e-14);

  // optimal gains through the gain Lyapunov equation
  for (const auto& name : tts::library_problem_names()) {
    const auto l = tts::library_problem(name);
    const auto g = tts::optimal_gains(l);
    const auto [ot, om] = tts::optimal_covariances(l);
    CHECK((tts::gain_covariance_theta(l, g.A_theta) - ot).norm() < 1e-10);
    // and the equation itself, written out
    const MatrixXd a = g.A_theta * tts::derive_H(l) + 0.5 * MatrixXd::Identity(l.d, l.d);
    const MatrixXd rhs = g.A_theta * tts::gamma_theta(l) * g.A_theta.transpose();
    CHECK((oracle::kronecker_lyapunov(a, rhs) - ot).norm() < 1e-10);
    CHECK(om.rows() == l.d_prime);
  }
}

TEST_CASE("gain covariances for non-optimal gains") {
  const auto l = tts::library_problem("linear-2x2");
  const MatrixXd at = 2.0 * MatrixXd::Identity(2, 2);
  const MatrixXd am = 0.7 * MatrixXd::Identity(2, 2);
  const MatrixXd a = at * tts::derive_H(l) + 0.5 * MatrixXd::Identity(2, 2);
  const MatrixXd ref = oracle::kronecker_lyapunov(a, at * tts::gamma_theta(l) * at.transpose());
  CHECK(oracle::rel_fro(tts::gain_covariance_theta(l, at), ref) < 1e-10);
  const MatrixXd g22 = l.noise.block22(2);
  const MatrixXd refm = oracle::kronecker_lyapunov(am * l.Q22, am * g22 * am.transpose());
  CHECK(oracle::rel_fro(tts::gain_covariance_mu(l, am), refm) < 1e-10);
  // optimal gains beat this one
  CHECK(tts::min_symmetric_eigenvalue(MatrixXd(ref - tts::optimal_covariances(l).first)) > -1e-12);
}

TEST_CASE("averaged covariance") {
  // decoupled: diag(v/h1^2, w/h2^2)
  const auto p = scalar(-2, 0, 0, -0.5, 0.3, 0.8);
  const MatrixXd c = tts::averaged_covariance(p);
  CHECK(c(0, 0) == doctest::Approx(0.3 / 4).epsilon(1e-14));
  CHECK(c(1, 1) == doctest::Approx(0.8 / 0.25).epsilon(1e-14));
  CHECK(std::abs(c(0, 1)) < 1e-15);

  auto z = tts::library_problem("linear-2x2");
  z.noise.gamma.setZero();
  CHECK(tts::averaged_covariance(z).norm() == 0.0);

  for (const auto& name : tts::library_problem_names()) {
    const auto l = tts::library_problem(name);
    const MatrixXd ca = tts::averaged_covariance(l);
    const auto [ot, om] = tts::optimal_covariances(l);
    CHECK((ca.topLeftCorner(l.d, l.d) - ot).norm() < 1e-12 * std::max(1.0, ot.norm()));
    CHECK((ca.bottomRightCorner(l.d_prime, l.d_prime) - om).norm() <
          1e-12 * std::max(1.0, om.norm()));

    // exchange symmetry
    const auto x = exchanged(l);
    const MatrixXd cx = tts::averaged_covariance(x);
    const auto d = l.d, dp = l.d_prime;
    MatrixXd back(d + dp, d + dp);
    back << cx.bottomRightCorner(d, d), cx.bottomLeftCorner(d, dp), cx.topRightCorner(dp, d),
        cx.topLeftCorner(dp, dp);
    CHECK((back - ca).norm() < 1e-12 * std::max(1.0, ca.norm()));
  }
  CHECK_THROWS_AS(tts::averaged_covariance(scalar(0, 1, 1, -1)), tts::SingularityError);
}

TEST_CASE("scalar theory report") {
  const auto r = tts::theory_report(scalar(-2, 1, 1, -1), sched(2, 0.8));
  CHECK(r.H(0, 0) == doctest::Approx(-1));
  CHECK(r.G(0, 0) == doctest::Approx(-0.5));
  CHECK(r.Gamma_theta(0, 0) == doctest::Approx(2));
  CHECK(r.Gamma_mu(0, 0) == doctest::Approx(1.25));
  CHECK(r.Sigma_theta(0, 0) == doctest::Approx(1));
  CHECK(r.Sigma_mu(0, 0) == doctest::Approx(0.5));
  CHECK(r.optimal_theta_cov(0, 0) == doctest::Approx(2));
  CHECK(r.optimal_mu_cov(0, 0) == doctest::Approx(5));
  CHECK(r.lambda_h == doctest::Approx(1));

  const MatrixXd plain =
      tts::predicted_covariance(scalar(-2, 1, 1, -1), sched(2, 0.8), tts::Algorithm::plain);
  CHECK(plain(0, 1) == 0.0);
  CHECK(plain(1, 1) == doctest::Approx(0.5));
}
