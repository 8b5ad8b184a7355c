#include "doctest.h"

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "tts/asymptotics.hpp"
#include "tts/errors.hpp"
#include "tts/experiments.hpp"
#include "tts/matrix_core.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> x) {
  VectorXd v(static_cast<Eigen::Index>(x.size()));
  Eigen::Index i = 0;
  for (double y : x) v(i++) = y;
  return v;
}

tts::StepSchedule standard() {
  tts::StepSchedule s;
  s.beta0 = 2;
  s.b = 0.8;
  s.gamma0 = 3;
  s.a = 0.6;
  return s;
}

// least squares slope written out, for the synthetic curves
double ls_slope(const std::vector<std::pair<std::size_t, double>>& pts) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = double(pts.size());
  for (const auto& [n, r] : pts) {
    const double x = std::log(double(n)), y = std::log(r);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

std::vector<std::pair<std::size_t, double>> grid_curve(std::size_t lo, std::size_t hi,
                                                       double (*f)(double)) {
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t n : tts::default_checkpoint_grid(hi)) {
    if (n >= lo) out.emplace_back(n, f(double(n)));
  }
  return out;
}

}  // namespace

TEST_CASE("sample_covariance examples") {
  const auto [m, c] = tts::sample_covariance({vec({1, 0}), vec({-1, 0})});
  CHECK(m.norm() == 0.0);
  CHECK((c - (MatrixXd(2, 2) << 2, 0, 0, 0).finished()).norm() < 1e-15);

  const auto [m2, c2] = tts::sample_covariance({vec({3, 1}), vec({3, 1}), vec({3, 1})});
  CHECK(c2.norm() == 0.0);
  CHECK(m2(0) == 3.0);

  CHECK_THROWS_AS(tts::sample_covariance({vec({1})}), tts::DomainError);
  CHECK_THROWS_AS(tts::sample_covariance({vec({1}), vec({1, 2})}), tts::DimensionError);
}

TEST_CASE("sample_covariance invariances") {
  std::mt19937_64 g(7);
  std::vector<VectorXd> xs;
  for (int i = 0; i < 500; ++i) xs.push_back(oracle::random_matrix(g, 3, 1));
  const auto [m, c] = tts::sample_covariance(xs);
  CHECK((c - c.transpose()).norm() == 0.0);
  CHECK(tts::is_symmetric_psd(c));

  auto shuffled = xs;
  std::shuffle(shuffled.begin(), shuffled.end(), g);
  const auto [ms, cs] = tts::sample_covariance(shuffled);
  CHECK((cs - c).norm() < 1e-13);
  CHECK((ms - m).norm() < 1e-14);

  auto shifted = xs;
  const VectorXd k = vec({10, -4, 2.5});
  for (auto& x : shifted) x += k;
  const auto [mt, ct] = tts::sample_covariance(shifted);
  CHECK((mt - m - k).norm() < 1e-12);
  CHECK((ct - c).norm() < 1e-11);
}

TEST_CASE("sample_covariance of known Gaussian draws") {
  const auto p = tts::library_problem("linear-2x2");
  const MatrixXd& gm = p.noise.gamma;
  const MatrixXd l = gm.llt().matrixL();
  std::mt19937_64 g(101);
  std::normal_distribution<double> nd;
  const int n = 1000000;
  std::vector<VectorXd> xs;
  xs.reserve(n);
  VectorXd z(4);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 4; ++j) z(j) = nd(g);
    xs.push_back(l * z);
  }
  const auto [m, c] = tts::sample_covariance(xs);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(m(i)) <= 3 * std::sqrt(gm(i, i) / n));
    for (int j = 0; j < 4; ++j) {
      const double se = std::sqrt((gm(i, i) * gm(j, j) + gm(i, j) * gm(i, j)) / n);
      CHECK(std::abs(c(i, j) - gm(i, j)) <= 3 * se);
    }
  }
}

TEST_CASE("clt_verdict examples") {
  const MatrixXd pred = tts::predicted_covariance(tts::library_problem("linear-2x2"), standard(),
                                                  tts::Algorithm::plain);
  const tts::BlockStructure bs{2, tts::CovarianceShape::block_diagonal};
  const auto exact = tts::clt_verdict(pred, pred, bs, 1e-9, 1e-9);
  CHECK(exact.pass);
  CHECK(exact.rel_theta == 0.0);

  const auto twice = tts::clt_verdict(2 * pred, pred, bs, 0.15, 0.10);
  CHECK_FALSE(twice.pass);
  CHECK(twice.rel_theta == doctest::Approx(1.0));
  CHECK(twice.rel_mu == doctest::Approx(1.0));

  MatrixXd cross = pred;
  cross.topRightCorner(2, 2) = 0.5 * MatrixXd::Ones(2, 2);
  cross.bottomLeftCorner(2, 2) = 0.5 * MatrixXd::Ones(2, 2);
  const auto cv = tts::clt_verdict(cross, pred, bs, 0.15, 0.10);
  CHECK_FALSE(cv.pass);
  CHECK(cv.cross > 0.10);

  // zero prediction with nonzero data
  MatrixXd zero = pred;
  zero.bottomRightCorner(2, 2).setZero();
  const auto zv = tts::clt_verdict(pred, zero, bs, 0.15, 0.10);
  CHECK_FALSE(zv.pass);
  CHECK_FALSE(zv.diagnostic.empty());

  // full shape checks the whole matrix
  const MatrixXd avg = tts::averaged_covariance(tts::library_problem("linear-2x2"));
  const tts::BlockStructure full{2, tts::CovarianceShape::full};
  CHECK(tts::clt_verdict(avg, avg, full, 0.15, 0.10).pass);
  CHECK_FALSE(tts::clt_verdict(1.3 * avg, avg, full, 0.15, 0.10).pass);
}

TEST_CASE("clt_verdict tolerance meta-simulation") {
  // M = 2000 exact Gaussian samples with the predicted covariance
  const MatrixXd pred = tts::predicted_covariance(tts::library_problem("linear-2x2"), standard(),
                                                  tts::Algorithm::plain);
  const MatrixXd f = pred.llt().matrixL();
  const tts::BlockStructure bs{2, tts::CovarianceShape::block_diagonal};
  std::mt19937_64 g(2024);
  std::normal_distribution<double> nd;
  const int meta = 400, m = 2000;
  int passes = 0;
  std::vector<VectorXd> xs(m, VectorXd(4));
  VectorXd z(4);
  for (int t = 0; t < meta; ++t) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < 4; ++j) z(j) = nd(g);
      xs[i] = f * z;
    }
    passes += tts::clt_verdict(tts::sample_covariance(xs).second, pred, bs, 0.15, 0.10).pass;
  }
  CHECK(passes >= 0.99 * meta);
}

TEST_CASE("rate_slope") {
  const auto exact = grid_curve(1000, 100000, [](double n) { return std::pow(n, -0.4); });
  CHECK(tts::rate_slope(exact) == doctest::Approx(-0.4).epsilon(1e-12));

  const auto flat = grid_curve(1000, 100000, [](double) { return 3.0; });
  CHECK(std::abs(tts::rate_slope(flat)) < 1e-12);

  // n^-0.3 sqrt(log n): the log factor adds 1/(2 log n) ~ +0.055 to the local slope
  const auto lg =
      grid_curve(1000, 100000, [](double n) { return 2.0 * std::pow(n, -0.3) * std::sqrt(std::log(n)); });
  const double oracle_slope = ls_slope(lg);
  CHECK(oracle_slope == doctest::Approx(-0.2449).epsilon(1e-3 / 0.2449));
  CHECK(tts::rate_slope(lg) == doctest::Approx(oracle_slope).epsilon(1e-12));

  CHECK_THROWS_AS(tts::rate_slope({{10, 1}, {20, 1}, {30, 1}}), tts::DegenerateDataError);
  CHECK_THROWS_AS(tts::rate_slope({{100, 1}, {200, 1}, {300, 1}, {1000, 1}}),
                  tts::DegenerateDataError);
  CHECK_THROWS_AS(tts::rate_slope({{10, 1}, {100, 0}, {1000, 1}, {10000, 1}}),
                  tts::DegenerateDataError);
}

TEST_CASE("small helpers") {
  CHECK(tts::median({3, 1, 2}) == 2.0);
  CHECK(tts::median({4, 1, 2, 3}) == 2.5);
  std::mt19937_64 g(5);
  std::normal_distribution<double> nd;
  std::vector<double> x(200000);
  for (double& v : x) v = nd(g);
  CHECK(tts::sample_kurtosis(x) == doctest::Approx(3.0).epsilon(0.03));
  CHECK(tts::lil_ratio(2.0, 0.25, 1.5) == doctest::Approx(4.0));  // log floored at 1
  CHECK(tts::lil_ratio(2.0, 0.25, std::exp(4.0)) == doctest::Approx(2.0));
  const auto w = tts::trailing_window({{1, 1}, {10, 1}, {100, 1}, {1000, 1}}, 10, 100);
  CHECK(w.size() == 2);
}

TEST_CASE("Monte Carlo plumbing: one index, two replications") {
  const auto p = tts::library_problem("linear-2x2");
  tts::MCConfig mc;
  mc.replications = 2;
  mc.n_final = 1;
  const auto rep = tts::run_monte_carlo(p, standard(), mc);
  REQUIRE(rep.checkpoints.size() == 1);
  const MatrixXd& c = rep.checkpoints[0].covariance;
  Eigen::JacobiSVD<MatrixXd> svd(c);
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    rank += svd.singularValues()(i) > 1e-12;
  CHECK(rank <= 1);
  CHECK(rep.valid);

  mc.replications = 1;
  CHECK_THROWS_AS(tts::run_monte_carlo(p, standard(), mc), tts::ConfigError);
}

TEST_CASE("Monte Carlo without noise collapses") {
  auto p = tts::library_problem("linear-2x2");
  p.noise.gamma.setZero();
  tts::MCConfig mc;
  mc.replications = 8;
  mc.n_final = 20000;
  const auto rep = tts::run_monte_carlo(p, standard(), mc);
  CHECK(rep.checkpoints.back().covariance.norm() < 1e-20);
  CHECK(rep.checkpoints.back().mean.norm() < 1e-6);
}

TEST_CASE("Monte Carlo regime checks") {
  const auto p = tts::library_problem("linear-2x2");
  tts::MCConfig mc;
  mc.replications = 2;
  mc.n_final = 10;
  mc.algorithm = tts::Algorithm::averaged;
  CHECK_THROWS_AS(tts::run_monte_carlo(p, standard(), mc), tts::ConfigError);
  auto avg = standard();
  avg.regime = tts::Regime::averaging;
  CHECK_NOTHROW(tts::run_monte_carlo(p, avg, mc));
  mc.algorithm = tts::Algorithm::plain;
  CHECK_THROWS_AS(tts::run_monte_carlo(p, avg, mc), tts::ConfigError);
}

TEST_CASE("Monte Carlo results do not depend on thread count") {
  const auto p = tts::library_problem("linear-2x2");
  tts::MCConfig mc;
  mc.replications = 24;
  mc.n_final = 3000;
  mc.track_decomposition = true;
  mc.threads = 1;
  const auto a = tts::run_monte_carlo(p, standard(), mc);
  mc.threads = 5;
  const auto b = tts::run_monte_carlo(p, standard(), mc);
  const auto c = tts::run_monte_carlo(p, standard(), mc);
  REQUIRE(a.checkpoints.size() == b.checkpoints.size());
  for (std::size_t k = 0; k < a.checkpoints.size(); ++k) {
    CHECK(a.checkpoints[k].covariance == b.checkpoints[k].covariance);
    CHECK(a.checkpoints[k].rms_theta == b.checkpoints[k].rms_theta);
    CHECK(b.checkpoints[k].covariance == c.checkpoints[k].covariance);
  }
  REQUIRE(a.negligibility);
  CHECK(a.negligibility->R_theta == b.negligibility->R_theta);
  CHECK(a.lil_stable_theta == b.lil_stable_theta);

  mc.base_seed = 2;
  const auto d = tts::run_monte_carlo(p, standard(), mc);
  CHECK(d.checkpoints.back().covariance != a.checkpoints.back().covariance);
}

TEST_CASE("negligibility needs decomposition data") {
  const auto p = tts::library_problem("linear-2x2");
  const auto tr = tts::run(p, standard(), 100, 1, 0);
  CHECK_THROWS_AS(tts::decomposition_ratios(tr), tts::ConfigError);

  tts::RunOptions opt;
  opt.track_decomposition = true;
  const auto td = tts::run(p, standard(), 100, 1, 0, opt);
  const auto r = tts::decomposition_ratios(td);
  CHECK(r.R_theta.size() == td.checkpoints.size());
  CHECK_THROWS_AS(tts::negligibility_curves({1, 2}, {}), tts::ConfigError);
}

TEST_CASE("scaled errors") {
  const auto p = tts::library_problem("linear-2x2");
  tts::Checkpoint c;
  c.n = 16;
  c.theta = p.theta_star + vec({1, 0});
  c.mu = p.mu_star + vec({0, 2});
  c.theta_bar = p.theta_star + vec({0.5, 0});
  c.mu_bar = p.mu_star;
  const auto s = standard();
  const VectorXd e = tts::scaled_error(p, s, tts::Algorithm::plain, c);
  CHECK(e(0) == doctest::Approx(1 / std::sqrt(s.beta(16))));
  CHECK(e(3) == doctest::Approx(2 / std::sqrt(s.gamma(16))));
  const VectorXd ea = tts::scaled_error(p, s, tts::Algorithm::averaged, c);
  CHECK(ea(0) == doctest::Approx(0.5 * 4));
  CHECK(ea(3) == doctest::Approx(0.0));
}
