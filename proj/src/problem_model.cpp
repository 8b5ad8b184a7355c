#include "tts/problem_model.hpp"

#include <cmath>
#include <sstream>

#include "tts/errors.hpp"
#include "tts/matrix_core.hpp"

namespace tts {

const char* to_string(ResidualKind k) {
  switch (k) {
    case ResidualKind::none: return "none";
    case ResidualKind::quadratic_form: return "quadratic";
    case ResidualKind::custom: return "custom";
  }
  return "?";
}

const char* to_string(NoiseDistribution k) {
  return k == NoiseDistribution::gaussian ? "gaussian" : "bounded_uniform";
}

const char* to_string(BiasKind k) { return k == BiasKind::zero ? "zero" : "power_decay"; }

double NonlinearResidual::quadratic_constant() const {
  if (kind != ResidualKind::quadratic_form) return 0.0;
  // ||rho(z)||^2 = sum_i (z^T C_i z)^2 <= sum_i ||C_i||_2^2 ||z||^4
  double acc = 0.0;
  for (const auto& c : coefficients) {
    const double s = Eigen::JacobiSVD<MatrixXd>(c).singularValues()(0);
    acc += s * s;
  }
  return std::sqrt(acc);
}

void NonlinearResidual::evaluate(const VectorXd& z, VectorXd& out) const {
  out.resize(z.size());
  if (kind == ResidualKind::none || z.norm() > clamp_radius) {
    out.setZero();
    return;
  }
  if (kind == ResidualKind::custom) {
    hook(z, out);
    return;
  }
  const Eigen::Index m = z.size();
  for (Eigen::Index i = 0; i < m; ++i) {
    const MatrixXd& c = coefficients[static_cast<std::size_t>(i)];
    double acc = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      double col = 0.0;
      for (Eigen::Index j = 0; j < m; ++j) col += c(j, k) * z(j);
      acc += col * z(k);
    }
    out(i) = acc;
  }
}

void BiasModel::at(std::size_t n, VectorXd& r_theta, VectorXd& r_mu) const {
  if (kind == BiasKind::zero) {
    r_theta.setZero();
    r_mu.setZero();
    return;
  }
  const double scale = std::pow(static_cast<double>(n), -rho);
  r_theta = scale * theta_coeff;
  r_mu = scale * mu_coeff;
}

namespace {

void require_shape(const MatrixXd& m, Eigen::Index r, Eigen::Index c, const char* what) {
  if (m.rows() != r || m.cols() != c) {
    std::ostringstream os;
    os << what << " must be " << r << "x" << c << ", got " << m.rows() << "x" << m.cols();
    throw DimensionError(os.str());
  }
  if (!m.allFinite()) throw DomainError(std::string(what) + " has non-finite entries");
}

}  // namespace

void ProblemSpec::check() const {
  if (d <= 0 || d_prime <= 0) throw DimensionError("problem dimensions must be positive");
  require_shape(theta_star, d, 1, "theta_star");
  require_shape(mu_star, d_prime, 1, "mu_star");
  require_shape(Q11, d, d, "Q11");
  require_shape(Q12, d, d_prime, "Q12");
  require_shape(Q21, d_prime, d, "Q21");
  require_shape(Q22, d_prime, d_prime, "Q22");
  require_shape(noise.gamma, d + d_prime, d + d_prime, "Gamma");
  if (!is_symmetric_psd(noise.gamma, 1e-10)) {
    throw DomainError("Gamma must be symmetric positive semidefinite");
  }
  if (!(noise.moment_order_m > 0)) throw DomainError("noise moment order must be positive");

  if (residual.kind == ResidualKind::quadratic_form) {
    if (residual.coefficients.size() != static_cast<std::size_t>(d + d_prime)) {
      throw DimensionError("quadratic residual needs one coefficient matrix per component");
    }
    for (const auto& c : residual.coefficients) require_shape(c, d + d_prime, d + d_prime, "residual coefficient");
  }
  if (residual.kind == ResidualKind::custom) {
    if (!residual.hook) throw DomainError("custom residual requires a hook");
    VectorXd out;
    residual.evaluate(VectorXd::Zero(d + d_prime), out);
    if (out.size() != d + d_prime || out.norm() != 0.0) {
      throw DomainError("custom residual must vanish at the root");
    }
  }
  if (!(residual.clamp_radius > 0)) throw DomainError("clamp radius must be positive");

  if (bias.kind == BiasKind::power_decay) {
    require_shape(bias.theta_coeff, d, 1, "bias theta coefficient");
    require_shape(bias.mu_coeff, d_prime, 1, "bias mu coefficient");
    if (!(bias.rho > 0)) throw DomainError("bias exponent rho must be positive");
  }
}

MatrixXd ProblemSpec::jacobian() const {
  MatrixXd q(d + d_prime, d + d_prime);
  q << Q11, Q12, Q21, Q22;
  return q;
}

MatrixXd coupling_theta(const ProblemSpec& spec) { return spec.Q12 * invert(spec.Q22); }

MatrixXd coupling_mu(const ProblemSpec& spec) { return spec.Q21 * invert(spec.Q11); }

MatrixXd derive_H(const ProblemSpec& spec) { return spec.Q11 - coupling_theta(spec) * spec.Q21; }

MatrixXd derive_G(const ProblemSpec& spec) { return spec.Q22 - coupling_mu(spec) * spec.Q12; }

MatrixXd gamma_theta(const ProblemSpec& spec) {
  const auto d = spec.d;
  const MatrixXd k = coupling_theta(spec);
  const auto& n = spec.noise;
  MatrixXd g = n.block11(d) + k * n.block22(d) * k.transpose() - n.block12(d) * k.transpose() -
               k * n.block21(d);
  return 0.5 * (g + g.transpose());
}

MatrixXd gamma_mu(const ProblemSpec& spec) {
  const auto d = spec.d;
  const MatrixXd k = coupling_mu(spec);
  const auto& n = spec.noise;
  MatrixXd g = n.block22(d) + k * n.block11(d) * k.transpose() - n.block21(d) * k.transpose() -
               k * n.block12(d);
  return 0.5 * (g + g.transpose());
}

std::pair<VectorXd, VectorXd> eval_drift(const ProblemSpec& spec, const VectorXd& theta,
                                        const VectorXd& mu) {
  if (theta.size() != spec.d || mu.size() != spec.d_prime) {
    throw DimensionError("eval_drift: expected theta of size " + std::to_string(spec.d) +
                         " and mu of size " + std::to_string(spec.d_prime));
  }
  VectorXd z(spec.d + spec.d_prime);
  z << theta - spec.theta_star, mu - spec.mu_star;
  VectorXd rho;
  spec.residual.evaluate(z, rho);
  VectorXd f = spec.Q11 * z.head(spec.d) + spec.Q12 * z.tail(spec.d_prime) + rho.head(spec.d);
  VectorXd g =
      spec.Q21 * z.head(spec.d) + spec.Q22 * z.tail(spec.d_prime) + rho.tail(spec.d_prime);
  return {std::move(f), std::move(g)};
}

ValidationReport validate_spec(const ProblemSpec& spec, const StepSchedule& schedule) {
  ValidationReport r;
  std::ostringstream os;

  try {
    spec.check();
    r.add("structure", "dimensions, finiteness and noise covariance well formed", true);
  } catch (const Error& e) {
    r.add("structure", "dimensions, finiteness and noise covariance well formed", false, e.what());
    return r;
  }

  r.assert_by_construction("A1", "almost-sure convergence of (theta_n, mu_n)",
                           spec.residual.linear() ? "implied by A2-A4 for linear drift"
                                                  : "asserted for the clamped residual");

  {
    VectorXd out;
    spec.residual.evaluate(VectorXd::Zero(spec.d + spec.d_prime), out);
    os.str("");
    os << "||rho(theta*, mu*)|| = " << out.norm() << ", quadratic constant "
       << spec.residual.quadratic_constant();
    r.add("A2(i)", "drift vanishes at the root with a second-order residual", out.norm() == 0.0,
          os.str());
  }

  double lambda_h = std::numeric_limits<double>::quiet_NaN();
  bool q22_ok = true;
  try {
    (void)invert(spec.Q22);
  } catch (const SingularityError& e) {
    q22_ok = false;
    r.add("A2(ii)", "Q22 invertible", false, e.what());
  }
  try {
    (void)invert(spec.Q11);
    r.add("invertibility", "Q11 invertible (needed for G, Gamma_mu, D)", true);
  } catch (const SingularityError& e) {
    r.add("invertibility", "Q11 invertible (needed for G, Gamma_mu, D)", false, e.what());
  }

  if (q22_ok) {
    const double lambda_q22 = lambda_of(spec.Q22).lambda_gap;
    lambda_h = lambda_of(derive_H(spec)).lambda_gap;
    r.record("Lambda(H)", lambda_h);
    r.record("Lambda(Q22)", lambda_q22);
    os.str("");
    os << "Lambda(H) = " << lambda_h;
    r.add("A2(ii)", "H = Q11 - Q12 Q22^-1 Q21 is Hurwitz: Lambda(H) > 0", lambda_h > 0, os.str());
    os.str("");
    os << "Lambda(Q22) = " << lambda_q22;
    r.add("A2(ii)", "Q22 is Hurwitz: Lambda(Q22) > 0", lambda_q22 > 0, os.str());
  }

  r.merge(validate_schedule(schedule, lambda_h));

  {
    const double needed = 2.0 / schedule.a;
    os.str("");
    os << "m = " << spec.noise.moment_order_m << ", requires m > 2/a = " << needed;
    r.add("A4(iii)", "innovation moment order m > 2/a", spec.noise.moment_order_m > needed,
          os.str());
    r.record("moment_threshold", needed);
  }
  r.assert_by_construction("A4(i)", "martingale-difference innovations",
                           "i.i.d. zero-mean draws independent of the past");
  {
    const bool psd = is_symmetric_psd(spec.noise.gamma, 1e-10);
    r.add("A4(ii)", "limit covariance Gamma symmetric positive semidefinite", psd);
  }

  if (spec.bias.kind == BiasKind::zero) {
    r.add("A4(iv)", "bias o(sqrt(beta_n))", true, "zero bias");
    if (schedule.regime == Regime::averaging) r.add("A'4", "bias o(n^-1/2)", true, "zero bias");
  } else {
    os.str("");
    os << "rho = " << spec.bias.rho << ", requires rho > b/2 = " << schedule.b / 2;
    r.add("A4(iv)", "power-decay bias o(sqrt(beta_n)) requires rho > b/2",
          spec.bias.rho > schedule.b / 2, os.str());
    if (schedule.regime == Regime::averaging) {
      os.str("");
      os << "rho = " << spec.bias.rho << ", requires rho > 1/2";
      r.add("A'4", "power-decay bias o(n^-1/2) requires rho > 1/2", spec.bias.rho > 0.5,
            os.str());
    }
  }
  return r;
}

VectorXd default_offset(Eigen::Index dim) {
  return VectorXd::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
}

namespace {

ProblemSpec linear_2x2() {
  ProblemSpec p;
  p.name = "linear-2x2";
  p.d = 2;
  p.d_prime = 2;
  p.theta_star = (VectorXd(2) << 1.0, -0.5).finished();
  p.mu_star = (VectorXd(2) << 0.5, 2.0).finished();
  p.Q11 = (MatrixXd(2, 2) << -1.2, 0.3, -0.2, -0.9).finished();
  p.Q12 = (MatrixXd(2, 2) << 0.2, -0.1, 0.05, 0.15).finished();
  p.Q21 = (MatrixXd(2, 2) << 0.05, 0.02, -0.03, 0.08).finished();
  p.Q22 = (MatrixXd(2, 2) << -1.5, 0.4, -0.3, -1.2).finished();
  p.noise.gamma = (MatrixXd(4, 4) << 1.0, 0.3, 0.05, 0.0,
                                     0.3, 0.8, 0.0, 0.02,
                                     0.05, 0.0, 1.2, 0.2,
                                     0.0, 0.02, 0.2, 0.9).finished();
  return p;
}

ProblemSpec scalar_coupled() {
  ProblemSpec p;
  p.name = "scalar-coupled";
  p.d = 1;
  p.d_prime = 1;
  p.theta_star = VectorXd::Constant(1, 1.0);
  p.mu_star = VectorXd::Constant(1, -1.0);
  p.Q11 = MatrixXd::Constant(1, 1, -2.0);
  p.Q12 = MatrixXd::Constant(1, 1, 1.0);
  p.Q21 = MatrixXd::Constant(1, 1, 1.0);
  p.Q22 = MatrixXd::Constant(1, 1, -1.0);
  p.noise.gamma = MatrixXd::Identity(2, 2);
  return p;
}

// rho(z) = (p.z) J1 z + (q.z) J2 z with skew J1, J2, so z . rho(z) = 0: the
// quadratic part neither injects nor removes energy and cannot create new
// equilibria for a drift with negative-definite symmetric part.
ProblemSpec quadratic_2x2() {
  ProblemSpec p = linear_2x2();
  p.name = "quadratic-2x2";
  const VectorXd pv = (VectorXd(4) << 0.6, -0.4, 0.3, 0.5).finished();
  const VectorXd qv = (VectorXd(4) << -0.3, 0.5, 0.4, -0.2).finished();
  MatrixXd j1(4, 4), j2(4, 4);
  j1 << 0.0, 0.4, -0.15, 0.1,
       -0.4, 0.0, 0.25, -0.2,
        0.15, -0.25, 0.0, 0.3,
       -0.1, 0.2, -0.3, 0.0;
  j2 << 0.0, -0.2, 0.3, 0.15,
        0.2, 0.0, -0.1, 0.25,
       -0.3, 0.1, 0.0, -0.35,
       -0.15, -0.25, 0.35, 0.0;
  p.residual.kind = ResidualKind::quadratic_form;
  for (Eigen::Index i = 0; i < 4; ++i) {
    const VectorXd r1 = j1.row(i).transpose();
    const VectorXd r2 = j2.row(i).transpose();
    MatrixXd c = 0.5 * (pv * r1.transpose() + r1 * pv.transpose()) +
                 0.5 * (qv * r2.transpose() + r2 * qv.transpose());
    p.residual.coefficients.push_back(std::move(c));
  }
  VectorXd offset(4);
  offset << default_offset(2), default_offset(2);
  p.residual.clamp_radius = 10.0 * offset.norm();
  return p;
}

}  // namespace

const std::vector<std::string>& library_problem_names() {
  static const std::vector<std::string> names{"linear-2x2", "scalar-coupled", "quadratic-2x2"};
  return names;
}

ProblemSpec library_problem(const std::string& name) {
  ProblemSpec p;
  if (name == "linear-2x2") p = linear_2x2();
  else if (name == "scalar-coupled") p = scalar_coupled();
  else if (name == "quadratic-2x2") p = quadratic_2x2();
  else throw ConfigError("unknown library problem '" + name + "'");
  p.check();
  return p;
}

}  // namespace tts
