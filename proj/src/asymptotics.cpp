#include "tts/asymptotics.hpp"

#include <sstream>

#include "tts/errors.hpp"
#include "tts/matrix_core.hpp"

namespace tts {

namespace {

MatrixXd sym(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

MatrixXd block_diag(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out = MatrixXd::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

}  // namespace

MatrixXd sigma_theta(const ProblemSpec& spec, const StepSchedule& schedule) {
  const MatrixXd h = derive_H(spec);
  MatrixXd shifted = h;
  if (schedule.critical()) {
    shifted += MatrixXd::Identity(spec.d, spec.d) / (2.0 * schedule.beta0);
  }
  try {
    return solve_lyapunov(shifted, gamma_theta(spec));
  } catch (const InfeasibilityError&) {
    const double lambda_h = lambda_of(h).lambda_gap;
    std::ostringstream os;
    if (schedule.critical()) {
      os << "A3(ii) violated: b = 1 needs beta0 > 1/(2*Lambda(H)) = " << 1.0 / (2.0 * lambda_h)
         << ", got beta0 = " << schedule.beta0 << "; Sigma_theta does not exist";
    } else {
      os << "A2(ii) violated: H is not Hurwitz (Lambda(H) = " << lambda_h
         << "); Sigma_theta does not exist";
    }
    throw InfeasibilityError(os.str());
  }
}

MatrixXd sigma_mu(const ProblemSpec& spec) {
  try {
    return solve_lyapunov(spec.Q22, spec.noise.block22(spec.d));
  } catch (const InfeasibilityError&) {
    std::ostringstream os;
    os << "A2(ii) violated: Q22 is not Hurwitz (Lambda(Q22) = " << lambda_of(spec.Q22).lambda_gap
       << "); Sigma_mu does not exist";
    throw InfeasibilityError(os.str());
  }
}

std::pair<MatrixXd, MatrixXd> optimal_covariances(const ProblemSpec& spec) {
  const MatrixXd hi = invert(derive_H(spec));
  const MatrixXd gi = invert(derive_G(spec));
  return {sym(hi * gamma_theta(spec) * hi.transpose()), sym(gi * gamma_mu(spec) * gi.transpose())};
}

MatrixXd block_D(const ProblemSpec& spec) {
  return block_diag(invert(derive_H(spec)), invert(derive_G(spec)));
}

MatrixXd block_P(const ProblemSpec& spec) {
  const auto d = spec.d, dp = spec.d_prime;
  MatrixXd p(d + dp, d + dp);
  p << MatrixXd::Identity(d, d), -coupling_theta(spec), -coupling_mu(spec),
      MatrixXd::Identity(dp, dp);
  return p;
}

MatrixXd averaged_covariance(const ProblemSpec& spec) {
  const MatrixXd dp = block_D(spec) * block_P(spec);
  return sym(dp * spec.noise.gamma * dp.transpose());
}

MatrixXd gain_covariance_theta(const ProblemSpec& spec, const MatrixXd& a_theta) {
  if (a_theta.rows() != spec.d || a_theta.cols() != spec.d) {
    throw DimensionError("gain_covariance_theta: A_theta must be d x d");
  }
  const MatrixXd a = a_theta * derive_H(spec) + 0.5 * MatrixXd::Identity(spec.d, spec.d);
  try {
    return solve_lyapunov(a, sym(a_theta * gamma_theta(spec) * a_theta.transpose()));
  } catch (const InfeasibilityError&) {
    throw InfeasibilityError("gain_covariance_theta: A_theta H + I/2 is not attractive");
  }
}

MatrixXd gain_covariance_mu(const ProblemSpec& spec, const MatrixXd& a_mu) {
  if (a_mu.rows() != spec.d_prime || a_mu.cols() != spec.d_prime) {
    throw DimensionError("gain_covariance_mu: A_mu must be d' x d'");
  }
  const MatrixXd a = a_mu * spec.Q22;
  try {
    return solve_lyapunov(a, sym(a_mu * spec.noise.block22(spec.d) * a_mu.transpose()));
  } catch (const InfeasibilityError&) {
    throw InfeasibilityError("gain_covariance_mu: A_mu Q22 is not attractive");
  }
}

TheoryReport theory_report(const ProblemSpec& spec, const StepSchedule& schedule) {
  spec.check();
  TheoryReport r;
  r.H = derive_H(spec);
  r.G = derive_G(spec);
  r.Gamma_theta = gamma_theta(spec);
  r.Gamma_mu = gamma_mu(spec);
  r.lambda_h = lambda_of(r.H).lambda_gap;
  r.lambda_q22 = lambda_of(spec.Q22).lambda_gap;
  r.critical = schedule.critical();
  r.Sigma_theta = sigma_theta(spec, schedule);
  r.Sigma_mu = sigma_mu(spec);
  std::tie(r.optimal_theta_cov, r.optimal_mu_cov) = optimal_covariances(spec);
  r.D = block_D(spec);
  r.P = block_P(spec);
  r.averaged_cov = averaged_covariance(spec);
  return r;
}

MatrixXd predicted_covariance(const ProblemSpec& spec, const StepSchedule& schedule,
                              Algorithm algorithm, const GainMatrices& gains) {
  switch (algorithm) {
    case Algorithm::plain:
      return block_diag(sigma_theta(spec, schedule), sigma_mu(spec));
    case Algorithm::averaged:
      return averaged_covariance(spec);
    case Algorithm::matricial: {
      const GainMatrices g = gains.empty() ? optimal_gains(spec) : gains;
      return block_diag(gain_covariance_theta(spec, g.A_theta), gain_covariance_mu(spec, g.A_mu));
    }
  }
  return {};
}

}  // namespace tts
