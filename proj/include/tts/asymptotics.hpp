#pragma once

#include <Eigen/Dense>

#include <utility>

#include "tts/problem_model.hpp"
#include "tts/sa_engine.hpp"
#include "tts/schedules.hpp"

namespace tts {

/// Every limit covariance predicted for a problem/schedule pair.
struct TheoryReport {
  MatrixXd H, G, Gamma_theta, Gamma_mu;
  MatrixXd Sigma_theta;        ///< plain iterate, theta block
  MatrixXd Sigma_mu;           ///< plain iterate, mu block
  MatrixXd optimal_theta_cov;  ///< H^-1 Gamma_theta H^-T
  MatrixXd optimal_mu_cov;     ///< G^-1 Gamma_mu G^-T
  MatrixXd averaged_cov;       ///< D P Gamma P^T D^T
  MatrixXd D, P;
  double lambda_h = 0.0;
  double lambda_q22 = 0.0;
  bool critical = false;  ///< b == 1, shift 1/(2 beta0) applied
};

/// Solves (H + 1{b=1}/(2 beta0) I) S + S (.)^T = -Gamma_theta.
MatrixXd sigma_theta(const ProblemSpec& spec, const StepSchedule& schedule);

/// Solves Q22 S + S Q22^T = -Gamma22.
MatrixXd sigma_mu(const ProblemSpec& spec);

std::pair<MatrixXd, MatrixXd> optimal_covariances(const ProblemSpec& spec);

MatrixXd block_D(const ProblemSpec& spec);
MatrixXd block_P(const ProblemSpec& spec);
MatrixXd averaged_covariance(const ProblemSpec& spec);

/// Limit covariance of sqrt(n)(theta_n - theta*) for the matricial algorithm:
/// [A H + I/2] S + S [.]^T = -A Gamma_theta A^T.
MatrixXd gain_covariance_theta(const ProblemSpec& spec, const MatrixXd& a_theta);

/// Limit covariance of n^{a/2}(mu_n - mu*) for the matricial algorithm:
/// (A Q22) S + S (A Q22)^T = -A Gamma22 A^T.
MatrixXd gain_covariance_mu(const ProblemSpec& spec, const MatrixXd& a_mu);

TheoryReport theory_report(const ProblemSpec& spec, const StepSchedule& schedule);

/// The full (d+d') covariance a Monte Carlo run of `algorithm` is compared
/// against. Off-diagonal blocks are zero except for the averaged algorithm.
MatrixXd predicted_covariance(const ProblemSpec& spec, const StepSchedule& schedule,
                              Algorithm algorithm, const GainMatrices& gains = {});

}  // namespace tts
