#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "tts/schedules.hpp"
#include "tts/validation.hpp"

namespace tts {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class ResidualKind { none, quadratic_form, custom };
enum class NoiseDistribution { gaussian, bounded_uniform };
enum class BiasKind { zero, power_decay };

const char* to_string(ResidualKind k);
const char* to_string(NoiseDistribution k);
const char* to_string(BiasKind k);

/// Second-order part of the drift, as a function of the stacked deviation
/// z = (theta - theta*, mu - mu*). Evaluates to zero for ||z|| > clamp_radius.
struct NonlinearResidual {
  using Hook = std::function<void(const VectorXd& z, VectorXd& out)>;

  ResidualKind kind = ResidualKind::none;
  double clamp_radius = std::numeric_limits<double>::infinity();
  /// quadratic_form: one symmetric (d+d') x (d+d') matrix per output
  /// component, out_i = z^T C_i z.
  std::vector<MatrixXd> coefficients;
  Hook hook;

  bool linear() const { return kind == ResidualKind::none; }

  /// c such that ||rho(z)|| <= c ||z||^2 (quadratic_form only; 0 for none).
  double quadratic_constant() const;

  /// Writes rho(z) into `out` (resized to z.size()).
  void evaluate(const VectorXd& z, VectorXd& out) const;
};

/// Innovation law: (V, W) i.i.d. with covariance gamma, mean zero.
struct NoiseModel {
  MatrixXd gamma;
  NoiseDistribution distribution = NoiseDistribution::gaussian;
  /// Highest finite conditional moment of the innovations.
  double moment_order_m = std::numeric_limits<double>::infinity();

  MatrixXd block11(Eigen::Index d) const { return gamma.topLeftCorner(d, d); }
  MatrixXd block12(Eigen::Index d) const { return gamma.topRightCorner(d, gamma.cols() - d); }
  MatrixXd block21(Eigen::Index d) const { return gamma.bottomLeftCorner(gamma.rows() - d, d); }
  MatrixXd block22(Eigen::Index d) const {
    return gamma.bottomRightCorner(gamma.rows() - d, gamma.cols() - d);
  }
};

/// Deterministic observation bias r_n = c n^-rho.
struct BiasModel {
  BiasKind kind = BiasKind::zero;
  VectorXd theta_coeff;
  VectorXd mu_coeff;
  double rho = 1.0;

  /// Writes r_n^(theta), r_n^(mu); zero vectors for BiasKind::zero.
  void at(std::size_t n, VectorXd& r_theta, VectorXd& r_mu) const;
};

/// A two-time-scale root-finding problem
///   f(theta, mu) = Q11 (theta - theta*) + Q12 (mu - mu*) + rho_theta
///   g(theta, mu) = Q21 (theta - theta*) + Q22 (mu - mu*) + rho_mu
/// observed with additive noise and bias.
struct ProblemSpec {
  std::string name = "inline";
  Eigen::Index d = 0;
  Eigen::Index d_prime = 0;
  VectorXd theta_star;
  VectorXd mu_star;
  MatrixXd Q11, Q12, Q21, Q22;
  NonlinearResidual residual;
  NoiseModel noise;
  BiasModel bias;

  /// Throws DimensionError/DomainError when shapes, finiteness, noise
  /// covariance or the root condition are violated.
  void check() const;

  /// Full Jacobian [[Q11, Q12], [Q21, Q22]].
  MatrixXd jacobian() const;
};

MatrixXd derive_H(const ProblemSpec& spec);
MatrixXd derive_G(const ProblemSpec& spec);
MatrixXd gamma_theta(const ProblemSpec& spec);
MatrixXd gamma_mu(const ProblemSpec& spec);

/// Q12 Q22^-1, the coupling that moves mu-noise into the theta equation.
MatrixXd coupling_theta(const ProblemSpec& spec);
/// Q21 Q11^-1.
MatrixXd coupling_mu(const ProblemSpec& spec);

std::pair<VectorXd, VectorXd> eval_drift(const ProblemSpec& spec, const VectorXd& theta,
                                        const VectorXd& mu);

ValidationReport validate_spec(const ProblemSpec& spec, const StepSchedule& schedule);

/// Built-in problems: "linear-2x2", "scalar-coupled", "quadratic-2x2".
ProblemSpec library_problem(const std::string& name);
const std::vector<std::string>& library_problem_names();

/// theta* + e/sqrt(d) style unit offsets used when no initial point is given.
VectorXd default_offset(Eigen::Index dim);

}  // namespace tts
