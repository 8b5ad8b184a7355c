#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tts/problem_model.hpp"
#include "tts/sa_engine.hpp"
#include "tts/schedules.hpp"

namespace tts {

/// Pass thresholds. Defaults are the frozen acceptance values.
struct Tolerances {
  double rel = 0.15;           ///< relative Frobenius error per block
  double cross = 0.10;         ///< normalized cross block (block-diagonal target)
  double slope = 0.07;         ///< |fitted slope - (-b/2)|
  double lil_factor = 2.0;     ///< window max at n vs at n/10
  double lil_fraction = 0.95;  ///< share of replications that must be stable
  double negligibility = 0.5;  ///< median at n_final vs at n_final/100
  double kurtosis = 0.3;       ///< soft diagnostic only

  bool operator==(const Tolerances&) const = default;
};

struct MCConfig {
  std::size_t replications = 2000;
  std::size_t n_final = 100000;
  std::uint64_t base_seed = 1;
  std::vector<std::size_t> checkpoint_grid;  ///< empty: default geometric grid
  Algorithm algorithm = Algorithm::plain;
  GainMatrices gains;  ///< matricial only; empty means optimal gains
  bool track_decomposition = false;
  std::optional<VectorXd> theta_offset, mu_offset;
  Tolerances tol;
  unsigned threads = 0;  ///< 0: hardware concurrency
  bool keep_terminal_samples = false;
};

enum class CovarianceShape { block_diagonal, full };

struct BlockStructure {
  Eigen::Index d = 0;  ///< size of the theta block
  CovarianceShape shape = CovarianceShape::block_diagonal;
};

struct Verdict {
  bool pass = false;
  double rel_theta = 0.0;
  double rel_mu = 0.0;
  double cross = 0.0;  ///< ||E_theta_mu||_F / sqrt(||S_theta||_F ||S_mu||_F)
  double rel_full = 0.0;
  std::string diagnostic;
};

/// Compares an empirical covariance against a prediction. block_diagonal:
/// both diagonal blocks within tol_rel and the cross block within tol_cross.
/// full: the whole matrix and both diagonal blocks within tol_rel.
Verdict clt_verdict(const MatrixXd& empirical, const MatrixXd& predicted,
                    const BlockStructure& structure, double tol_rel, double tol_cross);

/// Unbiased sample mean and covariance (divides by M - 1).
std::pair<VectorXd, MatrixXd> sample_covariance(const std::vector<VectorXd>& samples);

/// Least-squares slope of log(rms) against log(n). Needs at least 4 points
/// spanning 1.5 decades and strictly positive rms.
double rate_slope(const std::vector<std::pair<std::size_t, double>>& points);

/// Points with n in [n_lo, n_hi].
std::vector<std::pair<std::size_t, double>> trailing_window(
    const std::vector<std::pair<std::size_t, double>>& points, std::size_t n_lo, std::size_t n_hi);

/// Standardized fourth moment of a univariate sample.
double sample_kurtosis(const std::vector<double>& x);

double median(std::vector<double> x);

struct CheckpointSummary {
  std::size_t n = 0;
  double beta = 0.0, gamma = 0.0;
  VectorXd mean;        ///< of the scaled errors
  MatrixXd covariance;  ///< of the scaled errors
  double rms_theta = 0.0, rms_mu = 0.0;  ///< ensemble RMS of ||theta_n - theta*||, ||mu_n - mu*||
  double lil_theta_max = 0.0, lil_mu_max = 0.0;
  Verdict verdict;  ///< against the prediction at this checkpoint
};

struct SlopeFit {
  double slope = 0.0;
  double target = 0.0;
  std::size_t points = 0;
  bool pass = false;
};

/// Medians across replications, one entry per checkpoint.
struct NegligibilityCurves {
  std::vector<std::size_t> n;
  std::vector<double> R_theta;      ///< ||R^theta|| / sqrt(beta_n)
  std::vector<double> Delta_theta;  ///< ||Delta^theta|| / sqrt(beta_n)
  std::vector<double> R_mu;         ///< ||R^mu|| / sqrt(gamma_n)
  std::vector<double> Delta_mu;     ///< ||Delta^mu|| / sqrt(beta_n)
  std::vector<double> R_over_L_theta;
  std::vector<double> R_over_L_mu;
  /// share of replications with ||Delta^theta|| / sqrt(beta_n) strictly
  /// decreasing over the last three checkpoints
  double delta_theta_monotone_fraction = 0.0;
};

/// Per-checkpoint decomposition ratios of one replication.
struct DecompositionRatios {
  std::vector<double> R_theta, Delta_theta, R_mu, Delta_mu, R_over_L_theta, R_over_L_mu;
};

NegligibilityCurves negligibility_curves(const std::vector<std::size_t>& n,
                                         const std::vector<DecompositionRatios>& replications);

/// Ratios for one trace; ConfigError when the trace has no decomposition.
DecompositionRatios decomposition_ratios(const TrajectoryTrace& trace);

struct TrendCheck {
  std::string name;
  double early = 0.0, late = 0.0;
  bool pass = false;
};

struct ReplicationFailure {
  std::size_t replication = 0;
  std::size_t index = 0;
  std::string message;
};

struct MonteCarloReport {
  std::string problem;
  Algorithm algorithm = Algorithm::plain;
  StepSchedule schedule;  ///< effective step sizes
  std::size_t replications = 0;
  std::size_t n_final = 0;
  std::uint64_t base_seed = 0;
  Tolerances tol;
  MatrixXd predicted;
  BlockStructure structure;

  std::vector<CheckpointSummary> checkpoints;
  Verdict clt;  ///< at n_final

  std::optional<SlopeFit> slope_theta, slope_mu;
  std::size_t lil_reference_n = 0;  ///< checkpoint paired with n_final
  double lil_stable_theta = 0.0, lil_stable_mu = 0.0;
  bool lil_pass = false;

  std::optional<NegligibilityCurves> negligibility;
  std::vector<TrendCheck> trends;

  std::vector<double> kurtosis;  ///< per scaled component at n_final
  bool kurtosis_ok = false;

  std::vector<ReplicationFailure> failures;
  bool valid = true;

  std::vector<VectorXd> terminal_samples;  ///< when requested

  /// CLT, slopes, LIL stability and (when tracked) negligibility trends.
  bool passed() const;
};

/// Scaled errors of a checkpoint: sqrt(1/beta_n)(theta - theta*) and
/// sqrt(1/gamma_n)(mu - mu*), or sqrt(n) times the averaged errors.
VectorXd scaled_error(const ProblemSpec& spec, const StepSchedule& effective, Algorithm algorithm,
                      const Checkpoint& c);

/// ||x - x*|| / sqrt(step_n * log u_n) with the log floored at 1.
double lil_ratio(double err_norm, double step, double partial_sum);

MonteCarloReport run_monte_carlo(const ProblemSpec& spec, const StepSchedule& schedule,
                                 const MCConfig& mc);

}  // namespace tts
