#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tts/errors.hpp"
#include "tts/problem_model.hpp"
#include "tts/schedules.hpp"
#include "tts/validation.hpp"

namespace tts {

/// plain:     theta += beta_n X,  mu += gamma_n Y
/// averaged:  same iterates, read through the running averages
/// matricial: theta += (A_theta / n) X,  mu += (A_mu / n^a) Y
enum class Algorithm { plain, averaged, matricial };

const char* to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

struct GainMatrices {
  MatrixXd A_theta;
  MatrixXd A_mu;

  bool empty() const { return A_theta.size() == 0 && A_mu.size() == 0; }
};

/// (-H^-1, -G^-1). Throws SingularityError when H or G cannot be inverted.
GainMatrices optimal_gains(const ProblemSpec& spec);

/// Shapes, A_theta H + I/2 attractive, A_mu Q22 attractive.
ValidationReport validate_gains(const ProblemSpec& spec, const GainMatrices& gains);

/// The step sizes actually used by an algorithm: the matricial variant runs
/// on beta_n = 1/n and gamma_n = n^-a whatever beta0, b, gamma0 say.
StepSchedule effective_schedule(const StepSchedule& schedule, Algorithm algorithm);

/// Iterate at index n together with running averages and partial sums
/// u = sum_{k<=n} beta_k, s = sum_{k<=n} gamma_k.
struct SAState {
  std::size_t n = 1;
  VectorXd theta, mu;
  VectorXd theta_bar, mu_bar;
  double u = 0.0, s = 0.0;

  // Kahan state for the averages and the partial sums.
  VectorXd sum_theta, carry_theta, sum_mu, carry_mu;
  CompensatedSum u_sum, s_sum;
};

SAState initial_state(const StepSchedule& schedule, const VectorXd& theta1, const VectorXd& mu1);

/// One iteration of the plain algorithm using innovations (v, w) and bias
/// values (r_theta, r_mu) for index state.n.
SAState step(const ProblemSpec& spec, const StepSchedule& schedule, const SAState& state,
             const VectorXd& v, const VectorXd& w, const VectorXd& r_theta, const VectorXd& r_mu);

/// One iteration of the matricial algorithm (beta_n = 1/n, gamma_n = n^-a).
SAState matricial_step(const ProblemSpec& spec, const SAState& state, const GainMatrices& gains,
                       double a, const VectorXd& v, const VectorXd& w, const VectorXd& r_theta,
                       const VectorXd& r_mu);

/// L/R parts of the iterate. Delta = (x - x*) - L - R is derived on demand.
struct DecompositionState {
  std::size_t n = 1;
  VectorXd L_theta, R_theta, L_mu, R_mu;
  VectorXd last_v, last_w;
};

DecompositionState initial_decomposition(const ProblemSpec& spec);

/// Advances the decomposition from index dstate.n with the innovations of the
/// same step and the increment dmu = mu_{n+1} - mu_n.
DecompositionState decompose_step(const ProblemSpec& spec, const StepSchedule& schedule,
                                  const DecompositionState& dstate, const VectorXd& v,
                                  const VectorXd& w, const VectorXd& dmu);

/// e^{beta_n H} and e^{gamma_n Q22} for n = 1..n_max. Immutable once built and
/// shared between replications.
class TransitionCache {
 public:
  TransitionCache(const ProblemSpec& spec, const StepSchedule& schedule, std::size_t n_max);

  std::size_t size() const { return exp_h_.size(); }
  const MatrixXd& exp_beta_h(std::size_t n) const { return exp_h_[n - 1]; }
  const MatrixXd& exp_gamma_q22(std::size_t n) const { return exp_q22_[n - 1]; }
  const StepSchedule& schedule() const { return schedule_; }
  bool covers(const StepSchedule& schedule, std::size_t n_max) const {
    return schedule == schedule_ && n_max <= exp_h_.size() + 1;
  }

  /// Approximate memory needed for n_max entries.
  static std::size_t bytes_for(const ProblemSpec& spec, std::size_t n_max);

 private:
  StepSchedule schedule_;
  std::vector<MatrixXd> exp_h_, exp_q22_;
};

struct DecompositionSnapshot {
  VectorXd L_theta, R_theta, Delta_theta;
  VectorXd L_mu, R_mu, Delta_mu;
};

struct Checkpoint {
  std::size_t n = 1;
  VectorXd theta, mu, theta_bar, mu_bar;
  double u = 0.0, s = 0.0;
  std::optional<DecompositionSnapshot> decomposition;
};

struct TrajectoryTrace {
  Algorithm algorithm = Algorithm::plain;
  StepSchedule schedule;  ///< effective step sizes of the run
  std::vector<Checkpoint> checkpoints;
};

/// Geometric grid round(10^{k/8}), deduplicated, plus n_final.
std::vector<std::size_t> default_checkpoint_grid(std::size_t n_final);

struct RunOptions {
  Algorithm algorithm = Algorithm::plain;
  bool track_decomposition = false;
  std::vector<std::size_t> checkpoint_grid;  ///< empty: default grid
  bool full_path = false;                    ///< checkpoint every index
  std::optional<VectorXd> theta_offset;      ///< theta_1 = theta* + offset
  std::optional<VectorXd> mu_offset;
  GainMatrices gains;                        ///< matricial; empty: optimal gains
  std::shared_ptr<const TransitionCache> cache;
  double divergence_bound = 1e9;
};

/// Thrown by run(); carries the checkpoints recorded before the failure.
class TraceDivergenceError : public DivergenceError {
 public:
  TraceDivergenceError(const DivergenceError& e, TrajectoryTrace prefix)
      : DivergenceError(e), prefix_(std::move(prefix)) {}
  const TrajectoryTrace& prefix() const noexcept { return prefix_; }

 private:
  TrajectoryTrace prefix_;
};

/// Simulates one trajectory up to index n_final using Philox stream
/// (seed, stream).
TrajectoryTrace run(const ProblemSpec& spec, const StepSchedule& schedule, std::size_t n_final,
                    std::uint64_t seed, std::uint64_t stream, const RunOptions& options = {});

}  // namespace tts
