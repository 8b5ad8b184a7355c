#include "tts/sa_engine.hpp"

#include <cmath>
#include <sstream>

#include "tts/matrix_core.hpp"
#include "tts/rng.hpp"

namespace tts {

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::plain: return "plain";
    case Algorithm::averaged: return "averaged";
    case Algorithm::matricial: return "matricial";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "plain") return Algorithm::plain;
  if (s == "averaged") return Algorithm::averaged;
  if (s == "matricial") return Algorithm::matricial;
  throw ConfigError("unknown algorithm '" + s + "' (expected plain, averaged or matricial)");
}

GainMatrices optimal_gains(const ProblemSpec& spec) {
  GainMatrices g;
  g.A_theta = -invert(derive_H(spec));
  g.A_mu = -invert(derive_G(spec));
  return g;
}

ValidationReport validate_gains(const ProblemSpec& spec, const GainMatrices& gains) {
  ValidationReport r;
  const bool shapes = gains.A_theta.rows() == spec.d && gains.A_theta.cols() == spec.d &&
                      gains.A_mu.rows() == spec.d_prime && gains.A_mu.cols() == spec.d_prime;
  r.add("gains", "A_theta is d x d and A_mu is d' x d'", shapes);
  if (!shapes) return r;

  const MatrixXd shifted =
      gains.A_theta * derive_H(spec) + 0.5 * MatrixXd::Identity(spec.d, spec.d);
  const double gap_theta = lambda_of(shifted).lambda_gap;
  const double gap_mu = lambda_of(gains.A_mu * spec.Q22).lambda_gap;
  r.record("Lambda(A_theta H + I/2)", gap_theta);
  r.record("Lambda(A_mu Q22)", gap_mu);
  std::ostringstream os;
  os << "Lambda = " << gap_theta;
  r.add("gains", "A_theta H + I/2 attractive", gap_theta > 0, os.str());
  os.str("");
  os << "Lambda = " << gap_mu;
  r.add("gains", "A_mu Q22 attractive", gap_mu > 0, os.str());
  return r;
}

StepSchedule effective_schedule(const StepSchedule& schedule, Algorithm algorithm) {
  if (algorithm != Algorithm::matricial) return schedule;
  StepSchedule e;
  e.beta0 = 1.0;
  e.b = 1.0;
  e.gamma0 = 1.0;
  e.a = schedule.a;
  e.regime = Regime::theorem1;
  return e;
}

SAState initial_state(const StepSchedule& schedule, const VectorXd& theta1, const VectorXd& mu1) {
  SAState st;
  st.n = 1;
  st.theta = theta1;
  st.mu = mu1;
  st.theta_bar = theta1;
  st.mu_bar = mu1;
  st.sum_theta = theta1;
  st.sum_mu = mu1;
  st.carry_theta = VectorXd::Zero(theta1.size());
  st.carry_mu = VectorXd::Zero(mu1.size());
  st.u_sum.add(schedule.beta(1));
  st.s_sum.add(schedule.gamma(1));
  st.u = st.u_sum.value();
  st.s = st.s_sum.value();
  return st;
}

namespace {

void kahan_add(VectorXd& sum, VectorXd& carry, const VectorXd& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double y = x(i) - carry(i);
    const double t = sum(i) + y;
    carry(i) = (t - sum(i)) - y;
    sum(i) = t;
  }
}

class Stepper {
 public:
  Stepper(const ProblemSpec& spec, const StepSchedule& schedule, const GainMatrices* gains,
          double bound)
      : spec_(spec),
        schedule_(schedule),
        gains_(gains),
        bound_(bound),
        d_(spec.d),
        dp_(spec.d_prime),
        z_(spec.d + spec.d_prime),
        rho_(VectorXd::Zero(spec.d + spec.d_prime)),
        x_(spec.d),
        y_(spec.d_prime),
        dtheta_(spec.d),
        dmu_(spec.d_prime) {}

  void advance(SAState& st, const VectorXd& v, const VectorXd& w, const VectorXd& r_theta,
               const VectorXd& r_mu) {
    if (st.theta.size() != d_ || st.mu.size() != dp_ || v.size() != d_ || w.size() != dp_ ||
        r_theta.size() != d_ || r_mu.size() != dp_) {
      throw DimensionError("step: state, innovation or bias sizes do not match the problem");
    }
    const std::size_t n = st.n;
    const double beta = schedule_.beta(n);
    const double gamma = schedule_.gamma(n);

    z_.head(d_) = st.theta - spec_.theta_star;
    z_.tail(dp_) = st.mu - spec_.mu_star;
    if (!spec_.residual.linear()) spec_.residual.evaluate(z_, rho_);

    x_.noalias() = spec_.Q11 * z_.head(d_);
    x_.noalias() += spec_.Q12 * z_.tail(dp_);
    x_ += r_theta + v;
    y_.noalias() = spec_.Q21 * z_.head(d_);
    y_.noalias() += spec_.Q22 * z_.tail(dp_);
    y_ += r_mu + w;
    if (!spec_.residual.linear()) {
      x_ += rho_.head(d_);
      y_ += rho_.tail(dp_);
    }

    if (gains_ != nullptr) {
      dtheta_.noalias() = beta * (gains_->A_theta * x_);
      dmu_.noalias() = gamma * (gains_->A_mu * y_);
    } else {
      dtheta_ = beta * x_;
      dmu_ = gamma * y_;
    }
    st.theta += dtheta_;
    st.mu += dmu_;

    if (!st.theta.allFinite() || !st.mu.allFinite()) {
      throw DivergenceError(n + 1, "non-finite iterate");
    }
    const double size = st.theta.norm() + st.mu.norm();
    if (size > bound_) {
      std::ostringstream os;
      os << "||theta|| + ||mu|| = " << size << " exceeds " << bound_;
      throw DivergenceError(n + 1, os.str());
    }

    st.n = n + 1;
    st.u_sum.add(schedule_.beta(st.n));
    st.s_sum.add(schedule_.gamma(st.n));
    st.u = st.u_sum.value();
    st.s = st.s_sum.value();
    kahan_add(st.sum_theta, st.carry_theta, st.theta);
    kahan_add(st.sum_mu, st.carry_mu, st.mu);
    const double inv = 1.0 / static_cast<double>(st.n);
    st.theta_bar = st.sum_theta * inv;
    st.mu_bar = st.sum_mu * inv;
  }

  const VectorXd& dmu() const { return dmu_; }

 private:
  const ProblemSpec& spec_;
  StepSchedule schedule_;
  const GainMatrices* gains_;
  double bound_;
  Eigen::Index d_, dp_;
  VectorXd z_, rho_, x_, y_, dtheta_, dmu_;
};

class Decomposer {
 public:
  Decomposer(const ProblemSpec& spec, const StepSchedule& schedule,
             std::shared_ptr<const TransitionCache> cache)
      : schedule_(schedule),
        cache_(std::move(cache)),
        h_(derive_H(spec)),
        k_(coupling_theta(spec)),
        q21_(spec.Q21),
        q22_(spec.Q22),
        work_theta_(spec.d),
        work_mu_(spec.d_prime),
        sum_theta_(spec.d) {}

  void advance(DecompositionState& ds, const VectorXd& v, const VectorXd& w,
               const VectorXd& dmu) {
    if (v.size() != ds.L_theta.size() || w.size() != ds.L_mu.size() ||
        dmu.size() != ds.L_mu.size()) {
      throw DimensionError("decompose_step: innovation sizes do not match the state");
    }
    const std::size_t n = ds.n;
    const double beta = schedule_.beta(n);
    const double gamma = schedule_.gamma(n);
    const MatrixXd* eh;
    const MatrixXd* eq;
    if (cache_ && n <= cache_->size()) {
      eh = &cache_->exp_beta_h(n);
      eq = &cache_->exp_gamma_q22(n);
    } else {
      exp_h_ = mat_exp(beta * h_);
      exp_q22_ = mat_exp(gamma * q22_);
      eh = &exp_h_;
      eq = &exp_q22_;
    }

    sum_theta_ = ds.L_theta + ds.R_theta;

    work_theta_.noalias() = (*eh) * ds.L_theta;
    ds.L_theta = work_theta_;
    work_theta_.noalias() = k_ * w;
    ds.L_theta += beta * (v - work_theta_);

    work_theta_.noalias() = (*eh) * ds.R_theta;
    ds.R_theta = work_theta_;
    work_theta_.noalias() = k_ * dmu;
    ds.R_theta += (beta / gamma) * work_theta_;

    work_mu_.noalias() = (*eq) * ds.L_mu;
    ds.L_mu = work_mu_ + gamma * w;

    work_mu_.noalias() = (*eq) * ds.R_mu;
    ds.R_mu = work_mu_;
    work_mu_.noalias() = q21_ * sum_theta_;
    ds.R_mu += gamma * work_mu_;

    ds.last_v = v;
    ds.last_w = w;
    ds.n = n + 1;
  }

 private:
  StepSchedule schedule_;
  std::shared_ptr<const TransitionCache> cache_;
  MatrixXd h_, k_, q21_, q22_;
  MatrixXd exp_h_, exp_q22_;
  VectorXd work_theta_, work_mu_, sum_theta_;
};

Checkpoint snapshot(const ProblemSpec& spec, const SAState& st, const DecompositionState* ds) {
  Checkpoint c;
  c.n = st.n;
  c.theta = st.theta;
  c.mu = st.mu;
  c.theta_bar = st.theta_bar;
  c.mu_bar = st.mu_bar;
  c.u = st.u;
  c.s = st.s;
  if (ds != nullptr) {
    DecompositionSnapshot d;
    d.L_theta = ds->L_theta;
    d.R_theta = ds->R_theta;
    d.L_mu = ds->L_mu;
    d.R_mu = ds->R_mu;
    d.Delta_theta = (st.theta - spec.theta_star) - ds->L_theta - ds->R_theta;
    d.Delta_mu = (st.mu - spec.mu_star) - ds->L_mu - ds->R_mu;
    c.decomposition = std::move(d);
  }
  return c;
}

}  // namespace

SAState step(const ProblemSpec& spec, const StepSchedule& schedule, const SAState& state,
             const VectorXd& v, const VectorXd& w, const VectorXd& r_theta, const VectorXd& r_mu) {
  SAState next = state;
  Stepper(spec, schedule, nullptr, std::numeric_limits<double>::infinity())
      .advance(next, v, w, r_theta, r_mu);
  return next;
}

SAState matricial_step(const ProblemSpec& spec, const SAState& state, const GainMatrices& gains,
                       double a, const VectorXd& v, const VectorXd& w, const VectorXd& r_theta,
                       const VectorXd& r_mu) {
  if (!(a > 0.5 && a < 1.0)) throw DomainError("matricial_step: a must lie in (1/2, 1)");
  StepSchedule base;
  base.a = a;
  SAState next = state;
  Stepper(spec, effective_schedule(base, Algorithm::matricial), &gains,
          std::numeric_limits<double>::infinity())
      .advance(next, v, w, r_theta, r_mu);
  return next;
}

DecompositionState initial_decomposition(const ProblemSpec& spec) {
  DecompositionState ds;
  ds.n = 1;
  ds.L_theta = VectorXd::Zero(spec.d);
  ds.R_theta = VectorXd::Zero(spec.d);
  ds.L_mu = VectorXd::Zero(spec.d_prime);
  ds.R_mu = VectorXd::Zero(spec.d_prime);
  ds.last_v = VectorXd::Zero(spec.d);
  ds.last_w = VectorXd::Zero(spec.d_prime);
  return ds;
}

DecompositionState decompose_step(const ProblemSpec& spec, const StepSchedule& schedule,
                                  const DecompositionState& dstate, const VectorXd& v,
                                  const VectorXd& w, const VectorXd& dmu) {
  DecompositionState next = dstate;
  Decomposer(spec, schedule, nullptr).advance(next, v, w, dmu);
  return next;
}

TransitionCache::TransitionCache(const ProblemSpec& spec, const StepSchedule& schedule,
                                 std::size_t n_max)
    : schedule_(schedule) {
  const MatrixXd h = derive_H(spec);
  exp_h_.reserve(n_max);
  exp_q22_.reserve(n_max);
  for (std::size_t n = 1; n <= n_max; ++n) {
    exp_h_.push_back(mat_exp(schedule.beta(n) * h));
    exp_q22_.push_back(mat_exp(schedule.gamma(n) * spec.Q22));
  }
}

std::size_t TransitionCache::bytes_for(const ProblemSpec& spec, std::size_t n_max) {
  const auto per = static_cast<std::size_t>(spec.d * spec.d + spec.d_prime * spec.d_prime) *
                       sizeof(double) +
                   2 * sizeof(MatrixXd);
  return per * n_max;
}

std::vector<std::size_t> default_checkpoint_grid(std::size_t n_final) {
  std::vector<std::size_t> grid;
  for (int k = 0;; ++k) {
    const auto idx = static_cast<std::size_t>(std::llround(std::pow(10.0, k / 8.0)));
    if (idx >= n_final) break;
    if (grid.empty() || idx > grid.back()) grid.push_back(idx);
  }
  grid.push_back(n_final);
  return grid;
}

TrajectoryTrace run(const ProblemSpec& spec, const StepSchedule& schedule, std::size_t n_final,
                    std::uint64_t seed, std::uint64_t stream, const RunOptions& options) {
  spec.check();
  if (n_final == 0) throw DomainError("run: n_final must be at least 1");
  const StepSchedule eff = effective_schedule(schedule, options.algorithm);

  GainMatrices gains;
  if (options.algorithm == Algorithm::matricial) {
    if (options.track_decomposition) {
      throw ConfigError("decomposition tracking is defined for the plain and averaged algorithms only");
    }
    gains = options.gains.empty() ? optimal_gains(spec) : options.gains;
    const ValidationReport gr = validate_gains(spec, gains);
    if (!gr.passed()) {
      std::string why;
      for (const auto* f : gr.failures()) why += " " + f->description + ";";
      throw InfeasibilityError("matricial gains rejected:" + why);
    }
  }

  const VectorXd off_theta = options.theta_offset.value_or(default_offset(spec.d));
  const VectorXd off_mu = options.mu_offset.value_or(default_offset(spec.d_prime));
  if (off_theta.size() != spec.d || off_mu.size() != spec.d_prime) {
    throw DimensionError("run: initial offsets do not match the problem dimensions");
  }

  std::vector<std::size_t> grid;
  if (options.full_path) {
    grid.resize(n_final);
    for (std::size_t i = 0; i < n_final; ++i) grid[i] = i + 1;
  } else if (options.checkpoint_grid.empty()) {
    grid = default_checkpoint_grid(n_final);
  } else {
    for (std::size_t idx : options.checkpoint_grid) {
      if (idx < 1 || idx > n_final) continue;
      if (!grid.empty() && idx <= grid.back()) {
        throw ConfigError("checkpoint grid must be strictly increasing");
      }
      grid.push_back(idx);
    }
    if (grid.empty() || grid.back() != n_final) grid.push_back(n_final);
  }

  TrajectoryTrace trace;
  trace.algorithm = options.algorithm;
  trace.schedule = eff;
  trace.checkpoints.reserve(grid.size());

  PhiloxEngine engine(seed, stream);
  NoiseSampler sampler(spec.noise, spec.d);
  Stepper stepper(spec, eff, options.algorithm == Algorithm::matricial ? &gains : nullptr,
                  options.divergence_bound);

  std::shared_ptr<const TransitionCache> cache;
  if (options.cache && options.cache->covers(eff, n_final)) cache = options.cache;
  std::optional<Decomposer> decomposer;
  std::optional<DecompositionState> ds;
  if (options.track_decomposition) {
    decomposer.emplace(spec, eff, cache);
    ds = initial_decomposition(spec);
  }

  SAState st = initial_state(eff, spec.theta_star + off_theta, spec.mu_star + off_mu);
  VectorXd v(spec.d), w(spec.d_prime);
  VectorXd r_theta = VectorXd::Zero(spec.d), r_mu = VectorXd::Zero(spec.d_prime);
  const bool biased = spec.bias.kind != BiasKind::zero;

  std::size_t next = 0;
  auto maybe_record = [&] {
    if (next < grid.size() && st.n == grid[next]) {
      trace.checkpoints.push_back(snapshot(spec, st, ds ? &*ds : nullptr));
      ++next;
    }
  };
  maybe_record();

  while (st.n < n_final) {
    sampler.draw(engine, v, w);
    if (biased) spec.bias.at(st.n, r_theta, r_mu);
    try {
      stepper.advance(st, v, w, r_theta, r_mu);
    } catch (const DivergenceError& e) {
      throw TraceDivergenceError(e, std::move(trace));
    }
    if (decomposer) decomposer->advance(*ds, v, w, stepper.dmu());
    maybe_record();
  }
  return trace;
}

}  // namespace tts
