#include "tts/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <sstream>
#include <thread>

#include "tts/asymptotics.hpp"
#include "tts/errors.hpp"

namespace tts {

namespace {

double rel_error(const MatrixXd& emp, const MatrixXd& pred, const char* name, bool& ok,
                 std::string& diag) {
  const double pn = pred.norm();
  const double diff = (emp - pred).norm();
  if (pn == 0.0) {
    if (diff == 0.0) return 0.0;
    ok = false;
    diag += std::string(name) + ": predicted block is zero but empirical is not; ";
    return std::numeric_limits<double>::infinity();
  }
  return diff / pn;
}

}  // namespace

Verdict clt_verdict(const MatrixXd& empirical, const MatrixXd& predicted,
                    const BlockStructure& structure, double tol_rel, double tol_cross) {
  if (empirical.rows() != predicted.rows() || empirical.cols() != predicted.cols() ||
      empirical.rows() != empirical.cols()) {
    throw DimensionError("clt_verdict: empirical and predicted covariances differ in shape");
  }
  const auto d = structure.d;
  const auto dp = empirical.rows() - d;
  if (d <= 0 || dp < 0) throw DimensionError("clt_verdict: theta block size out of range");

  Verdict v;
  bool ok = true;
  v.rel_theta = rel_error(empirical.topLeftCorner(d, d), predicted.topLeftCorner(d, d), "theta",
                          ok, v.diagnostic);
  if (dp > 0) {
    v.rel_mu = rel_error(empirical.bottomRightCorner(dp, dp), predicted.bottomRightCorner(dp, dp),
                         "mu", ok, v.diagnostic);
    const double scale = std::sqrt(predicted.topLeftCorner(d, d).norm() *
                                   predicted.bottomRightCorner(dp, dp).norm());
    const double cross = empirical.topRightCorner(d, dp).norm();
    if (scale == 0.0) {
      v.cross = cross == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
      v.cross = cross / scale;
    }
  }
  v.rel_full = rel_error(empirical, predicted, "full", ok, v.diagnostic);

  if (structure.shape == CovarianceShape::block_diagonal) {
    ok = ok && v.rel_theta <= tol_rel && v.rel_mu <= tol_rel && v.cross <= tol_cross;
  } else {
    ok = ok && v.rel_full <= tol_rel && v.rel_theta <= tol_rel && v.rel_mu <= tol_rel;
  }
  v.pass = ok;
  return v;
}

std::pair<VectorXd, MatrixXd> sample_covariance(const std::vector<VectorXd>& samples) {
  if (samples.size() < 2) throw DomainError("sample_covariance: need at least 2 samples");
  const auto dim = samples.front().size();
  VectorXd mean = VectorXd::Zero(dim);
  for (const auto& s : samples) {
    if (s.size() != dim) throw DimensionError("sample_covariance: samples differ in dimension");
    mean += s;
  }
  mean /= static_cast<double>(samples.size());
  MatrixXd cov = MatrixXd::Zero(dim, dim);
  VectorXd c(dim);
  for (const auto& s : samples) {
    c = s - mean;
    cov.noalias() += c * c.transpose();
  }
  cov /= static_cast<double>(samples.size() - 1);
  cov = (0.5 * (cov + cov.transpose())).eval();
  return {std::move(mean), std::move(cov)};
}

double rate_slope(const std::vector<std::pair<std::size_t, double>>& points) {
  if (points.size() < 4) {
    throw DegenerateDataError("rate_slope: need at least 4 checkpoints, got " +
                              std::to_string(points.size()));
  }
  std::size_t lo = points.front().first, hi = lo;
  for (const auto& [n, r] : points) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw DegenerateDataError("rate_slope: non-positive rms at n = " + std::to_string(n));
    }
    lo = std::min(lo, n);
    hi = std::max(hi, n);
  }
  if (lo == 0 || std::log10(static_cast<double>(hi) / static_cast<double>(lo)) < 1.5 - 1e-12) {
    throw DegenerateDataError("rate_slope: checkpoints must span at least 1.5 decades");
  }
  double mx = 0.0, my = 0.0;
  for (const auto& [n, r] : points) {
    mx += std::log(static_cast<double>(n));
    my += std::log(r);
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [n, r] : points) {
    const double dx = std::log(static_cast<double>(n)) - mx;
    sxy += dx * (std::log(r) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

std::vector<std::pair<std::size_t, double>> trailing_window(
    const std::vector<std::pair<std::size_t, double>>& points, std::size_t n_lo, std::size_t n_hi) {
  std::vector<std::pair<std::size_t, double>> out;
  for (const auto& p : points) {
    if (p.first >= n_lo && p.first <= n_hi) out.push_back(p);
  }
  return out;
}

double sample_kurtosis(const std::vector<double>& x) {
  if (x.size() < 2) throw DomainError("sample_kurtosis: need at least 2 values");
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double c = (v - m) * (v - m);
    m2 += c;
    m4 += c * c;
  }
  m2 /= static_cast<double>(x.size());
  m4 /= static_cast<double>(x.size());
  if (m2 == 0.0) throw DegenerateDataError("sample_kurtosis: zero variance");
  return m4 / (m2 * m2);
}

double median(std::vector<double> x) {
  if (x.empty()) throw DomainError("median of an empty set");
  const std::size_t mid = x.size() / 2;
  std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(mid), x.end());
  const double upper = x[mid];
  if (x.size() % 2 == 1) return upper;
  const double lower = *std::max_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

DecompositionRatios decomposition_ratios(const TrajectoryTrace& trace) {
  DecompositionRatios r;
  for (const auto& c : trace.checkpoints) {
    if (!c.decomposition) {
      throw ConfigError("negligibility curves need a run with decomposition tracking");
    }
    const auto& dc = *c.decomposition;
    const double sb = std::sqrt(trace.schedule.beta(c.n));
    const double sg = std::sqrt(trace.schedule.gamma(c.n));
    r.R_theta.push_back(dc.R_theta.norm() / sb);
    r.Delta_theta.push_back(dc.Delta_theta.norm() / sb);
    r.R_mu.push_back(dc.R_mu.norm() / sg);
    r.Delta_mu.push_back(dc.Delta_mu.norm() / sb);
    const double lt = dc.L_theta.norm(), lm = dc.L_mu.norm();
    r.R_over_L_theta.push_back(lt > 0 ? dc.R_theta.norm() / lt
                                      : std::numeric_limits<double>::quiet_NaN());
    r.R_over_L_mu.push_back(lm > 0 ? dc.R_mu.norm() / lm : std::numeric_limits<double>::quiet_NaN());
  }
  return r;
}

NegligibilityCurves negligibility_curves(const std::vector<std::size_t>& n,
                                         const std::vector<DecompositionRatios>& reps) {
  if (reps.empty()) throw ConfigError("negligibility curves need decomposition data");
  NegligibilityCurves out;
  out.n = n;
  auto column = [&](auto member, std::size_t k, bool skip_nan) {
    std::vector<double> v;
    v.reserve(reps.size());
    for (const auto& r : reps) {
      const auto& series = r.*member;
      if (series.size() != n.size()) throw DimensionError("negligibility: ragged replications");
      if (skip_nan && std::isnan(series[k])) continue;
      v.push_back(series[k]);
    }
    return v.empty() ? std::numeric_limits<double>::quiet_NaN() : median(std::move(v));
  };
  for (std::size_t k = 0; k < n.size(); ++k) {
    out.R_theta.push_back(column(&DecompositionRatios::R_theta, k, false));
    out.Delta_theta.push_back(column(&DecompositionRatios::Delta_theta, k, false));
    out.R_mu.push_back(column(&DecompositionRatios::R_mu, k, false));
    out.Delta_mu.push_back(column(&DecompositionRatios::Delta_mu, k, false));
    out.R_over_L_theta.push_back(column(&DecompositionRatios::R_over_L_theta, k, true));
    out.R_over_L_mu.push_back(column(&DecompositionRatios::R_over_L_mu, k, true));
  }
  if (n.size() >= 3) {
    std::size_t mono = 0;
    const std::size_t k = n.size() - 1;
    for (const auto& r : reps) {
      const auto& s = r.Delta_theta;
      if (s[k] < s[k - 1] && s[k - 1] < s[k - 2]) ++mono;
    }
    out.delta_theta_monotone_fraction =
        static_cast<double>(mono) / static_cast<double>(reps.size());
  }
  return out;
}

VectorXd scaled_error(const ProblemSpec& spec, const StepSchedule& effective, Algorithm algorithm,
                      const Checkpoint& c) {
  VectorXd out(spec.d + spec.d_prime);
  if (algorithm == Algorithm::averaged) {
    const double sn = std::sqrt(static_cast<double>(c.n));
    out << sn * (c.theta_bar - spec.theta_star), sn * (c.mu_bar - spec.mu_star);
  } else {
    out << (c.theta - spec.theta_star) / std::sqrt(effective.beta(c.n)),
        (c.mu - spec.mu_star) / std::sqrt(effective.gamma(c.n));
  }
  return out;
}

double lil_ratio(double err_norm, double step, double partial_sum) {
  const double l = std::max(std::log(partial_sum), 1.0);
  return err_norm / std::sqrt(step * l);
}

bool MonteCarloReport::passed() const {
  if (!valid || !clt.pass) return false;
  if (slope_theta && !slope_theta->pass) return false;
  if (slope_mu && !slope_mu->pass) return false;
  if (lil_reference_n != 0 && !lil_pass) return false;
  for (const auto& t : trends) {
    if (!t.pass) return false;
  }
  return true;
}

namespace {

struct ReplicationResult {
  bool ok = false;
  ReplicationFailure failure;
  std::vector<std::size_t> n;
  std::vector<VectorXd> scaled;
  std::vector<double> err_theta, err_mu, lil_theta, lil_mu;
  std::optional<DecompositionRatios> ratios;
};

void check_regime(const StepSchedule& schedule, Algorithm algorithm) {
  if (algorithm == Algorithm::averaged) {
    if (schedule.regime != Regime::averaging) {
      throw ConfigError("averaged algorithm needs step.regime = averaging (A'3)");
    }
    if (!(schedule.b < 1.0)) throw ConfigError("averaging regime needs b < 1 (A'3)");
  } else if (schedule.regime == Regime::averaging) {
    throw ConfigError(std::string("step.regime = averaging does not match algorithm ") +
                      to_string(algorithm));
  }
  if (algorithm == Algorithm::matricial && !(schedule.a > 0.5 && schedule.a < 1.0)) {
    throw ConfigError("matricial algorithm needs 1/2 < a < 1");
  }
}

std::size_t largest_at_most(const std::vector<std::size_t>& n, std::size_t limit) {
  std::size_t best = 0;
  for (std::size_t x : n) {
    if (x <= limit) best = std::max(best, x);
  }
  return best;
}

std::size_t position(const std::vector<std::size_t>& n, std::size_t value) {
  return static_cast<std::size_t>(std::find(n.begin(), n.end(), value) - n.begin());
}

// max of series over checkpoints with n in [hi/10, hi]
double window_max(const std::vector<std::size_t>& n, const std::vector<double>& s, std::size_t hi) {
  double m = 0.0;
  for (std::size_t k = 0; k < n.size(); ++k) {
    if (n[k] * 10 >= hi && n[k] <= hi) m = std::max(m, s[k]);
  }
  return m;
}

}  // namespace

MonteCarloReport run_monte_carlo(const ProblemSpec& spec, const StepSchedule& schedule,
                                 const MCConfig& mc) {
  spec.check();
  if (mc.replications < 2) throw ConfigError("mc.replications must be at least 2");
  if (mc.n_final < 1) throw ConfigError("run.n_final must be at least 1");
  check_regime(schedule, mc.algorithm);

  const StepSchedule eff = effective_schedule(schedule, mc.algorithm);

  MonteCarloReport rep;
  rep.problem = spec.name;
  rep.algorithm = mc.algorithm;
  rep.schedule = eff;
  rep.replications = mc.replications;
  rep.n_final = mc.n_final;
  rep.base_seed = mc.base_seed;
  rep.tol = mc.tol;
  rep.structure.d = spec.d;
  rep.structure.shape = mc.algorithm == Algorithm::averaged ? CovarianceShape::full
                                                            : CovarianceShape::block_diagonal;
  rep.predicted = predicted_covariance(spec, schedule, mc.algorithm, mc.gains);

  RunOptions opts;
  opts.algorithm = mc.algorithm;
  opts.track_decomposition = mc.track_decomposition;
  opts.checkpoint_grid = mc.checkpoint_grid;
  opts.theta_offset = mc.theta_offset;
  opts.mu_offset = mc.mu_offset;
  opts.gains = mc.gains;
  if (mc.track_decomposition && mc.n_final > 1 &&
      TransitionCache::bytes_for(spec, mc.n_final) <= (std::size_t{512} << 20)) {
    opts.cache = std::make_shared<const TransitionCache>(spec, eff, mc.n_final - 1);
  }

  std::vector<ReplicationResult> results(mc.replications);
  auto work = [&](std::size_t r) {
    ReplicationResult& out = results[r];
    try {
      const TrajectoryTrace trace = run(spec, schedule, mc.n_final, mc.base_seed, r, opts);
      for (const auto& c : trace.checkpoints) {
        out.n.push_back(c.n);
        out.scaled.push_back(scaled_error(spec, eff, mc.algorithm, c));
        const double et = (c.theta - spec.theta_star).norm();
        const double em = (c.mu - spec.mu_star).norm();
        out.err_theta.push_back(et);
        out.err_mu.push_back(em);
        out.lil_theta.push_back(lil_ratio(et, eff.beta(c.n), c.u));
        out.lil_mu.push_back(lil_ratio(em, eff.gamma(c.n), c.s));
      }
      if (mc.track_decomposition) out.ratios = decomposition_ratios(trace);
      out.ok = true;
    } catch (const DivergenceError& e) {
      out.failure = {r, e.index(), e.what()};
    } catch (const std::exception& e) {
      out.failure = {r, 0, e.what()};
    }
  };

  unsigned threads = mc.threads != 0 ? mc.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, mc.replications));
  if (threads <= 1) {
    for (std::size_t r = 0; r < mc.replications; ++r) work(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < mc.replications; r = next++) work(r);
      });
    }
    for (auto& th : pool) th.join();
  }

  // Aggregate in replication order, whatever order the workers finished in.
  std::vector<const ReplicationResult*> good;
  for (const auto& r : results) {
    if (r.ok) good.push_back(&r);
    else rep.failures.push_back(r.failure);
  }
  rep.valid = rep.failures.empty();
  if (good.size() < 2) {
    rep.valid = false;
    return rep;
  }

  const std::vector<std::size_t>& n = good.front()->n;
  const std::size_t m = good.size();
  for (std::size_t k = 0; k < n.size(); ++k) {
    CheckpointSummary cs;
    cs.n = n[k];
    cs.beta = eff.beta(n[k]);
    cs.gamma = eff.gamma(n[k]);
    std::vector<VectorXd> samples;
    samples.reserve(m);
    double st = 0.0, sm = 0.0;
    for (const auto* r : good) {
      samples.push_back(r->scaled[k]);
      st += r->err_theta[k] * r->err_theta[k];
      sm += r->err_mu[k] * r->err_mu[k];
      cs.lil_theta_max = std::max(cs.lil_theta_max, r->lil_theta[k]);
      cs.lil_mu_max = std::max(cs.lil_mu_max, r->lil_mu[k]);
    }
    cs.rms_theta = std::sqrt(st / static_cast<double>(m));
    cs.rms_mu = std::sqrt(sm / static_cast<double>(m));
    std::tie(cs.mean, cs.covariance) = sample_covariance(samples);
    cs.verdict = clt_verdict(cs.covariance, rep.predicted, rep.structure, mc.tol.rel, mc.tol.cross);
    if (k + 1 == n.size() && mc.keep_terminal_samples) rep.terminal_samples = std::move(samples);
    rep.checkpoints.push_back(std::move(cs));
  }
  rep.clt = rep.checkpoints.back().verdict;

  // rate slopes over the trailing two decades
  {
    std::vector<std::pair<std::size_t, double>> pt, pm;
    for (const auto& cs : rep.checkpoints) {
      pt.emplace_back(cs.n, cs.rms_theta);
      pm.emplace_back(cs.n, cs.rms_mu);
    }
    const auto wt = trailing_window(pt, mc.n_final / 100, mc.n_final);
    const auto wm = trailing_window(pm, mc.n_final / 100, mc.n_final);
    try {
      SlopeFit ft{rate_slope(wt), -eff.b / 2, wt.size(), false};
      ft.pass = std::abs(ft.slope - ft.target) <= mc.tol.slope;
      SlopeFit fm{rate_slope(wm), -eff.a / 2, wm.size(), false};
      fm.pass = std::abs(fm.slope - fm.target) <= mc.tol.slope;
      rep.slope_theta = ft;
      rep.slope_mu = fm;
    } catch (const DegenerateDataError&) {
      // too short a grid: no slope reported
    }
  }

  // window stability of the strong-rate ratios
  rep.lil_reference_n = largest_at_most(n, mc.n_final / 10);
  if (rep.lil_reference_n != 0 && rep.lil_reference_n < mc.n_final) {
    std::size_t stable_t = 0, stable_m = 0;
    for (const auto* r : good) {
      if (window_max(n, r->lil_theta, mc.n_final) <=
          mc.tol.lil_factor * window_max(n, r->lil_theta, rep.lil_reference_n)) {
        ++stable_t;
      }
      if (window_max(n, r->lil_mu, mc.n_final) <=
          mc.tol.lil_factor * window_max(n, r->lil_mu, rep.lil_reference_n)) {
        ++stable_m;
      }
    }
    rep.lil_stable_theta = static_cast<double>(stable_t) / static_cast<double>(m);
    rep.lil_stable_mu = static_cast<double>(stable_m) / static_cast<double>(m);
    rep.lil_pass =
        rep.lil_stable_theta >= mc.tol.lil_fraction && rep.lil_stable_mu >= mc.tol.lil_fraction;
  } else {
    rep.lil_reference_n = 0;
  }

  if (mc.track_decomposition) {
    std::vector<DecompositionRatios> ratios;
    ratios.reserve(m);
    for (const auto* r : good) ratios.push_back(*r->ratios);
    rep.negligibility = negligibility_curves(n, ratios);
    const std::size_t early = largest_at_most(n, mc.n_final / 100);
    if (early != 0 && early < mc.n_final) {
      const std::size_t ke = position(n, early), kl = n.size() - 1;
      const auto& nc = *rep.negligibility;
      auto trend = [&](const char* name, const std::vector<double>& s) {
        TrendCheck t{name, s[ke], s[kl], false};
        t.pass = t.late < mc.tol.negligibility * t.early;
        rep.trends.push_back(t);
      };
      trend("R_theta/sqrt(beta)", nc.R_theta);
      trend("Delta_theta/sqrt(beta)", nc.Delta_theta);
      trend("R_mu/sqrt(gamma)", nc.R_mu);
      trend("Delta_mu/sqrt(beta)", nc.Delta_mu);
    }
  }

  // soft normality diagnostic on the terminal scaled errors
  {
    const std::size_t k = n.size() - 1;
    const auto dim = good.front()->scaled[k].size();
    rep.kurtosis_ok = true;
    for (Eigen::Index j = 0; j < dim; ++j) {
      std::vector<double> col;
      col.reserve(m);
      for (const auto* r : good) col.push_back(r->scaled[k](j));
      double kv;
      try {
        kv = sample_kurtosis(col);
      } catch (const DegenerateDataError&) {
        kv = std::numeric_limits<double>::quiet_NaN();
      }
      rep.kurtosis.push_back(kv);
      if (!(std::abs(kv - 3.0) <= mc.tol.kurtosis)) rep.kurtosis_ok = false;
    }
  }
  return rep;
}

}  // namespace tts
