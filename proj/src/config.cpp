#include "tts/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

#include "json.hpp"
#include "tts/errors.hpp"

namespace tts {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_vector(const VectorXd& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v(i));
  }
  return out + "]";
}

std::string format_matrix(const MatrixXd& m) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i) out += ", ";
    out += format_vector(m.row(i).transpose());
  }
  return out + "]";
}

double parse_double(const std::string& s) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double x = std::strtod(begin, &end);
  if (end == begin || *end != '\0') throw DomainError("expected a real number, got '" + s + "'");
  return x;
}

VectorXd parse_vector(const std::string& s) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(s);
  } catch (const nlohmann::json::exception&) {
    throw DomainError("expected a vector literal [x, y, ...], got '" + s + "'");
  }
  if (!j.is_array()) throw DomainError("expected a vector literal [x, y, ...]");
  VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw DomainError("vector entries must be numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

MatrixXd parse_matrix(const std::string& s) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(s);
  } catch (const nlohmann::json::exception&) {
    throw DomainError("expected a matrix literal [[row], [row], ...], got '" + s + "'");
  }
  if (!j.is_array()) throw DomainError("expected a matrix literal [[row], ...]");
  if (j.empty()) return MatrixXd(0, 0);
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw DomainError("matrix rows must be arrays of equal length");
    }
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) throw DomainError("matrix entries must be numbers");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
    }
  }
  return m;
}

namespace {

constexpr int kMaxResidualComponents = 64;

const std::vector<std::string> kKeys = {
    "problem.name",      "problem.d",          "problem.d_prime",   "problem.theta_star",
    "problem.mu_star",   "problem.Q11",        "problem.Q12",       "problem.Q21",
    "problem.Q22",       "noise.gamma",        "noise.distribution", "noise.moment_order",
    "residual.kind",     "residual.clamp_radius", "residual.c<i>",  "bias.kind",
    "bias.theta",        "bias.mu",            "bias.rho",          "step.a",
    "step.b",            "step.beta0",         "step.gamma0",       "step.regime",
    "algorithm.kind",    "algorithm.gains",    "algorithm.A_theta", "algorithm.A_mu",
    "init.theta_offset", "init.mu_offset",     "run.n_final",       "run.seed",
    "run.stream",        "run.decomposition",  "run.full_path",     "run.checkpoints",
    "mc.replications",   "mc.threads",         "mc.tol_rel",        "mc.tol_cross",
    "mc.tol_slope",      "mc.lil_factor",      "mc.lil_fraction",   "mc.negligibility",
    "mc.kurtosis",       "mc.dump_samples",    "output.dir",        "output.prefix"};

bool residual_component_key(const std::string& key, int* index) {
  if (key.rfind("residual.c", 0) != 0 || key.size() <= 10) return false;
  int v = 0;
  const char* b = key.data() + 10;
  const char* e = key.data() + key.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || v < 1 || v > kMaxResidualComponents) return false;
  if (index) *index = v;
  return true;
}

bool known_key(const std::string& key) {
  if (residual_component_key(key, nullptr)) return true;
  return key != "residual.c<i>" && std::find(kKeys.begin(), kKeys.end(), key) != kKeys.end();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  std::size_t line = 0;
};

class Reader {
 public:
  explicit Reader(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
      ++line;
      const auto hash = raw.find('#');
      const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string::npos) throw ParseError(line, body, "expected 'section.key = value'");
      const std::string key = trim(body.substr(0, eq));
      const std::string value = trim(body.substr(eq + 1));
      if (!known_key(key)) throw ParseError(line, key, "unknown key");
      if (value.empty()) throw ParseError(line, key, "missing value");
      entries_[key] = {value, line};
    }
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::size_t line(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }
  const std::map<std::string, Entry>& entries() const { return entries_; }

  template <typename F>
  auto typed(const std::string& key, const char* expected, F&& conv) const {
    const Entry& e = entries_.at(key);
    try {
      return conv(e.value);
    } catch (const DomainError& err) {
      throw ParseError(e.line, key, std::string("expected ") + expected + ": " + err.what());
    }
  }

  std::string str(const std::string& key, const std::string& dflt) const {
    return has(key) ? entries_.at(key).value : dflt;
  }
  double real(const std::string& key, double dflt) const {
    return has(key) ? typed(key, "a real number", parse_double) : dflt;
  }
  std::uint64_t integer(const std::string& key, std::uint64_t dflt) const {
    if (!has(key)) return dflt;
    return typed(key, "a non-negative integer", [](const std::string& s) {
      std::uint64_t v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) {
        throw DomainError("'" + s + "' is not an integer");
      }
      return v;
    });
  }
  bool boolean(const std::string& key, bool dflt) const {
    if (!has(key)) return dflt;
    return typed(key, "true or false", [](const std::string& s) {
      if (s == "true") return true;
      if (s == "false") return false;
      throw DomainError("'" + s + "' is not a boolean");
    });
  }
  VectorXd vec(const std::string& key) const { return typed(key, "a vector", parse_vector); }
  MatrixXd mat(const std::string& key) const { return typed(key, "a matrix", parse_matrix); }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ParseError(line(key), key, what);
  }

 private:
  std::map<std::string, Entry> entries_;
};

template <typename T>
T choose(const Reader& r, const std::string& key, const std::string& dflt,
         const std::vector<std::pair<std::string, T>>& options) {
  const std::string v = r.str(key, dflt);
  for (const auto& [name, value] : options) {
    if (name == v) return value;
  }
  std::string allowed;
  for (const auto& o : options) allowed += (allowed.empty() ? "" : ", ") + o.first;
  r.fail(key, "expected one of {" + allowed + "}, got '" + v + "'");
}

void resolve_problem(const Reader& r, ExperimentConfig& c) {
  c.problem_name = r.str("problem.name", "linear-2x2");
  ProblemSpec& p = c.problem;
  if (c.problem_name == "inline") {
    if (!r.has("problem.d") || !r.has("problem.d_prime")) {
      r.fail("problem.name", "inline problems need problem.d and problem.d_prime");
    }
    p = ProblemSpec{};
    p.name = "inline";
    p.d = static_cast<Eigen::Index>(r.integer("problem.d", 0));
    p.d_prime = static_cast<Eigen::Index>(r.integer("problem.d_prime", 0));
    p.theta_star = VectorXd::Zero(p.d);
    p.mu_star = VectorXd::Zero(p.d_prime);
    for (const char* k : {"problem.Q11", "problem.Q12", "problem.Q21", "problem.Q22", "noise.gamma"}) {
      if (!r.has(k)) r.fail("problem.name", std::string("inline problems need ") + k);
    }
  } else {
    try {
      p = library_problem(c.problem_name);
    } catch (const ConfigError& e) {
      r.fail("problem.name", e.what());
    }
    if (r.has("problem.d") && static_cast<Eigen::Index>(r.integer("problem.d", 0)) != p.d) {
      r.fail("problem.d", "does not match the library problem");
    }
    if (r.has("problem.d_prime") &&
        static_cast<Eigen::Index>(r.integer("problem.d_prime", 0)) != p.d_prime) {
      r.fail("problem.d_prime", "does not match the library problem");
    }
  }
  if (r.has("problem.theta_star")) p.theta_star = r.vec("problem.theta_star");
  if (r.has("problem.mu_star")) p.mu_star = r.vec("problem.mu_star");
  if (r.has("problem.Q11")) p.Q11 = r.mat("problem.Q11");
  if (r.has("problem.Q12")) p.Q12 = r.mat("problem.Q12");
  if (r.has("problem.Q21")) p.Q21 = r.mat("problem.Q21");
  if (r.has("problem.Q22")) p.Q22 = r.mat("problem.Q22");
  if (r.has("noise.gamma")) p.noise.gamma = r.mat("noise.gamma");
  p.noise.distribution =
      choose<NoiseDistribution>(r, "noise.distribution", to_string(p.noise.distribution),
                                {{"gaussian", NoiseDistribution::gaussian},
                                 {"bounded_uniform", NoiseDistribution::bounded_uniform}});
  p.noise.moment_order_m = r.real("noise.moment_order", p.noise.moment_order_m);

  p.residual.kind = choose<ResidualKind>(
      r, "residual.kind", to_string(p.residual.kind),
      {{"none", ResidualKind::none}, {"quadratic", ResidualKind::quadratic_form}});
  const Eigen::Index dim = p.d + p.d_prime;
  bool any_c = false;
  for (const auto& [key, e] : r.entries()) {
    int idx = 0;
    if (residual_component_key(key, &idx)) {
      any_c = true;
      if (idx > dim) r.fail(key, "residual component index exceeds d + d'");
    }
  }
  if (any_c) {
    p.residual.coefficients.assign(static_cast<std::size_t>(dim), MatrixXd::Zero(dim, dim));
    for (Eigen::Index i = 0; i < dim; ++i) {
      const std::string key = "residual.c" + std::to_string(i + 1);
      if (r.has(key)) p.residual.coefficients[static_cast<std::size_t>(i)] = r.mat(key);
    }
  }
  if (p.residual.kind == ResidualKind::none) p.residual.coefficients.clear();
  if (p.residual.kind == ResidualKind::quadratic_form && p.residual.coefficients.empty()) {
    r.fail("residual.kind", "quadratic residual needs residual.c1 .. residual.c" +
                                std::to_string(dim));
  }

  p.bias.kind = choose<BiasKind>(r, "bias.kind", to_string(p.bias.kind),
                                 {{"zero", BiasKind::zero}, {"power_decay", BiasKind::power_decay}});
  if (r.has("bias.theta")) p.bias.theta_coeff = r.vec("bias.theta");
  if (r.has("bias.mu")) p.bias.mu_coeff = r.vec("bias.mu");
  p.bias.rho = r.real("bias.rho", p.bias.rho);
  if (p.bias.kind == BiasKind::power_decay) {
    if (p.bias.theta_coeff.size() == 0) p.bias.theta_coeff = VectorXd::Zero(p.d);
    if (p.bias.mu_coeff.size() == 0) p.bias.mu_coeff = VectorXd::Zero(p.d_prime);
  } else {
    p.bias.theta_coeff.resize(0);
    p.bias.mu_coeff.resize(0);
  }
}

void resolve_schedule(const Reader& r, ExperimentConfig& c) {
  StepSchedule& s = c.step;
  s.a = r.real("step.a", s.a);
  s.b = r.real("step.b", s.b);
  s.beta0 = r.real("step.beta0", s.beta0);
  s.gamma0 = r.real("step.gamma0", s.gamma0);
  s.regime = choose<Regime>(r, "step.regime",
                            c.algorithm == Algorithm::averaged ? "averaging" : "theorem1",
                            {{"theorem1", Regime::theorem1}, {"averaging", Regime::averaging}});
  if (!(s.beta0 > 0) || !std::isfinite(s.beta0)) r.fail("step.beta0", "A3(i): beta0 must be positive");
  if (!(s.gamma0 > 0) || !std::isfinite(s.gamma0)) r.fail("step.gamma0", "A3(i): gamma0 must be positive");
  if (!(s.b <= 1.0)) r.fail("step.b", "A3(i): range 1/2 < a < b <= 1 requires b <= 1");
  if (!(s.a > 0.5)) r.fail("step.a", "A3(i): range 1/2 < a < b <= 1 requires a > 1/2");
  if (!(s.a < s.b)) {
    r.fail(r.line("step.b") >= r.line("step.a") ? "step.b" : "step.a",
           "A3(i): ordering 1/2 < a < b <= 1 requires a < b (a = " + format_double(s.a) +
               ", b = " + format_double(s.b) + ")");
  }
}

}  // namespace

MCConfig ExperimentConfig::mc_config() const {
  MCConfig mc;
  mc.replications = replications;
  mc.n_final = n_final;
  mc.base_seed = seed;
  mc.checkpoint_grid = checkpoints;
  mc.algorithm = algorithm;
  mc.gains = gains;
  mc.track_decomposition = decomposition;
  mc.theta_offset = theta_offset;
  mc.mu_offset = mu_offset;
  mc.tol = tol;
  mc.threads = threads;
  mc.keep_terminal_samples = dump_samples;
  return mc;
}

RunOptions ExperimentConfig::run_options() const {
  RunOptions o;
  o.algorithm = algorithm;
  o.track_decomposition = decomposition;
  o.checkpoint_grid = checkpoints;
  o.full_path = full_path;
  o.theta_offset = theta_offset;
  o.mu_offset = mu_offset;
  o.gains = gains;
  return o;
}

ExperimentConfig parse_config(const std::string& text) {
  const Reader r(text);
  ExperimentConfig c;

  resolve_problem(r, c);

  c.algorithm = choose<Algorithm>(r, "algorithm.kind", "plain",
                                  {{"plain", Algorithm::plain},
                                   {"averaged", Algorithm::averaged},
                                   {"matricial", Algorithm::matricial}});
  resolve_schedule(r, c);

  const std::string gains = r.str("algorithm.gains", "optimal");
  if (gains == "explicit") {
    if (!r.has("algorithm.A_theta") || !r.has("algorithm.A_mu")) {
      r.fail("algorithm.gains", "explicit gains need algorithm.A_theta and algorithm.A_mu");
    }
    c.gains.A_theta = r.mat("algorithm.A_theta");
    c.gains.A_mu = r.mat("algorithm.A_mu");
  } else if (gains != "optimal") {
    r.fail("algorithm.gains", "expected one of {optimal, explicit}, got '" + gains + "'");
  } else if (r.has("algorithm.A_theta") || r.has("algorithm.A_mu")) {
    r.fail(r.has("algorithm.A_theta") ? "algorithm.A_theta" : "algorithm.A_mu",
           "gain matrices need algorithm.gains = explicit");
  }

  c.theta_offset = r.has("init.theta_offset") ? r.vec("init.theta_offset")
                                              : default_offset(c.problem.d);
  c.mu_offset = r.has("init.mu_offset") ? r.vec("init.mu_offset") : default_offset(c.problem.d_prime);
  if (c.theta_offset.size() != c.problem.d) r.fail("init.theta_offset", "length must equal d");
  if (c.mu_offset.size() != c.problem.d_prime) r.fail("init.mu_offset", "length must equal d'");

  // clamp radius: explicit number, or "auto" = 10 x the initial offset norm
  if (c.problem.residual.kind == ResidualKind::none) {
    if (r.has("residual.clamp_radius")) {
      c.problem.residual.clamp_radius = r.real("residual.clamp_radius", 0.0);
    } else {
      c.problem.residual.clamp_radius = std::numeric_limits<double>::infinity();
    }
  } else {
    const std::string cr = r.str("residual.clamp_radius", "auto");
    if (cr == "auto") {
      c.problem.residual.clamp_radius =
          10.0 * std::sqrt(c.theta_offset.squaredNorm() + c.mu_offset.squaredNorm());
    } else {
      c.problem.residual.clamp_radius = r.real("residual.clamp_radius", 0.0);
    }
  }

  c.n_final = r.integer("run.n_final", c.n_final);
  if (c.n_final < 1) r.fail("run.n_final", "must be at least 1");
  c.seed = r.integer("run.seed", c.seed);
  c.stream = r.integer("run.stream", c.stream);
  c.decomposition = r.boolean("run.decomposition", c.decomposition);
  c.full_path = r.boolean("run.full_path", c.full_path);
  if (r.has("run.checkpoints") && r.str("run.checkpoints", "") != "default") {
    const VectorXd g = r.vec("run.checkpoints");
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if (!(g(i) >= 1) || g(i) != std::floor(g(i))) {
        r.fail("run.checkpoints", "indices must be positive integers");
      }
      const auto idx = static_cast<std::size_t>(g(i));
      if (!c.checkpoints.empty() && idx <= c.checkpoints.back()) {
        r.fail("run.checkpoints", "indices must be strictly increasing");
      }
      c.checkpoints.push_back(idx);
    }
  }

  c.replications = r.integer("mc.replications", c.replications);
  if (c.replications < 2) r.fail("mc.replications", "must be at least 2");
  c.threads = static_cast<unsigned>(r.integer("mc.threads", c.threads));
  c.tol.rel = r.real("mc.tol_rel", c.tol.rel);
  c.tol.cross = r.real("mc.tol_cross", c.tol.cross);
  c.tol.slope = r.real("mc.tol_slope", c.tol.slope);
  c.tol.lil_factor = r.real("mc.lil_factor", c.tol.lil_factor);
  c.tol.lil_fraction = r.real("mc.lil_fraction", c.tol.lil_fraction);
  c.tol.negligibility = r.real("mc.negligibility", c.tol.negligibility);
  c.tol.kurtosis = r.real("mc.kurtosis", c.tol.kurtosis);
  c.dump_samples = r.boolean("mc.dump_samples", c.dump_samples);

  const char* env = std::getenv(kOutputDirEnv);
  c.output_dir = r.str("output.dir", env != nullptr && *env != '\0' ? env : ".");
  c.output_prefix = r.str("output.prefix", c.output_prefix);

  try {
    c.problem.check();
  } catch (const Error& e) {
    throw ConfigError(std::string("problem '") + c.problem_name + "' is malformed: " + e.what());
  }
  return c;
}

std::string render_config(const ExperimentConfig& c) {
  const ProblemSpec& p = c.problem;
  std::ostringstream os;
  auto kv = [&](const std::string& k, const std::string& v) { os << k << " = " << v << "\n"; };
  kv("problem.name", c.problem_name);
  kv("problem.d", std::to_string(p.d));
  kv("problem.d_prime", std::to_string(p.d_prime));
  kv("problem.theta_star", format_vector(p.theta_star));
  kv("problem.mu_star", format_vector(p.mu_star));
  kv("problem.Q11", format_matrix(p.Q11));
  kv("problem.Q12", format_matrix(p.Q12));
  kv("problem.Q21", format_matrix(p.Q21));
  kv("problem.Q22", format_matrix(p.Q22));
  kv("noise.gamma", format_matrix(p.noise.gamma));
  kv("noise.distribution", to_string(p.noise.distribution));
  kv("noise.moment_order", format_double(p.noise.moment_order_m));
  kv("residual.kind", to_string(p.residual.kind));
  kv("residual.clamp_radius", format_double(p.residual.clamp_radius));
  for (std::size_t i = 0; i < p.residual.coefficients.size(); ++i) {
    kv("residual.c" + std::to_string(i + 1), format_matrix(p.residual.coefficients[i]));
  }
  kv("bias.kind", to_string(p.bias.kind));
  if (p.bias.kind == BiasKind::power_decay) {
    kv("bias.theta", format_vector(p.bias.theta_coeff));
    kv("bias.mu", format_vector(p.bias.mu_coeff));
  }
  kv("bias.rho", format_double(p.bias.rho));
  kv("step.a", format_double(c.step.a));
  kv("step.b", format_double(c.step.b));
  kv("step.beta0", format_double(c.step.beta0));
  kv("step.gamma0", format_double(c.step.gamma0));
  kv("step.regime", to_string(c.step.regime));
  kv("algorithm.kind", to_string(c.algorithm));
  if (c.gains.empty()) {
    kv("algorithm.gains", "optimal");
  } else {
    kv("algorithm.gains", "explicit");
    kv("algorithm.A_theta", format_matrix(c.gains.A_theta));
    kv("algorithm.A_mu", format_matrix(c.gains.A_mu));
  }
  kv("init.theta_offset", format_vector(c.theta_offset));
  kv("init.mu_offset", format_vector(c.mu_offset));
  kv("run.n_final", std::to_string(c.n_final));
  kv("run.seed", std::to_string(c.seed));
  kv("run.stream", std::to_string(c.stream));
  kv("run.decomposition", c.decomposition ? "true" : "false");
  kv("run.full_path", c.full_path ? "true" : "false");
  if (c.checkpoints.empty()) {
    kv("run.checkpoints", "default");
  } else {
    std::string g = "[";
    for (std::size_t i = 0; i < c.checkpoints.size(); ++i) {
      g += (i ? ", " : "") + std::to_string(c.checkpoints[i]);
    }
    kv("run.checkpoints", g + "]");
  }
  kv("mc.replications", std::to_string(c.replications));
  kv("mc.threads", std::to_string(c.threads));
  kv("mc.tol_rel", format_double(c.tol.rel));
  kv("mc.tol_cross", format_double(c.tol.cross));
  kv("mc.tol_slope", format_double(c.tol.slope));
  kv("mc.lil_factor", format_double(c.tol.lil_factor));
  kv("mc.lil_fraction", format_double(c.tol.lil_fraction));
  kv("mc.negligibility", format_double(c.tol.negligibility));
  kv("mc.kurtosis", format_double(c.tol.kurtosis));
  kv("mc.dump_samples", c.dump_samples ? "true" : "false");
  kv("output.dir", c.output_dir);
  kv("output.prefix", c.output_prefix);
  return os.str();
}

namespace {

bool same(const MatrixXd& a, const MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}

bool same(const VectorXd& a, const VectorXd& b) {
  return a.size() == b.size() && (a.size() == 0 || a == b);
}

bool same_double(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

}  // namespace

bool equivalent(const ExperimentConfig& a, const ExperimentConfig& b) {
  const ProblemSpec& p = a.problem;
  const ProblemSpec& q = b.problem;
  if (a.problem_name != b.problem_name || p.name != q.name || p.d != q.d || p.d_prime != q.d_prime)
    return false;
  if (!same(p.theta_star, q.theta_star) || !same(p.mu_star, q.mu_star)) return false;
  if (!same(p.Q11, q.Q11) || !same(p.Q12, q.Q12) || !same(p.Q21, q.Q21) || !same(p.Q22, q.Q22))
    return false;
  if (!same(p.noise.gamma, q.noise.gamma) || p.noise.distribution != q.noise.distribution ||
      !same_double(p.noise.moment_order_m, q.noise.moment_order_m))
    return false;
  if (p.residual.kind != q.residual.kind ||
      !same_double(p.residual.clamp_radius, q.residual.clamp_radius) ||
      p.residual.coefficients.size() != q.residual.coefficients.size())
    return false;
  for (std::size_t i = 0; i < p.residual.coefficients.size(); ++i) {
    if (!same(p.residual.coefficients[i], q.residual.coefficients[i])) return false;
  }
  if (p.bias.kind != q.bias.kind || !same(p.bias.theta_coeff, q.bias.theta_coeff) ||
      !same(p.bias.mu_coeff, q.bias.mu_coeff) || !same_double(p.bias.rho, q.bias.rho))
    return false;
  if (!(a.step == b.step) || a.algorithm != b.algorithm) return false;
  if (!same(a.gains.A_theta, b.gains.A_theta) || !same(a.gains.A_mu, b.gains.A_mu)) return false;
  if (!same(a.theta_offset, b.theta_offset) || !same(a.mu_offset, b.mu_offset)) return false;
  return a.n_final == b.n_final && a.seed == b.seed && a.stream == b.stream &&
         a.decomposition == b.decomposition && a.full_path == b.full_path &&
         a.checkpoints == b.checkpoints && a.replications == b.replications &&
         a.threads == b.threads && a.tol == b.tol && a.dump_samples == b.dump_samples &&
         a.output_dir == b.output_dir && a.output_prefix == b.output_prefix;
}

const std::vector<std::string>& config_keys() { return kKeys; }

}  // namespace tts
