#include "tts/report_io.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tts/errors.hpp"

#ifndef TTS_VERSION
#define TTS_VERSION "0.0.0"
#endif

namespace tts {

void ReportSection::set(const std::string& key, std::string value) {
  for (auto& [k, v] : entries) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries.emplace_back(key, std::move(value));
}

const std::string* ReportSection::get(const std::string& key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return &v;
  }
  return nullptr;
}

ReportSection& ReportDocument::section(const std::string& name) {
  for (auto& s : sections) {
    if (s.name == name) return s;
  }
  sections.push_back({name, {}});
  return sections.back();
}

const ReportSection* ReportDocument::find(const std::string& name) const {
  for (const auto& s : sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

std::string artifact_version() { return TTS_VERSION; }

std::string utc_timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string render_document(const ReportDocument& doc) {
  std::ostringstream os;
  os << "# tts-lab " << doc.kind << " report\n";
  os << "# generated: " << (doc.generated.empty() ? utc_timestamp() : doc.generated) << "\n";
  os << "# version: " << (doc.version.empty() ? artifact_version() : doc.version) << "\n";
  for (const auto& s : doc.sections) {
    os << "\n[" << s.name << "]\n";
    for (const auto& [k, v] : s.entries) os << k << " = " << v << "\n";
  }
  return os.str();
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string header_value(const std::string& line, const std::string& tag) {
  const std::string prefix = "# " + tag + ":";
  if (line.rfind(prefix, 0) != 0) return {};
  return trim(line.substr(prefix.size()));
}

// "[1, 2, nan]" -> doubles
std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::string body = trim(s);
  if (body.size() < 2 || body.front() != '[' || body.back() != ']') {
    throw DomainError("expected a list literal, got '" + s + "'");
  }
  body = body.substr(1, body.size() - 2);
  std::stringstream ss(body);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(parse_double(tok));
  }
  return out;
}

std::string format_list(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  return out + "]";
}

std::string format_index_list(const std::vector<std::size_t>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(v[i]);
  }
  return out + "]";
}

const char* yes_no(bool b) { return b ? "true" : "false"; }

void add_config(ReportDocument& doc, const ExperimentConfig& config) {
  ReportSection& s = doc.section("config");
  std::istringstream in(render_config(config));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) s.set(line.substr(0, eq), line.substr(eq + 3));
  }
}

ReportDocument make(const std::string& kind, const ExperimentConfig& config) {
  ReportDocument doc;
  doc.kind = kind;
  doc.version = artifact_version();
  doc.generated = utc_timestamp();
  add_config(doc, config);
  return doc;
}

}  // namespace

ReportDocument parse_document(const std::string& text) {
  ReportDocument doc;
  std::istringstream in(text);
  std::string line;
  ReportSection* current = nullptr;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.rfind("# tts-lab ", 0) == 0) {
      const auto rest = line.substr(10);
      const auto sp = rest.find(' ');
      doc.kind = rest.substr(0, sp);
      continue;
    }
    if (auto g = header_value(line, "generated"); !g.empty()) {
      doc.generated = g;
      continue;
    }
    if (auto v = header_value(line, "version"); !v.empty()) {
      doc.version = v;
      continue;
    }
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']' && t.find('=') == std::string::npos) {
      current = &doc.section(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find(" = ");
    if (eq == std::string::npos || current == nullptr) {
      throw ParseError(lineno, t.substr(0, t.find('=')), "malformed report line");
    }
    current->set(t.substr(0, eq), t.substr(eq + 3));
  }
  if (doc.kind.empty()) throw ParseError(1, "", "missing '# tts-lab <kind> report' header");
  return doc;
}

std::string render_human(const ReportDocument& doc) {
  std::ostringstream os;
  os << "tts-lab " << doc.kind << " report (version " << doc.version << ", generated "
     << doc.generated << ")\n";
  if (const auto* s = doc.find("summary")) {
    if (const auto* p = s->get("passed")) {
      os << "overall: " << (*p == "true" ? "PASS" : "FAIL") << "\n";
    }
  }
  for (const auto& s : doc.sections) {
    if (s.name == "config") continue;
    os << "\n" << s.name << "\n";
    std::size_t width = 0;
    for (const auto& e : s.entries) width = std::max(width, e.first.size());
    for (const auto& [k, v] : s.entries) {
      os << "  " << k << std::string(width - k.size(), ' ') << "  " << v << "\n";
    }
  }
  if (const auto* c = doc.find("config")) {
    os << "\nconfiguration (" << c->entries.size() << " keys)\n";
    for (const auto& [k, v] : c->entries) os << "  " << k << " = " << v << "\n";
  }
  return os.str();
}

ReportDocument validation_document(const ExperimentConfig& config, const ValidationReport& report) {
  ReportDocument doc = make("validation", config);
  ReportSection& sum = doc.section("summary");
  sum.set("passed", yes_no(report.passed()));
  sum.set("failures", std::to_string(report.failures().size()));
  ReportSection& items = doc.section("assumptions");
  for (std::size_t i = 0; i < report.items.size(); ++i) {
    const auto& it = report.items[i];
    std::string v = std::string(to_string(it.status)) + " | " + it.assumption + " | " + it.description;
    if (!it.detail.empty()) v += " | " + it.detail;
    items.set("item" + std::to_string(i + 1), v);
  }
  ReportSection& q = doc.section("quantities");
  for (const auto& [k, v] : report.quantities) q.set(k, format_double(v));
  return doc;
}

ReportDocument theory_document(const ExperimentConfig& config, const TheoryReport& t) {
  ReportDocument doc = make("theory", config);
  ReportSection& s = doc.section("theory");
  s.set("critical_b_equals_1", yes_no(t.critical));
  s.set("Lambda_H", format_double(t.lambda_h));
  s.set("Lambda_Q22", format_double(t.lambda_q22));
  s.set("H", format_matrix(t.H));
  s.set("G", format_matrix(t.G));
  s.set("Gamma_theta", format_matrix(t.Gamma_theta));
  s.set("Gamma_mu", format_matrix(t.Gamma_mu));
  s.set("Sigma_theta", format_matrix(t.Sigma_theta));
  s.set("Sigma_mu", format_matrix(t.Sigma_mu));
  s.set("optimal_theta_cov", format_matrix(t.optimal_theta_cov));
  s.set("optimal_mu_cov", format_matrix(t.optimal_mu_cov));
  s.set("D", format_matrix(t.D));
  s.set("P", format_matrix(t.P));
  s.set("averaged_cov", format_matrix(t.averaged_cov));
  return doc;
}

ReportDocument montecarlo_document(const ExperimentConfig& config, const MonteCarloReport& r) {
  ReportDocument doc = make("montecarlo", config);
  ReportSection& sum = doc.section("summary");
  sum.set("problem", r.problem);
  sum.set("algorithm", to_string(r.algorithm));
  sum.set("replications", std::to_string(r.replications));
  sum.set("n_final", std::to_string(r.n_final));
  sum.set("base_seed", std::to_string(r.base_seed));
  sum.set("valid", yes_no(r.valid));
  sum.set("failed_replications", std::to_string(r.failures.size()));
  sum.set("passed", yes_no(r.passed()));
  sum.set("thresholds", "finite-n thresholds are calibrations, not constants from the theory");

  ReportSection& sch = doc.section("effective_schedule");
  sch.set("a", format_double(r.schedule.a));
  sch.set("b", format_double(r.schedule.b));
  sch.set("beta0", format_double(r.schedule.beta0));
  sch.set("gamma0", format_double(r.schedule.gamma0));

  ReportSection& v = doc.section("clt");
  v.set("structure", r.structure.shape == CovarianceShape::full ? "full" : "block_diagonal");
  v.set("predicted", format_matrix(r.predicted));
  if (!r.checkpoints.empty()) {
    v.set("empirical", format_matrix(r.checkpoints.back().covariance));
    v.set("mean", format_vector(r.checkpoints.back().mean));
  }
  v.set("rel_theta", format_double(r.clt.rel_theta));
  v.set("rel_mu", format_double(r.clt.rel_mu));
  v.set("cross", format_double(r.clt.cross));
  v.set("rel_full", format_double(r.clt.rel_full));
  v.set("tol_rel", format_double(r.tol.rel));
  v.set("tol_cross", format_double(r.tol.cross));
  v.set("pass", yes_no(r.clt.pass));
  if (!r.clt.diagnostic.empty()) v.set("diagnostic", r.clt.diagnostic);

  ReportSection& rt = doc.section("rates");
  if (r.slope_theta) {
    rt.set("slope_theta", format_double(r.slope_theta->slope));
    rt.set("slope_theta_target", format_double(r.slope_theta->target));
    rt.set("slope_theta_pass", yes_no(r.slope_theta->pass));
  }
  if (r.slope_mu) {
    rt.set("slope_mu", format_double(r.slope_mu->slope));
    rt.set("slope_mu_target", format_double(r.slope_mu->target));
    rt.set("slope_mu_pass", yes_no(r.slope_mu->pass));
  }
  rt.set("tol_slope", format_double(r.tol.slope));
  if (r.lil_reference_n != 0) {
    rt.set("lil_reference_n", std::to_string(r.lil_reference_n));
    rt.set("lil_stable_theta", format_double(r.lil_stable_theta));
    rt.set("lil_stable_mu", format_double(r.lil_stable_mu));
    rt.set("lil_pass", yes_no(r.lil_pass));
  }

  if (r.negligibility) {
    ReportSection& ng = doc.section("negligibility");
    for (const auto& t : r.trends) {
      ng.set(t.name, format_double(t.early) + " -> " + format_double(t.late) +
                         (t.pass ? " pass" : " FAIL"));
    }
    ng.set("delta_theta_monotone_fraction",
           format_double(r.negligibility->delta_theta_monotone_fraction));
    ng.set("factor", format_double(r.tol.negligibility));
  }

  ReportSection& dg = doc.section("diagnostics");
  dg.set("kurtosis", format_list(r.kurtosis));
  dg.set("kurtosis_within_tolerance", yes_no(r.kurtosis_ok));
  dg.set("kurtosis_note", "soft diagnostic, not part of the verdict");

  if (!r.failures.empty()) {
    ReportSection& f = doc.section("failures");
    for (const auto& x : r.failures) {
      f.set("replication_" + std::to_string(x.replication),
            "n = " + std::to_string(x.index) + ": " + x.message);
    }
  }

  ReportSection& cv = doc.section("curves");
  std::vector<std::size_t> n;
  std::vector<double> rms_t, rms_m, lil_t, lil_m, rel_t, rel_m, cross, rel_f;
  for (const auto& c : r.checkpoints) {
    n.push_back(c.n);
    rms_t.push_back(c.rms_theta);
    rms_m.push_back(c.rms_mu);
    lil_t.push_back(c.lil_theta_max);
    lil_m.push_back(c.lil_mu_max);
    rel_t.push_back(c.verdict.rel_theta);
    rel_m.push_back(c.verdict.rel_mu);
    cross.push_back(c.verdict.cross);
    rel_f.push_back(c.verdict.rel_full);
  }
  cv.set("n", format_index_list(n));
  cv.set("rms_theta", format_list(rms_t));
  cv.set("rms_mu", format_list(rms_m));
  cv.set("lil_theta_max", format_list(lil_t));
  cv.set("lil_mu_max", format_list(lil_m));
  cv.set("rel_theta", format_list(rel_t));
  cv.set("rel_mu", format_list(rel_m));
  cv.set("cross", format_list(cross));
  cv.set("rel_full", format_list(rel_f));
  if (r.negligibility) {
    const auto& ng = *r.negligibility;
    cv.set("median_R_theta", format_list(ng.R_theta));
    cv.set("median_Delta_theta", format_list(ng.Delta_theta));
    cv.set("median_R_mu", format_list(ng.R_mu));
    cv.set("median_Delta_mu", format_list(ng.Delta_mu));
    cv.set("median_R_over_L_theta", format_list(ng.R_over_L_theta));
    cv.set("median_R_over_L_mu", format_list(ng.R_over_L_mu));
  }
  return doc;
}

namespace {

void csv_preamble(std::ostringstream& os, const ExperimentConfig& config, const char* what) {
  os << "# tts-lab " << what << "\n";
  os << "# version: " << artifact_version() << "\n";
  std::istringstream in(render_config(config));
  std::string line;
  while (std::getline(in, line)) os << "# config: " << line << "\n";
}

}  // namespace

std::string trace_csv(const ExperimentConfig& config, const TrajectoryTrace& trace) {
  std::ostringstream os;
  csv_preamble(os, config, "trace");
  const auto d = config.problem.d, dp = config.problem.d_prime;
  const bool dec = !trace.checkpoints.empty() && trace.checkpoints.front().decomposition.has_value();
  os << "n";
  for (Eigen::Index i = 1; i <= d; ++i) os << ",theta_" << i;
  for (Eigen::Index i = 1; i <= dp; ++i) os << ",mu_" << i;
  for (Eigen::Index i = 1; i <= d; ++i) os << ",theta_bar_" << i;
  for (Eigen::Index i = 1; i <= dp; ++i) os << ",mu_bar_" << i;
  os << ",u,s";
  if (dec) os << ",L_theta_norm,R_theta_norm,Delta_theta_norm,L_mu_norm,R_mu_norm,Delta_mu_norm";
  os << "\n";
  for (const auto& c : trace.checkpoints) {
    os << c.n;
    for (Eigen::Index i = 0; i < d; ++i) os << "," << format_double(c.theta(i));
    for (Eigen::Index i = 0; i < dp; ++i) os << "," << format_double(c.mu(i));
    for (Eigen::Index i = 0; i < d; ++i) os << "," << format_double(c.theta_bar(i));
    for (Eigen::Index i = 0; i < dp; ++i) os << "," << format_double(c.mu_bar(i));
    os << "," << format_double(c.u) << "," << format_double(c.s);
    if (dec) {
      const auto& x = *c.decomposition;
      for (const VectorXd* v : {&x.L_theta, &x.R_theta, &x.Delta_theta, &x.L_mu, &x.R_mu, &x.Delta_mu}) {
        os << "," << format_double(v->norm());
      }
    }
    os << "\n";
  }
  return os.str();
}

std::string samples_csv(const ExperimentConfig& config, const MonteCarloReport& report) {
  std::ostringstream os;
  csv_preamble(os, config, "terminal scaled-error samples");
  const auto d = config.problem.d, dp = config.problem.d_prime;
  os << "replication";
  for (Eigen::Index i = 1; i <= d; ++i) os << ",theta_" << i;
  for (Eigen::Index i = 1; i <= dp; ++i) os << ",mu_" << i;
  os << "\n";
  for (std::size_t r = 0; r < report.terminal_samples.size(); ++r) {
    os << r;
    const auto& s = report.terminal_samples[r];
    for (Eigen::Index i = 0; i < s.size(); ++i) os << "," << format_double(s(i));
    os << "\n";
  }
  return os.str();
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw ConfigError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw ConfigError("cannot rename into '" + path + "': " + ec.message());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> write_plots(const ReportDocument& doc, const std::string& dir,
                                     const std::string& prefix) {
  const ReportSection* cv = doc.find("curves");
  if (cv == nullptr || cv->get("n") == nullptr) {
    throw ConfigError("report has no [curves] section to plot");
  }
  const std::vector<double> n = parse_list(*cv->get("n"));
  std::vector<std::string> written;
  std::ostringstream gp;
  gp << "# gnuplot script written by tts-lab report --plots\n"
     << "set datafile separator ','\nset logscale xy\nset key outside\nset xlabel 'n'\n"
     << "set terminal pngcairo size 900,600\n";
  for (const auto& [key, value] : cv->entries) {
    if (key == "n") continue;
    const std::vector<double> y = parse_list(value);
    if (y.size() != n.size()) continue;
    std::ostringstream csv;
    csv << "n," << key << "\n";
    for (std::size_t i = 0; i < n.size(); ++i) {
      csv << format_double(n[i]) << "," << format_double(y[i]) << "\n";
    }
    const std::string file = prefix + "_" + key + ".csv";
    const std::string path = (std::filesystem::path(dir) / file).string();
    write_atomic(path, csv.str());
    written.push_back(path);
    gp << "set output '" << prefix << "_" << key << ".png'\n"
       << "plot '" << file << "' every ::1 using 1:2 with linespoints title '" << key << "'\n";
  }
  const std::string script = (std::filesystem::path(dir) / (prefix + "_plots.gp")).string();
  write_atomic(script, gp.str());
  written.push_back(script);
  return written;
}

}  // namespace tts
