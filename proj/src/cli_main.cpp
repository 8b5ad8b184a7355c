#include "tts/cli.hpp"

#include <filesystem>
#include <sstream>

#include "CLI11.hpp"
#include "tts/asymptotics.hpp"
#include "tts/config.hpp"
#include "tts/errors.hpp"
#include "tts/experiments.hpp"
#include "tts/report_io.hpp"
#include "tts/sa_engine.hpp"

namespace tts {

namespace {

struct Inputs {
  std::string config_file;
  std::vector<std::string> sets;
  std::string output;
};

void add_inputs(CLI::App* sub, Inputs& in, bool with_output) {
  sub->add_option("-c,--config", in.config_file, "config file (section.key = value lines)");
  sub->add_option("-s,--set", in.sets, "override one key, e.g. --set step.b=0.9")
      ->allow_extra_args(false);
  if (with_output) sub->add_option("-o,--output", in.output, "output file path");
}

ExperimentConfig load(const Inputs& in) {
  std::string text;
  if (!in.config_file.empty()) text = read_file(in.config_file);
  for (const auto& s : in.sets) {
    if (s.find('=') == std::string::npos) {
      throw ConfigError("--set expects key=value, got '" + s + "'");
    }
    text += "\n" + s;
  }
  return parse_config(text);
}

std::string output_path(const ExperimentConfig& c, const Inputs& in, const std::string& suffix) {
  if (!in.output.empty()) return in.output;
  return (std::filesystem::path(c.output_dir) / (c.output_prefix + suffix)).string();
}

ValidationReport full_validation(const ExperimentConfig& c) {
  ValidationReport r = validate_spec(c.problem, c.step);
  if (c.algorithm == Algorithm::matricial) {
    try {
      r.merge(validate_gains(c.problem, c.gains.empty() ? optimal_gains(c.problem) : c.gains));
    } catch (const SingularityError& e) {
      r.add("gains", "optimal gains -H^-1, -G^-1 exist", false, e.what());
    }
  }
  return r;
}

void warn_failures(const ValidationReport& r, std::ostream& err) {
  for (const auto* f : r.failures()) {
    err << "warning: " << f->assumption << " fails: " << f->description;
    if (!f->detail.empty()) err << " (" << f->detail << ")";
    err << "\n";
  }
}

int cmd_validate(const Inputs& in, std::ostream& out, std::ostream& err) {
  const ExperimentConfig c = load(in);
  const ValidationReport r = full_validation(c);
  out << render_human(validation_document(c, r));
  for (const auto* f : r.failures()) {
    err << "assumption " << f->assumption << " violated: " << f->description;
    if (!f->detail.empty()) err << " (" << f->detail << ")";
    err << "\n";
  }
  return r.passed() ? exit_ok : exit_fail;
}

int cmd_theory(const Inputs& in, std::ostream& out, std::ostream&) {
  const ExperimentConfig c = load(in);
  const ReportDocument doc = theory_document(c, theory_report(c.problem, c.step));
  if (!in.output.empty()) write_atomic(in.output, render_document(doc));
  out << render_human(doc);
  return exit_ok;
}

int cmd_run(const Inputs& in, bool decompose, std::ostream& out, std::ostream& err) {
  ExperimentConfig c = load(in);
  if (decompose) c.decomposition = true;
  warn_failures(full_validation(c), err);
  const std::string path = output_path(c, in, decompose ? "_decompose.csv" : "_trace.csv");
  try {
    const TrajectoryTrace trace =
        run(c.problem, c.step, c.n_final, c.seed, c.stream, c.run_options());
    write_atomic(path, trace_csv(c, trace));
    const Checkpoint& last = trace.checkpoints.back();
    out << "wrote " << trace.checkpoints.size() << " checkpoints to " << path << "\n";
    out << "n = " << last.n << ", ||theta - theta*|| = "
        << format_double((last.theta - c.problem.theta_star).norm())
        << ", ||mu - mu*|| = " << format_double((last.mu - c.problem.mu_star).norm()) << "\n";
    if (last.decomposition) {
      const auto& d = *last.decomposition;
      out << "||L_theta|| = " << format_double(d.L_theta.norm())
          << ", ||R_theta|| = " << format_double(d.R_theta.norm())
          << ", ||Delta_theta|| = " << format_double(d.Delta_theta.norm()) << "\n"
          << "||L_mu|| = " << format_double(d.L_mu.norm())
          << ", ||R_mu|| = " << format_double(d.R_mu.norm())
          << ", ||Delta_mu|| = " << format_double(d.Delta_mu.norm()) << "\n";
    }
  } catch (const TraceDivergenceError& e) {
    write_atomic(path, trace_csv(c, e.prefix()));
    err << "error: " << e.what() << " (trace prefix written to " << path << ")\n";
    return exit_fail;
  }
  return exit_ok;
}

int cmd_montecarlo(const Inputs& in, std::ostream& out, std::ostream& err) {
  const ExperimentConfig c = load(in);
  warn_failures(full_validation(c), err);
  const MonteCarloReport rep = run_monte_carlo(c.problem, c.step, c.mc_config());
  const ReportDocument doc = montecarlo_document(c, rep);
  const std::string path = output_path(c, in, "_montecarlo.report");
  write_atomic(path, render_document(doc));
  if (c.dump_samples) {
    const std::string spath =
        (std::filesystem::path(c.output_dir) / (c.output_prefix + "_samples.csv")).string();
    write_atomic(spath, samples_csv(c, rep));
  }
  out << render_human(parse_document(render_document(doc)));
  out << "report written to " << path << "\n";
  for (const auto& f : rep.failures) {
    err << "replication " << f.replication << " failed at n = " << f.index << ": " << f.message
        << "\n";
  }
  if (!rep.passed()) err << "verdict: FAIL\n";
  return rep.passed() ? exit_ok : exit_fail;
}

int cmd_report(const std::string& file, bool plots, const std::string& plot_dir,
               std::ostream& out) {
  const ReportDocument doc = parse_document(read_file(file));
  out << render_human(doc);
  if (plots) {
    std::string dir = plot_dir;
    if (dir.empty()) {
      const auto parent = std::filesystem::path(file).parent_path();
      dir = parent.empty() ? std::string(".") : parent.string();
    }
    const std::string prefix = std::filesystem::path(file).stem().string();
    for (const auto& p : write_plots(doc, dir, prefix)) out << "wrote " << p << "\n";
  }
  return exit_ok;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"tts-lab: two-time-scale stochastic approximation laboratory", "tts-lab"};
  app.set_version_flag("--version", artifact_version());
  app.require_subcommand(1);

  Inputs in;
  CLI::App* validate = app.add_subcommand("validate", "check the assumptions for a config");
  CLI::App* theory = app.add_subcommand("theory", "print predicted covariances");
  CLI::App* runc = app.add_subcommand("run", "simulate one trajectory, write a trace CSV");
  CLI::App* mc = app.add_subcommand("montecarlo", "replicate and compare with theory");
  CLI::App* dec = app.add_subcommand("decompose", "one trajectory with L/R/Delta tracking");
  CLI::App* rep = app.add_subcommand("report", "render a stored report");
  add_inputs(validate, in, false);
  add_inputs(theory, in, true);
  add_inputs(runc, in, true);
  add_inputs(mc, in, true);
  add_inputs(dec, in, true);
  std::string report_file, plot_dir;
  bool plots = false;
  rep->add_option("file", report_file, "structured report file")->required();
  rep->add_flag("--plots", plots, "write per-curve CSVs and a gnuplot script");
  rep->add_option("--plot-dir", plot_dir, "directory for --plots output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (validate->parsed()) return cmd_validate(in, out, err);
    if (theory->parsed()) return cmd_theory(in, out, err);
    if (runc->parsed()) return cmd_run(in, false, out, err);
    if (dec->parsed()) return cmd_run(in, true, out, err);
    if (mc->parsed()) return cmd_montecarlo(in, out, err);
    if (rep->parsed()) return cmd_report(report_file, plots, plot_dir, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_usage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_fail;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  }
  return exit_usage;
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("tts-lab");
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace tts
