#pragma once

// Line-oriented experiment configuration:
//
//   # comment
//   problem.name = linear-2x2
//   step.b = 0.8
//   noise.gamma = [[1, 0.3], [0.3, 1]]
//
// Vectors are written [x, y], matrices [[row], [row]]. Unknown keys and
// badly typed values are rejected with the offending line and key.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tts/experiments.hpp"
#include "tts/problem_model.hpp"
#include "tts/sa_engine.hpp"
#include "tts/schedules.hpp"

namespace tts {

/// Name of the environment variable that sets the default output.dir.
inline constexpr const char* kOutputDirEnv = "TTS_LAB_OUTPUT_DIR";

struct ExperimentConfig {
  std::string problem_name = "linear-2x2";
  ProblemSpec problem;  ///< resolved: library problem plus any inline overrides

  StepSchedule step;
  Algorithm algorithm = Algorithm::plain;
  GainMatrices gains;  ///< empty: optimal gains

  VectorXd theta_offset, mu_offset;

  std::size_t n_final = 100000;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  bool decomposition = false;
  bool full_path = false;
  std::vector<std::size_t> checkpoints;  ///< empty: default grid

  std::size_t replications = 2000;
  unsigned threads = 0;
  Tolerances tol;
  bool dump_samples = false;

  std::string output_dir = ".";
  std::string output_prefix = "tts";

  MCConfig mc_config() const;
  RunOptions run_options() const;
};

/// Parses and resolves a config. Throws ParseError (line, key) on syntax,
/// type, range or unknown-key problems and ConfigError when the resolved
/// problem is malformed.
ExperimentConfig parse_config(const std::string& text);

/// Fully resolved text form; parse_config(render_config(c)) reproduces c.
std::string render_config(const ExperimentConfig& config);

bool equivalent(const ExperimentConfig& a, const ExperimentConfig& b);

/// Every accepted key, in render order (residual.c<i> shown once).
const std::vector<std::string>& config_keys();

// Literal helpers shared with the report writer.
std::string format_double(double x);
std::string format_vector(const VectorXd& v);
std::string format_matrix(const MatrixXd& m);
double parse_double(const std::string& s);
VectorXd parse_vector(const std::string& s);
MatrixXd parse_matrix(const std::string& s);

}  // namespace tts
