#pragma once

// Structured report format:
//
//   # tts-lab report
//   # generated: 2026-01-01T00:00:00Z
//   # version: 0.1.0
//   [section]
//   key = value
//
// Values are scalars, vector literals [x, y] or matrix literals [[..], [..]].
// The "generated" line is the only part that varies between identical runs.

#include <string>
#include <utility>
#include <vector>

#include "tts/asymptotics.hpp"
#include "tts/config.hpp"
#include "tts/experiments.hpp"
#include "tts/sa_engine.hpp"
#include "tts/validation.hpp"

namespace tts {

struct ReportSection {
  std::string name;
  std::vector<std::pair<std::string, std::string>> entries;

  void set(const std::string& key, std::string value);
  const std::string* get(const std::string& key) const;
};

struct ReportDocument {
  std::string kind;  ///< "validation", "theory", "montecarlo", "trace"
  std::string version;
  std::string generated;
  std::vector<ReportSection> sections;

  ReportSection& section(const std::string& name);
  const ReportSection* find(const std::string& name) const;
};

std::string artifact_version();
std::string utc_timestamp();

std::string render_document(const ReportDocument& doc);
ReportDocument parse_document(const std::string& text);

/// Plain-language rendering for terminals.
std::string render_human(const ReportDocument& doc);

ReportDocument validation_document(const ExperimentConfig& config, const ValidationReport& report);
ReportDocument theory_document(const ExperimentConfig& config, const TheoryReport& theory);
ReportDocument montecarlo_document(const ExperimentConfig& config, const MonteCarloReport& report);

/// Checkpoint CSV: '#' lines with version and resolved config, then a header
/// row and one row per checkpoint (17 significant digits).
std::string trace_csv(const ExperimentConfig& config, const TrajectoryTrace& trace);

/// Terminal scaled-error samples, one row per replication.
std::string samples_csv(const ExperimentConfig& config, const MonteCarloReport& report);

/// Writes to a sibling temporary file and renames it into place.
void write_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// From a montecarlo document: one CSV per curve plus a gnuplot script.
/// Returns the written paths.
std::vector<std::string> write_plots(const ReportDocument& doc, const std::string& dir,
                                     const std::string& prefix);

}  // namespace tts
