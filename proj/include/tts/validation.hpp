#pragma once

#include <string>
#include <utility>
#include <vector>

namespace tts {

enum class CheckStatus { pass, fail, asserted };

const char* to_string(CheckStatus s);

/// One checkable assumption, e.g. "A3(ii)".
struct ValidationItem {
  std::string assumption;
  std::string description;
  CheckStatus status = CheckStatus::pass;
  std::string detail;
};

/// Outcome of checking a problem/schedule pair. Failures are entries, never
/// exceptions.
struct ValidationReport {
  std::vector<ValidationItem> items;
  std::vector<std::pair<std::string, double>> quantities;

  bool passed() const;
  void add(std::string assumption, std::string description, bool ok, std::string detail = {});
  void assert_by_construction(std::string assumption, std::string description,
                              std::string detail = {});
  void record(std::string name, double value) { quantities.emplace_back(std::move(name), value); }
  void merge(const ValidationReport& other);
  const ValidationItem* find(const std::string& assumption) const;
  std::vector<const ValidationItem*> failures() const;
};

}  // namespace tts
