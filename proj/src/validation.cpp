#include "tts/validation.hpp"

#include <algorithm>

namespace tts {

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "FAIL";
    case CheckStatus::asserted: return "asserted";
  }
  return "?";
}

bool ValidationReport::passed() const {
  return std::none_of(items.begin(), items.end(),
                      [](const ValidationItem& i) { return i.status == CheckStatus::fail; });
}

void ValidationReport::add(std::string assumption, std::string description, bool ok,
                           std::string detail) {
  items.push_back({std::move(assumption), std::move(description),
                   ok ? CheckStatus::pass : CheckStatus::fail, std::move(detail)});
}

void ValidationReport::assert_by_construction(std::string assumption, std::string description,
                                              std::string detail) {
  items.push_back({std::move(assumption), std::move(description), CheckStatus::asserted,
                   std::move(detail)});
}

void ValidationReport::merge(const ValidationReport& other) {
  items.insert(items.end(), other.items.begin(), other.items.end());
  quantities.insert(quantities.end(), other.quantities.begin(), other.quantities.end());
}

const ValidationItem* ValidationReport::find(const std::string& assumption) const {
  for (const auto& i : items)
    if (i.assumption == assumption) return &i;
  return nullptr;
}

std::vector<const ValidationItem*> ValidationReport::failures() const {
  std::vector<const ValidationItem*> out;
  for (const auto& i : items)
    if (i.status == CheckStatus::fail) out.push_back(&i);
  return out;
}

}  // namespace tts
