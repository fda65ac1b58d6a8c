#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace periph {

// One verdict inside a verification report. `pass` is empty for checks that
// were skipped; `reason` then says why.
struct Check {
  std::string name;
  std::string anchor;
  double value = 0.0;
  double threshold = 0.0;
  std::string comparison = "<=";
  std::optional<bool> pass;
  std::string reason;

  static Check at_most(std::string name, std::string anchor, double value, double threshold) {
    return {std::move(name), std::move(anchor), value, threshold, "<=", value <= threshold, {}};
  }
  static Check at_least(std::string name, std::string anchor, double value, double threshold) {
    return {std::move(name), std::move(anchor), value, threshold, ">=", value >= threshold, {}};
  }
  static Check holds(std::string name, std::string anchor, bool ok, std::string reason = {}) {
    return {std::move(name), std::move(anchor), ok ? 1.0 : 0.0, 1.0, "==", ok, std::move(reason)};
  }
  static Check skipped(std::string name, std::string anchor, std::string reason) {
    return {std::move(name), std::move(anchor), 0.0, 0.0, "n/a", std::nullopt, std::move(reason)};
  }
};

struct VerificationReport {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<Check> checks;

  void add(Check c) { checks.push_back(std::move(c)); }

  void append(const VerificationReport& other) {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
  }

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const Check& c) { return !c.pass.has_value() || *c.pass; });
  }

  const Check* find(const std::string& check_name) const {
    for (const auto& c : checks)
      if (c.name == check_name) return &c;
    return nullptr;
  }
};

// Running maximum used to fold per-trial residuals into one check.
struct MaxTracker {
  double value = 0.0;
  void operator()(double v) { value = std::max(value, v); }
};

}  // namespace periph
