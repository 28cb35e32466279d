#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ruleforge {

struct OddVariable {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  double step = 1.0;

  friend bool operator==(const OddVariable&, const OddVariable&) = default;
};

// Operational design domain: the fixed input box and its per-feature grid.
class OddSpec {
 public:
  OddSpec() = default;
  // Throws RuleError on duplicate names, min > max, or non-positive step.
  explicit OddSpec(std::vector<OddVariable> variables);

  const std::vector<OddVariable>& variables() const { return variables_; }
  std::size_t size() const { return variables_.size(); }
  const OddVariable* find(std::string_view name) const;
  std::optional<std::size_t> index_of(std::string_view name) const;

  friend bool operator==(const OddSpec&, const OddSpec&) = default;

 private:
  std::vector<OddVariable> variables_;
};

// Number of grid points min, min+step, ... that lie within [min, max].
std::int64_t grid_count(const OddVariable& var);
double grid_value(const OddVariable& var, std::int64_t index);

// Decimal digits needed to write `step` exactly (0.2 -> 1, 0.05 -> 2).
int decimal_places(double step);
double round_to_places(double value, int places);

// Shortest fixed-notation decimal that round-trips; never uses an exponent.
std::string format_number(double value);

}  // namespace ruleforge
