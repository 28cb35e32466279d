#include "ruleforge/odd.hpp"

#include <charconv>
#include <cmath>
#include <set>

#include "ruleforge/ast.hpp"

namespace ruleforge {

OddSpec::OddSpec(std::vector<OddVariable> variables) : variables_(std::move(variables)) {
  std::set<std::string, std::less<>> seen;
  for (const auto& v : variables_) {
    if (!is_identifier(v.name)) throw RuleError("ODD variable name '" + v.name + "' is not an identifier");
    if (!seen.insert(v.name).second) throw RuleError("duplicate ODD variable '" + v.name + "'");
    if (!std::isfinite(v.min) || !std::isfinite(v.max) || v.min > v.max)
      throw RuleError("ODD variable '" + v.name + "' needs finite min <= max");
    if (!std::isfinite(v.step) || v.step <= 0.0)
      throw RuleError("ODD variable '" + v.name + "' needs a positive step");
  }
}

const OddVariable* OddSpec::find(std::string_view name) const {
  for (const auto& v : variables_)
    if (v.name == name) return &v;
  return nullptr;
}

std::optional<std::size_t> OddSpec::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i)
    if (variables_[i].name == name) return i;
  return std::nullopt;
}

std::int64_t grid_count(const OddVariable& var) {
  const double span = (var.max - var.min) / var.step;
  return static_cast<std::int64_t>(std::floor(span + 1e-9)) + 1;
}

double grid_value(const OddVariable& var, std::int64_t index) {
  const int places = decimal_places(var.step);
  const double raw = var.min + static_cast<double>(index) * var.step;
  return round_to_places(raw, std::max(places, decimal_places(var.min)));
}

int decimal_places(double step) {
  const std::string text = format_number(std::fabs(step));
  const auto dot = text.find('.');
  return dot == std::string::npos ? 0 : static_cast<int>(text.size() - dot - 1);
}

double round_to_places(double value, int places) {
  if (places > 15) return value;
  const double scale = std::pow(10.0, places);
  const double rounded = std::round(value * scale) / scale;
  return rounded == 0.0 ? 0.0 : rounded;
}

std::string format_number(double value) {
  if (value == 0.0) return "0";
  char buf[512];
  auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed);
  if (res.ec != std::errc{}) {
    res = std::to_chars(buf, buf + sizeof(buf), value);
  }
  return std::string(buf, res.ptr);
}

}  // namespace ruleforge
