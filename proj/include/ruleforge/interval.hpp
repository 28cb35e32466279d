#pragma once

#include <map>
#include <string>

#include "ruleforge/ast.hpp"

namespace ruleforge {

// Closed interval with outward-rounded arithmetic. `defined` tracks division
// by zero: No means undefined everywhere in the box, Maybe means somewhere.
struct Interval {
  enum class Defined { Yes, Maybe, No };
  double lo = 0.0;
  double hi = 0.0;
  Defined defined = Defined::Yes;

  static Interval point(double v) { return {v, v, Defined::Yes}; }
  bool empty() const { return lo > hi; }
  double width() const { return hi - lo; }
  double mid() const;
};

Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator*(const Interval& a, const Interval& b);
Interval operator/(const Interval& a, const Interval& b);

using Box = std::map<std::string, Interval, std::less<>>;

enum class Truth { True, False, Unknown };

// Throws UnboundVariable for variables missing from the box.
Interval evaluate_interval(const Expr& expr, const Box& box);
// True: holds at every point of the box; False: at none.
Truth evaluate_interval(const Relation& rel, const Box& box, double eps_eq);

}  // namespace ruleforge
