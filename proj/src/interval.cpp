#include "ruleforge/interval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ruleforge/semantics.hpp"

namespace ruleforge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Directed rounding from error-free transforms: a bound moves one ulp only
// when the rounded result is actually on the wrong side.
double nudge(double v, double err, bool downward) {
  if (!std::isfinite(v)) return v;
  if (downward && err < 0) return std::nextafter(v, -kInf);
  if (!downward && err > 0) return std::nextafter(v, kInf);
  return v;
}

double add_dir(double a, double b, bool downward) {
  const double s = a + b;
  if (std::isnan(s)) return downward ? -kInf : kInf;
  if (!std::isfinite(s) || !std::isfinite(a) || !std::isfinite(b)) return s;
  const double bb = s - a;
  const double err = (a - (s - bb)) + (b - bb);
  return nudge(s, err, downward);
}

double mul_dir(double a, double b, bool downward) {
  if (a == 0.0 || b == 0.0) return 0.0;  // inf * 0 is taken as 0
  const double p = a * b;
  if (std::isnan(p)) return downward ? -kInf : kInf;
  if (!std::isfinite(p)) return p;
  return nudge(p, std::fma(a, b, -p), downward);
}

double div_dir(double a, double b, bool downward) {
  const double q = a / b;
  if (std::isnan(q)) return downward ? -kInf : kInf;
  if (!std::isfinite(q) || !std::isfinite(a)) return q;
  const double r = std::fma(-q, b, a);  // a - q*b exactly
  return nudge(q, b > 0 ? r : -r, downward);
}

Interval::Defined join(Interval::Defined a, Interval::Defined b) {
  if (a == Interval::Defined::No || b == Interval::Defined::No) return Interval::Defined::No;
  if (a == Interval::Defined::Maybe || b == Interval::Defined::Maybe) return Interval::Defined::Maybe;
  return Interval::Defined::Yes;
}

}  // namespace

double Interval::mid() const {
  if (std::isinf(lo) || std::isinf(hi)) return std::isinf(lo) && std::isinf(hi) ? 0.0 : (std::isinf(lo) ? hi : lo);
  return lo + (hi - lo) / 2.0;
}

Interval operator+(const Interval& a, const Interval& b) {
  return {add_dir(a.lo, b.lo, true), add_dir(a.hi, b.hi, false), join(a.defined, b.defined)};
}

Interval operator-(const Interval& a, const Interval& b) {
  return {add_dir(a.lo, -b.hi, true), add_dir(a.hi, -b.lo, false), join(a.defined, b.defined)};
}

Interval operator*(const Interval& a, const Interval& b) {
  double lo = kInf, hi = -kInf;
  for (double x : {a.lo, a.hi}) {
    for (double y : {b.lo, b.hi}) {
      lo = std::min(lo, mul_dir(x, y, true));
      hi = std::max(hi, mul_dir(x, y, false));
    }
  }
  return {lo, hi, join(a.defined, b.defined)};
}

Interval operator/(const Interval& a, const Interval& b) {
  const auto d = join(a.defined, b.defined);
  if (b.lo == 0.0 && b.hi == 0.0) return {-kInf, kInf, Interval::Defined::No};
  if (b.lo <= 0.0 && b.hi >= 0.0) {
    return {-kInf, kInf, d == Interval::Defined::No ? d : Interval::Defined::Maybe};
  }
  double lo = kInf, hi = -kInf;
  for (double x : {a.lo, a.hi}) {
    for (double y : {b.lo, b.hi}) {
      lo = std::min(lo, div_dir(x, y, true));
      hi = std::max(hi, div_dir(x, y, false));
    }
  }
  return {lo, hi, d};
}

Interval evaluate_interval(const Expr& expr, const Box& box) {
  switch (expr.kind()) {
    case Expr::Kind::Constant: return Interval::point(expr.value());
    case Expr::Kind::Variable: {
      const auto it = box.find(expr.name());
      if (it == box.end()) throw UnboundVariable(expr.name());
      return it->second;
    }
    case Expr::Kind::Binary: {
      const Interval l = evaluate_interval(expr.lhs(), box);
      const Interval r = evaluate_interval(expr.rhs(), box);
      switch (expr.op()) {
        case ArithOp::Add: return l + r;
        case ArithOp::Sub: return l - r;
        case ArithOp::Mul: return l * r;
        case ArithOp::Div: return l / r;
      }
    }
  }
  return {-kInf, kInf, Interval::Defined::Maybe};
}

Truth evaluate_interval(const Relation& rel, const Box& box, double eps_eq) {
  const Interval d = evaluate_interval(rel.lhs, box) - evaluate_interval(rel.rhs, box);
  if (d.defined == Interval::Defined::No) return Truth::False;
  auto decide = [&](bool always, bool never) {
    if (never) return Truth::False;
    if (always && d.defined == Interval::Defined::Yes) return Truth::True;
    return Truth::Unknown;
  };
  switch (rel.op) {
    case RelOp::Lt: return decide(d.hi < 0, d.lo >= 0);
    case RelOp::Le: return decide(d.hi <= 0, d.lo > 0);
    case RelOp::Gt: return decide(d.lo > 0, d.hi <= 0);
    case RelOp::Ge: return decide(d.lo >= 0, d.hi < 0);
    case RelOp::Eq: return decide(d.lo >= -eps_eq && d.hi <= eps_eq, d.lo > eps_eq || d.hi < -eps_eq);
    case RelOp::Ne: return decide(d.lo > eps_eq || d.hi < -eps_eq, d.lo >= -eps_eq && d.hi <= eps_eq);
  }
  return Truth::Unknown;
}

}  // namespace ruleforge
