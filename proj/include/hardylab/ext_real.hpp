#pragma once

#include <cassert>
#include <stdexcept>

namespace hardylab {

// Extended real in [−inf, +inf] with an explicit infinity flag, so horizon
// arithmetic (min, comparisons) stays total without sentinel floats.
// Only +inf is ever produced by the comparison kernel; the representation
// still keeps the flag separate from the payload.
class ExtReal {
 public:
  constexpr ExtReal() : v_(0.0), inf_(false) {}
  constexpr ExtReal(double v) : v_(v), inf_(false) {}  // NOLINT: implicit by design

  static constexpr ExtReal infinity() { return ExtReal(0.0, true); }

  constexpr bool finite() const { return !inf_; }
  constexpr bool is_infinite() const { return inf_; }

  double value() const {
    if (inf_) throw std::domain_error("ExtReal: value() on infinity");
    return v_;
  }
  // Finite value, or `cap` when infinite.
  constexpr double value_or(double cap) const { return inf_ ? cap : v_; }

  friend constexpr bool operator==(ExtReal a, ExtReal b) {
    return a.inf_ == b.inf_ && (a.inf_ || a.v_ == b.v_);
  }
  friend constexpr bool operator<(ExtReal a, ExtReal b) {
    if (a.inf_) return false;
    if (b.inf_) return true;
    return a.v_ < b.v_;
  }
  friend constexpr bool operator<=(ExtReal a, ExtReal b) { return a < b || a == b; }
  friend constexpr bool operator>(ExtReal a, ExtReal b) { return b < a; }
  friend constexpr bool operator>=(ExtReal a, ExtReal b) { return b <= a; }

  friend constexpr ExtReal min(ExtReal a, ExtReal b) { return a < b ? a : b; }

  friend constexpr ExtReal operator*(double c, ExtReal x) {
    assert(c > 0.0);
    return x.inf_ ? x : ExtReal(c * x.v_);
  }

 private:
  constexpr ExtReal(double v, bool inf) : v_(v), inf_(inf) {}
  double v_;
  bool inf_;
};

// Error taxonomy shared across modules; the CLI maps these onto exit codes.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hardylab
