// Exponent p in [1, inf] with a distinguished infinity and conjugate duality.
#pragma once

#include <string>
#include <string_view>

namespace ncm {

class ExponentP {
 public:
  // Finite exponent; throws for p < 1, NaN, or infinite double (use infinity()).
  explicit ExponentP(double p);
  static ExponentP infinity();

  bool is_infinity() const { return infinite_; }
  // Finite value; throws if infinite.
  double value() const;
  // Value with infinity mapped to +inf (for monotone comparisons only).
  double value_or_inf() const;

  // Conjugate exponent: 1 <-> inf, otherwise p/(p-1).
  ExponentP conjugate() const;

  // Accepts "inf" (case-insensitive) or a decimal literal >= 1.
  static ExponentP parse(std::string_view s);
  // "inf" or shortest round-trip decimal (17 significant digits).
  std::string str() const;

  bool operator==(const ExponentP& o) const;
  bool operator!=(const ExponentP& o) const { return !(*this == o); }

 private:
  ExponentP() : p_(0.0), infinite_(true) {}
  double p_;
  bool infinite_;
};

}  // namespace ncm
