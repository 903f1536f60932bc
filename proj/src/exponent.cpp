#include "ncmlab/exponent.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace ncm {

ExponentP::ExponentP(double p) : p_(p), infinite_(false) {
  if (!std::isfinite(p) || p < 1.0)
    throw std::invalid_argument("exponent must be a finite value >= 1 (or ExponentP::infinity())");
}

ExponentP ExponentP::infinity() { return ExponentP(); }

double ExponentP::value() const {
  if (infinite_) throw std::logic_error("value() called on infinite exponent");
  return p_;
}

double ExponentP::value_or_inf() const {
  return infinite_ ? std::numeric_limits<double>::infinity() : p_;
}

ExponentP ExponentP::conjugate() const {
  if (infinite_) return ExponentP(1.0);
  if (p_ == 1.0) return infinity();
  return ExponentP(p_ / (p_ - 1.0));
}

ExponentP ExponentP::parse(std::string_view s) {
  std::string t(s);
  for (char& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (t == "inf" || t == "infinity") return infinity();
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end == t.c_str() || *end != '\0')
    throw std::invalid_argument("cannot parse exponent: " + std::string(s));
  return ExponentP(v);
}

std::string ExponentP::str() const {
  if (infinite_) return "inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", p_);
  return buf;
}

bool ExponentP::operator==(const ExponentP& o) const {
  if (infinite_ || o.infinite_) return infinite_ == o.infinite_;
  return p_ == o.p_;
}

}  // namespace ncm
