#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace persym {

using ExactInt = boost::multiprecision::cpp_int;
using ExactRational = boost::multiprecision::cpp_rational;

inline ExactInt pow2(unsigned exponent) { return ExactInt(1) << exponent; }

/// Floor of a / b for b > 0; the E(x) used in the exponent bounds.
constexpr int floor_div(int a, int b) {
  int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline ExactRational make_rational(const ExactInt& num, const ExactInt& den = 1) {
  if (den == 0) throw std::invalid_argument("zero denominator");
  return ExactRational(num, den);
}

inline bool is_integer(const ExactRational& q) {
  return boost::multiprecision::denominator(q) == 1;
}

/// Returns the numerator of q; throws if q is not an integer.
inline ExactInt to_integer(const ExactRational& q) {
  if (!is_integer(q)) throw std::domain_error("value " + q.str() + " is not an integer");
  return boost::multiprecision::numerator(q);
}

inline std::string to_string(const ExactInt& v) { return v.str(); }

/// Always "num/den", also for integers, so external tools parse a single shape.
inline std::string to_fraction_string(const ExactRational& q) {
  return boost::multiprecision::numerator(q).str() + "/" +
         boost::multiprecision::denominator(q).str();
}

/// Short form used in human-readable output: "7" or "35/2".
inline std::string to_display_string(const ExactRational& q) {
  if (is_integer(q)) return boost::multiprecision::numerator(q).str();
  return to_fraction_string(q);
}

inline ExactInt parse_exact_int(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty integer literal");
  std::size_t pos = (text[0] == '-' || text[0] == '+') ? 1 : 0;
  if (pos == text.size()) throw std::invalid_argument("malformed integer literal");
  for (std::size_t j = pos; j < text.size(); ++j) {
    if (text[j] < '0' || text[j] > '9')
      throw std::invalid_argument("malformed integer literal '" + std::string(text) + "'");
  }
  return ExactInt(std::string(text));
}

inline ExactRational parse_exact_rational(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return ExactRational(parse_exact_int(text));
  return make_rational(parse_exact_int(text.substr(0, slash)),
                       parse_exact_int(text.substr(slash + 1)));
}

}  // namespace persym
