#pragma once

#include "persym/exact.hpp"

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace persym {

/// Dense univariate polynomial with exact coefficients, stored lowest degree
/// first and always trimmed so that equality is structural.
///
/// Coeff is ExactRational for polynomials in a single indeterminate, or
/// Polynomial<ExactRational> for the bivariate expressions that mix 2^n and
/// 2^k (outer variable 2^n, inner variable 2^k).
template <typename Coeff>
class Polynomial {
 public:
  using coefficient_type = Coeff;

  Polynomial() = default;
  explicit Polynomial(std::vector<Coeff> coeffs) : coeffs_(std::move(coeffs)) { trim(); }
  Polynomial(std::initializer_list<Coeff> coeffs) : coeffs_(coeffs) { trim(); }

  static Polynomial constant(Coeff c) { return Polynomial(std::vector<Coeff>{std::move(c)}); }

  static Polynomial monomial(Coeff c, std::size_t degree) {
    std::vector<Coeff> v(degree + 1);
    v[degree] = std::move(c);
    return Polynomial(std::move(v));
  }

  /// The polynomial x - root.
  static Polynomial linear_root(Coeff root) {
    return Polynomial(std::vector<Coeff>{-std::move(root), Coeff(1)});
  }

  bool is_zero() const { return coeffs_.empty(); }

  /// Degree of the zero polynomial is reported as -1.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }

  Coeff coefficient(std::size_t j) const { return j < coeffs_.size() ? coeffs_[j] : Coeff{}; }

  const std::vector<Coeff>& coefficients() const { return coeffs_; }

  /// Horner evaluation; for a bivariate polynomial, x fixes the outer variable.
  template <typename Value>
  Coeff evaluate(const Value& x) const {
    Coeff acc{};
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = Coeff(acc * x) + *it;
    return acc;
  }

  /// Applies f to every coefficient, e.g. to fix the inner variable of a
  /// bivariate polynomial.
  template <typename F>
  auto map_coefficients(F&& f) const -> Polynomial<decltype(f(std::declval<const Coeff&>()))> {
    using Out = decltype(f(std::declval<const Coeff&>()));
    std::vector<Out> out;
    out.reserve(coeffs_.size());
    for (const auto& c : coeffs_) out.push_back(f(c));
    return Polynomial<Out>(std::move(out));
  }

  /// Division by (x - root): returns (quotient, remainder).
  std::pair<Polynomial, Coeff> divide_by_root(const Coeff& root) const {
    if (coeffs_.empty()) return {Polynomial{}, Coeff{}};
    std::vector<Coeff> q(coeffs_.size() - 1);
    Coeff carry{};
    for (std::size_t j = coeffs_.size(); j-- > 0;) {
      carry = carry * root + coeffs_[j];
      if (j > 0) q[j - 1] = carry;
    }
    return {Polynomial(std::move(q)), carry};
  }

  Polynomial operator-() const {
    auto out = coeffs_;
    for (auto& c : out) c = -c;
    return Polynomial(std::move(out));
  }

  Polynomial& operator+=(const Polynomial& rhs) {
    if (rhs.coeffs_.size() > coeffs_.size()) coeffs_.resize(rhs.coeffs_.size());
    for (std::size_t j = 0; j < rhs.coeffs_.size(); ++j) coeffs_[j] += rhs.coeffs_[j];
    trim();
    return *this;
  }

  Polynomial& operator-=(const Polynomial& rhs) { return *this += -rhs; }

  friend Polynomial operator+(Polynomial lhs, const Polynomial& rhs) { return lhs += rhs; }
  friend Polynomial operator-(Polynomial lhs, const Polynomial& rhs) { return lhs -= rhs; }

  friend Polynomial operator*(const Polynomial& lhs, const Polynomial& rhs) {
    if (lhs.is_zero() || rhs.is_zero()) return {};
    std::vector<Coeff> out(lhs.coeffs_.size() + rhs.coeffs_.size() - 1);
    for (std::size_t a = 0; a < lhs.coeffs_.size(); ++a)
      for (std::size_t b = 0; b < rhs.coeffs_.size(); ++b) out[a + b] += lhs.coeffs_[a] * rhs.coeffs_[b];
    return Polynomial(std::move(out));
  }

  friend Polynomial operator*(const Polynomial& p, const ExactRational& s) {
    auto out = p.coeffs_;
    for (auto& c : out) c = c * s;
    return Polynomial(std::move(out));
  }
  friend Polynomial operator*(const ExactRational& s, const Polynomial& p) { return p * s; }

  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.coeffs_ == b.coeffs_; }

 private:
  void trim() {
    while (!coeffs_.empty() && coeffs_.back() == Coeff{}) coeffs_.pop_back();
  }

  std::vector<Coeff> coeffs_;
};

using RationalPoly = Polynomial<ExactRational>;
/// Outer variable 2^n, coefficients are polynomials in 2^k.
using BiPoly = Polynomial<RationalPoly>;

inline std::string format_poly(const RationalPoly& p, const std::string& var = "X") {
  if (p.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (int j = p.degree(); j >= 0; --j) {
    ExactRational c = p.coefficient(static_cast<std::size_t>(j));
    if (c == 0) continue;
    if (!first) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << "-";
    first = false;
    ExactRational mag = c < 0 ? ExactRational(-c) : c;
    bool unit = (mag == 1);
    if (!unit || j == 0) os << to_display_string(mag);
    if (j >= 1) os << (unit ? "" : "*") << var;
    if (j >= 2) os << "^" << j;
  }
  return os.str();
}

inline std::string format_bipoly(const BiPoly& p, const std::string& outer = "Y",
                                 const std::string& inner = "X") {
  if (p.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (int j = p.degree(); j >= 0; --j) {
    const auto c = p.coefficient(static_cast<std::size_t>(j));
    if (c.is_zero()) continue;
    if (!first) os << " + ";
    first = false;
    os << "(" << format_poly(c, inner) << ")";
    if (j >= 1) os << "*" << outer;
    if (j >= 2) os << "^" << j;
  }
  return os.str();
}

/// Coefficients as a degree -> "num/den" map, the shape used by every JSON
/// export.
inline std::map<std::string, std::string> poly_to_fraction_map(const RationalPoly& p) {
  std::map<std::string, std::string> out;
  for (std::size_t j = 0; j < p.coefficients().size(); ++j) {
    if (p.coefficient(j) != 0) out.emplace(std::to_string(j), to_fraction_string(p.coefficient(j)));
  }
  return out;
}

/// Lifts a polynomial in 2^k to a bivariate polynomial that is constant in 2^n.
inline BiPoly lift_inner(const RationalPoly& p) { return BiPoly::constant(p); }

/// Lifts a polynomial in 2^n (rational coefficients) into the bivariate ring.
inline BiPoly lift_outer(const RationalPoly& p) {
  return p.map_coefficients([](const ExactRational& c) { return RationalPoly::constant(c); });
}

}  // namespace persym
