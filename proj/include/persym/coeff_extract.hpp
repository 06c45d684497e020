#pragma once

// Recovers the coefficients of the conjectured expansions from census data by
// exact linear solves, and converts between the factored and power-basis
// forms of Gamma_i as a polynomial in Y = 2^n.

#include "persym/closed_forms.hpp"
#include "persym/exact.hpp"
#include "persym/polynomial.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace persym {

// ---- exact linear algebra --------------------------------------------------

/// Solves the square system A x = b exactly. Rows are scaled to integers and
/// reduced with Bareiss fraction-free elimination; nullopt if A is singular.
inline std::optional<std::vector<ExactRational>> solve_exact(const std::vector<std::vector<ExactRational>>& a,
                                                             const std::vector<ExactRational>& b) {
  using boost::multiprecision::denominator;
  using boost::multiprecision::lcm;
  using boost::multiprecision::numerator;
  const std::size_t n = a.size();
  if (b.size() != n) throw std::invalid_argument("solve_exact: right-hand side has the wrong length");
  for (const auto& row : a)
    if (row.size() != n) throw std::invalid_argument("solve_exact: matrix is not square");
  if (n == 0) return std::vector<ExactRational>{};

  // Augmented integer matrix [A | b].
  std::vector<std::vector<ExactInt>> m(n, std::vector<ExactInt>(n + 1));
  for (std::size_t r = 0; r < n; ++r) {
    ExactInt scale = denominator(b[r]);
    for (const auto& v : a[r]) scale = lcm(scale, denominator(v));
    for (std::size_t c = 0; c < n; ++c) m[r][c] = numerator(ExactRational(a[r][c] * scale));
    m[r][n] = numerator(ExactRational(b[r] * scale));
  }

  ExactInt prev = 1;
  for (std::size_t p = 0; p < n; ++p) {
    std::size_t pivot = p;
    while (pivot < n && m[pivot][p] == 0) ++pivot;
    if (pivot == n) return std::nullopt;
    std::swap(m[pivot], m[p]);
    for (std::size_t r = p + 1; r < n; ++r) {
      for (std::size_t c = p + 1; c <= n; ++c) m[r][c] = (m[r][c] * m[p][p] - m[r][p] * m[p][c]) / prev;
      m[r][p] = 0;
    }
    prev = m[p][p];
  }

  std::vector<ExactRational> x(n);
  for (std::size_t r = n; r-- > 0;) {
    ExactRational acc = ExactRational(m[r][n]);
    for (std::size_t c = r + 1; c < n; ++c) acc -= ExactRational(m[r][c]) * x[c];
    x[r] = acc / ExactRational(m[r][r]);
  }
  return x;
}

// ---- product form ----------------------------------------------------------------

/// Multiplies the bracket (coefficients of Y^j, lowest first) by
/// prod_{t=0}^{E((i-1)/2)} (Y - 2^t) and returns the power-basis coefficients.
/// Works for rational brackets and for brackets whose entries are polynomials
/// in 2^k.
template <typename Coeff>
std::vector<Coeff> expand_product_form(int i, const std::vector<Coeff>& bracket) {
  const auto pre = product_prefactor(i);
  if (bracket.empty()) return {};
  std::vector<Coeff> out(bracket.size() + pre.coefficients().size() - 1);
  for (std::size_t j = 0; j < bracket.size(); ++j)
    for (std::size_t t = 0; t < pre.coefficients().size(); ++t)
      out[j + t] = Coeff(out[j + t] + Coeff(bracket[j] * pre.coefficient(t)));
  return out;
}

inline RationalPoly expand_product_form(int i, const RationalPoly& bracket) {
  return RationalPoly(expand_product_form(i, bracket.coefficients()));
}

inline BiPoly expand_product_form(int i, const BiPoly& bracket) {
  return BiPoly(expand_product_form(i, bracket.coefficients()));
}

/// Divides out the prefactor root by root. `exact` is false when any division
/// leaves a remainder.
template <typename Coeff>
struct Refactored {
  Polynomial<Coeff> bracket;
  bool exact = true;
};

template <typename Coeff>
Refactored<Coeff> refactor(int i, const Polynomial<Coeff>& power_form) {
  Refactored<Coeff> r{power_form, true};
  for (int t = 0; t <= prefactor_top(i); ++t) {
    auto [quotient, remainder] = r.bracket.divide_by_root(Coeff{ExactRational(pow2(static_cast<unsigned>(t)))});
    if (!(remainder == Coeff{})) r.exact = false;
    r.bracket = std::move(quotient);
  }
  return r;
}

/// Builds the linear map alpha -> a_j by expanding unit brackets: column t is
/// the expansion of Y^t, the constant column that of (2^{i+1}-1) Y^{u}.
inline PrintedLinearMap derive_linear_map(int i) {
  const int u = bracket_unknowns(i);
  PrintedLinearMap m;
  m.rank = i;
  auto expand_unit = [&](int degree, const ExactRational& c) {
    return expand_product_form(i, RationalPoly::monomial(c, static_cast<std::size_t>(degree)));
  };
  const auto constant = expand_unit(u, ExactRational(leading_coefficient(i)));
  for (int j = 0; j < i; ++j) {
    m.coeff[j] = std::vector<ExactInt>(static_cast<std::size_t>(u));
    m.constant[j] = to_integer(constant.coefficient(static_cast<std::size_t>(j)));
  }
  for (int t = 0; t < u; ++t) {
    const auto col = expand_unit(t, 1);
    for (int j = 0; j < i; ++j)
      m.coeff[j][static_cast<std::size_t>(t)] = to_integer(col.coefficient(static_cast<std::size_t>(j)));
  }
  return m;
}

// ---- fits -------------------------------------------------------------------------

enum class FitVariable { Pow2N, Pow2K };
enum class FitForm { Power, Product };

inline std::string to_string(FitVariable v) { return v == FitVariable::Pow2N ? "2^n" : "2^k"; }
inline std::string to_string(FitForm f) { return f == FitForm::Power ? "power" : "product"; }

inline FitForm fit_form_from_string(const std::string& s) {
  if (s == "power") return FitForm::Power;
  if (s == "product") return FitForm::Product;
  throw std::invalid_argument("unknown fit form '" + s + "'");
}

/// One sample: Gamma_i at the free parameter value `point` (n or k).
struct Sample {
  int point = 0;
  ExactInt value;
};

struct FitSpec {
  int i = 0;
  FitVariable variable = FitVariable::Pow2N;
  int fixed_param = 0;  // k for fits in 2^n, n for fits in 2^k
  std::vector<Sample> samples;
  FitForm form = FitForm::Power;
  std::optional<ExactInt> leading;  // fixed coefficient of the top power, if any
};

struct HoldoutCheck {
  int point = 0;
  ExactInt observed;
  ExactRational predicted;
  bool match = false;
};

struct CoefficientFit {
  FitSpec spec;
  /// Solved unknowns: a_j (power form in 2^n), alpha_j (product form) or b_j (fit in 2^k).
  std::map<int, ExactRational> coefficients;
  /// The full expansion in powers of the fit variable, fixed leading term included.
  RationalPoly expansion;
  std::vector<int> solved_points;
  std::vector<HoldoutCheck> holdouts;
  std::vector<int> excluded_zero_points;
  bool residual_consistent = false;

  std::string verdict() const { return residual_consistent ? "consistent" : "conjecture-violation"; }

  /// Power-basis coefficients a_j, j = 0..i-1, whatever form was solved.
  std::map<int, ExactRational> power_coefficients() const {
    std::map<int, ExactRational> out;
    const int top = spec.variable == FitVariable::Pow2N ? spec.i - 1 : expansion.degree();
    for (int j = 0; j <= top; ++j) out[j] = expansion.coefficient(static_cast<std::size_t>(j));
    return out;
  }
};

namespace detail {

inline void check_samples(const FitSpec& s, int unknowns) {
  std::set<int> seen;
  for (const auto& p : s.samples) {
    if (!seen.insert(p.point).second)
      throw std::invalid_argument("duplicate sample point " + std::to_string(p.point) + " makes the system singular");
    if (p.point < 0) throw std::invalid_argument("sample points must be nonnegative");
  }
  if (static_cast<int>(s.samples.size()) < unknowns)
    throw std::invalid_argument("fit for i=" + std::to_string(s.i) + " needs at least " + std::to_string(unknowns) +
                                " samples, got " + std::to_string(s.samples.size()));
}

/// Fits y(point) = known(Y) + sum_{j<unknowns} c_j Y^j * weight(Y), with
/// Y = 2^point. The basis function is Y^j * weight(Y).
inline CoefficientFit solve_fit(FitSpec spec, int unknowns, const RationalPoly& weight, const RationalPoly& known) {
  std::sort(spec.samples.begin(), spec.samples.end(), [](const Sample& a, const Sample& b) { return a.point < b.point; });
  CoefficientFit fit;
  fit.spec = spec;
  std::vector<Sample> usable;
  for (const auto& s : spec.samples) {
    if (s.value == 0) fit.excluded_zero_points.push_back(s.point);
    else usable.push_back(s);
  }
  if (static_cast<int>(usable.size()) < unknowns)
    throw std::invalid_argument("only " + std::to_string(usable.size()) + " samples with nonzero Gamma_" +
                                std::to_string(spec.i) + "; the fit needs " + std::to_string(unknowns));

  auto yval = [](int point) { return ExactRational(pow2(static_cast<unsigned>(point))); };
  std::vector<std::vector<ExactRational>> a;
  std::vector<ExactRational> rhs;
  for (int r = 0; r < unknowns; ++r) {
    const auto& s = usable[static_cast<std::size_t>(r)];
    const ExactRational y = yval(s.point);
    const ExactRational w = weight.evaluate(y);
    std::vector<ExactRational> row;
    ExactRational power = 1;
    for (int j = 0; j < unknowns; ++j, power *= y) row.push_back(power * w);
    a.push_back(std::move(row));
    rhs.push_back(ExactRational(s.value) - known.evaluate(y));
    fit.solved_points.push_back(s.point);
  }
  auto x = solve_exact(a, rhs);
  if (!x) throw std::invalid_argument("sample points give a singular system");

  RationalPoly bracket{};
  for (int j = 0; j < unknowns; ++j) {
    fit.coefficients[j] = (*x)[static_cast<std::size_t>(j)];
    bracket += RationalPoly::monomial((*x)[static_cast<std::size_t>(j)], static_cast<std::size_t>(j));
  }
  fit.expansion = known + bracket * weight;

  fit.residual_consistent = true;
  for (std::size_t r = static_cast<std::size_t>(unknowns); r < usable.size(); ++r) {
    const auto& s = usable[r];
    HoldoutCheck h{s.point, s.value, fit.expansion.evaluate(yval(s.point)), false};
    h.match = h.predicted == ExactRational(h.observed);
    fit.residual_consistent = fit.residual_consistent && h.match;
    fit.holdouts.push_back(std::move(h));
  }
  return fit;
}

}  // namespace detail

/// Number of unknowns in a fit in 2^n for rank i.
inline int fit_unknowns(int i, FitForm form) { return form == FitForm::Power ? i : bracket_unknowns(i); }

/// Fits Gamma_i(n, k) at fixed k as a polynomial in 2^n. Power form solves
/// for a_0..a_{i-1} after subtracting (2^{i+1}-1) 2^{in}; product form solves
/// for the bracket coefficients alpha_j of the factored form. The lowest
/// nonzero sample points are solved exactly, the rest are holdouts.
inline CoefficientFit fit_in_2n(int i, int k, std::vector<Sample> samples, FitForm form = FitForm::Power,
                                std::optional<ExactInt> leading = std::nullopt) {
  if (i < 1) throw std::invalid_argument("fit_in_2n needs i >= 1");
  FitSpec spec{i, FitVariable::Pow2N, k, std::move(samples), form, leading.value_or(leading_coefficient(i))};
  const int unknowns = fit_unknowns(i, form);
  detail::check_samples(spec, unknowns);
  const ExactRational lead(*spec.leading);
  if (form == FitForm::Power) {
    return detail::solve_fit(std::move(spec), unknowns, pconst(1),
                             RationalPoly::monomial(lead, static_cast<std::size_t>(i)));
  }
  const auto pre = product_prefactor(i);
  return detail::solve_fit(std::move(spec), unknowns, pre,
                           RationalPoly::monomial(lead, static_cast<std::size_t>(unknowns)) * pre);
}

/// Fits Gamma_i(n, k) at fixed n as sum_{j=0}^{E(i/2)} b_j 2^{jk}.
inline CoefficientFit fit_in_2k(int i, int n, std::vector<Sample> samples) {
  if (i < 1) throw std::invalid_argument("fit_in_2k needs i >= 1");
  FitSpec spec{i, FitVariable::Pow2K, n, std::move(samples), FitForm::Power, std::nullopt};
  const int unknowns = i / 2 + 1;
  detail::check_samples(spec, unknowns);
  return detail::solve_fit(std::move(spec), unknowns, pconst(1), RationalPoly{});
}

/// a_j^{(i)}(k) tabulated at k, or nullopt.
inline std::optional<std::map<int, ExactRational>> tabled_power_coefficients(int i, int k) {
  if (i < 1 || i > kMaxTabledRank || k < i) return std::nullopt;
  std::map<int, ExactRational> out;
  for (int j = 0; j < i; ++j) out[j] = coefficient_table(i, j)->at(k);
  return out;
}

// ---- affine behaviour of the top coefficient ---------------------------------------

struct AffineCheck {
  int i = 0;
  std::vector<std::pair<int, ExactRational>> points;  // (k, a_{i-1}^{(i)}(k))
  bool affine = false;
  ExactRational slope;   // a(i)
  ExactRational offset;  // b(i) in a(i) 2^k + b(i)
  bool matches_closed_form = false;

  std::string verdict() const {
    if (!affine) return "conjecture-violation";
    return matches_closed_form ? "match" : "mismatch";
  }
};

/// Checks that a_{i-1}^{(i)}(k), given at three or more distinct k, is an
/// affine function of 2^k and compares it with the closed form.
inline AffineCheck verify_affine_in_2k(int i, std::vector<std::pair<int, ExactRational>> points) {
  std::set<int> ks;
  for (const auto& [k, v] : points)
    if (!ks.insert(k).second) throw std::invalid_argument("duplicate k in affine check");
  if (points.size() < 3) throw std::invalid_argument("affine check needs at least three values of k");
  std::sort(points.begin(), points.end());
  AffineCheck c;
  c.i = i;
  c.points = points;
  const ExactRational x0 = pow2(static_cast<unsigned>(points[0].first));
  const ExactRational x1 = pow2(static_cast<unsigned>(points[1].first));
  c.slope = (points[1].second - points[0].second) / (x1 - x0);
  c.offset = points[0].second - c.slope * x0;
  c.affine = std::all_of(points.begin() + 2, points.end(), [&](const auto& p) {
    return c.slope * ExactRational(pow2(static_cast<unsigned>(p.first))) + c.offset == p.second;
  });
  if (i >= 2) {
    const auto closed = top_coefficient_affine(i);
    c.matches_closed_form = c.affine && c.slope == closed.slope && c.offset == -closed.offset;
  }
  return c;
}

// ---- reports ---------------------------------------------------------------------------

inline nlohmann::json rational_map_json(const std::map<int, ExactRational>& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : m) j[std::to_string(k)] = to_display_string(v);
  return j;
}

inline nlohmann::json fit_to_json(const CoefficientFit& f) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : f.spec.samples) samples.push_back({{"point", s.point}, {"value", s.value.str()}});
  nlohmann::json holdouts = nlohmann::json::array();
  for (const auto& h : f.holdouts)
    holdouts.push_back({{"point", h.point},
                        {"observed", h.observed.str()},
                        {"predicted", to_display_string(h.predicted)},
                        {"match", h.match}});
  return {{"i", f.spec.i},
          {"variable", to_string(f.spec.variable)},
          {"fixed_param", f.spec.fixed_param},
          {"form", to_string(f.spec.form)},
          {"samples", samples},
          {"solved_points", f.solved_points},
          {"excluded_zero_points", f.excluded_zero_points},
          {"coefficients", rational_map_json(f.coefficients)},
          {"power_coefficients", rational_map_json(f.power_coefficients())},
          {"holdouts", holdouts},
          {"verdict", f.verdict()}};
}

inline nlohmann::json affine_to_json(const AffineCheck& c) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& [k, v] : c.points) pts.push_back({{"k", k}, {"value", to_display_string(v)}});
  return {{"i", c.i},
          {"points", pts},
          {"affine", c.affine},
          {"slope", to_display_string(c.slope)},
          {"offset", to_display_string(c.offset)},
          {"matches_closed_form", c.matches_closed_form},
          {"verdict", c.verdict()}};
}

}  // namespace persym
