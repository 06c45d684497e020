#pragma once

// Closed-form rank counts and coefficient tables for n-times persymmetric
// 2n x k matrices over F2, transcribed as exact polynomials in X = 2^k
// (or Y = 2^n) together with the (n, k, i) range on which each is claimed.
//
// Naming: Gamma_i(n, k) is the number of matrices of rank i; a_j^{(i)}(k)
// are the coefficients of 2^{jn} in the power-basis expansion of Gamma_i,
// alpha_j^{(i)}(k) those of the bracket in the factored form
//   Gamma_i = prod_{t=0}^{E((i-1)/2)} (2^n - 2^t) * [(2^{i+1}-1) 2^{(i-1-E)n} + sum_j alpha_j 2^{jn}],
// and b_j^{(i)}(n) the coefficients of 2^{jk} at fixed n.

#include "persym/errors.hpp"
#include "persym/exact.hpp"
#include "persym/polynomial.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace persym {

enum class Variable { Pow2K, Pow2N };

inline std::string to_string(Variable v) { return v == Variable::Pow2K ? "2^k" : "2^n"; }

/// A polynomial in X = 2^k or X = 2^n.
struct ClosedFormPoly {
  Variable var = Variable::Pow2K;
  RationalPoly poly;

  ExactRational at(int exponent) const {
    if (exponent < 0) throw std::invalid_argument("exponent must be nonnegative");
    return poly.evaluate(ExactRational(pow2(static_cast<unsigned>(exponent))));
  }

  friend bool operator==(const ClosedFormPoly&, const ClosedFormPoly&) = default;
};

/// Where a formula is asserted. Every bound is inclusive; rank i is always
/// limited to 0..min(2n,k) and `rank_position` narrows that further.
struct FormulaDomain {
  enum class RankPosition { Any, Interior, Boundary, InteriorOrFullRank };

  int n_min = 1;
  std::optional<int> n_max;
  int k_min = 1;
  std::optional<int> k_max;
  std::optional<int> rank;  // the formula is for this single rank only
  bool k_at_least_rank = false;
  bool k_at_least_2n = false;
  bool k_below_2n = false;
  RankPosition rank_position = RankPosition::Any;
  std::string text;

  bool contains(int n, int k, int i) const {
    if (n < n_min || (n_max && n > *n_max)) return false;
    if (k < k_min || (k_max && k > *k_max)) return false;
    if (rank && i != *rank) return false;
    const int top = std::min(2 * n, k);
    if (i < 0 || i > top) return false;
    if (k_at_least_rank && k < i) return false;
    if (k_at_least_2n && k < 2 * n) return false;
    if (k_below_2n && k >= 2 * n) return false;
    if (rank_position == RankPosition::Interior && i >= top) return false;
    if (rank_position == RankPosition::Boundary && i != top) return false;
    if (rank_position == RankPosition::InteriorOrFullRank && i >= top && !(i == 2 * n && k >= 2 * n)) return false;
    return true;
  }
};

inline nlohmann::json domain_to_json(const FormulaDomain& d) {
  nlohmann::json j{{"text", d.text}, {"n_min", d.n_min}, {"k_min", d.k_min}};
  j["n_max"] = d.n_max ? nlohmann::json(*d.n_max) : nlohmann::json(nullptr);
  j["k_max"] = d.k_max ? nlohmann::json(*d.k_max) : nlohmann::json(nullptr);
  j["rank"] = d.rank ? nlohmann::json(*d.rank) : nlohmann::json(nullptr);
  j["k_at_least_rank"] = d.k_at_least_rank;
  j["k_at_least_2n"] = d.k_at_least_2n;
  j["k_below_2n"] = d.k_below_2n;
  static const char* positions[] = {"any", "interior", "boundary", "interior-or-full-rank"};
  j["rank_position"] = positions[static_cast<int>(d.rank_position)];
  return j;
}

// ---- building blocks --------------------------------------------------------

inline ExactRational pow2q(int e) {
  return e >= 0 ? ExactRational(pow2(static_cast<unsigned>(e))) : make_rational(1, pow2(static_cast<unsigned>(-e)));
}

/// c * 2^{a*v + b} as a polynomial in X = 2^v.
inline RationalPoly pterm(const ExactRational& c, unsigned a, int b = 0) {
  return RationalPoly::monomial(c * pow2q(b), a);
}

inline RationalPoly pconst(const ExactRational& c) { return RationalPoly::constant(c); }

inline ExactRational q(long long num, long long den = 1) { return make_rational(num, den); }

/// Evaluates a polynomial in 2^v at v = exponent.
inline ExactRational eval_pow2(const RationalPoly& p, int exponent) {
  return p.evaluate(ExactRational(pow2(static_cast<unsigned>(exponent))));
}

/// E((i-1)/2): index of the last factor (2^n - 2^E) in the factored form.
constexpr int prefactor_top(int i) { return floor_div(i - 1, 2); }

/// Number of free alpha_j in the bracket of the factored form.
constexpr int bracket_unknowns(int i) { return i - 1 - prefactor_top(i); }

/// prod_{t=0}^{E((i-1)/2)} (Y - 2^t) in Y = 2^n.
inline RationalPoly product_prefactor(int i) {
  if (i < 1) throw std::invalid_argument("product_prefactor needs i >= 1");
  RationalPoly p = pconst(1);
  for (int t = 0; t <= prefactor_top(i); ++t) p = p * RationalPoly::linear_root(pow2q(t));
  return p;
}

/// Leading coefficient 2^{i+1} - 1 of 2^{in}.
inline ExactInt leading_coefficient(int i) { return pow2(static_cast<unsigned>(i + 1)) - 1; }

// ---- rank tables for n = 1, 2, 3 ---------------------------------------------

/// Gamma_i(n, k) as polynomials in 2^k for n = 1, 2, 3, rank 0 first.
inline std::vector<RationalPoly> case_table_rows(int n) {
  switch (n) {
    case 1:
      return {pconst(1), pconst(3), pterm(1, 1, 1) - pconst(4)};
    case 2:
      return {pconst(1), pconst(9), pterm(3, 1, 1) + pconst(30), pterm(21, 1, 1) - pconst(168),
              pterm(1, 2, 2) - pterm(3, 1, 4) + pconst(128)};
    case 3:
      return {pconst(1),
              pconst(21),
              pterm(7, 1, 1) + pconst(266),
              pterm(147, 1, 1) + pconst(1344),
              pterm(7, 2, 2) + pterm(651, 1, 2) - pconst(22624),
              pterm(105, 2, 2) - pterm(315, 1, 5) + pconst(53760),
              pterm(1, 3, 3) - pterm(7, 2, 6) + pterm(7, 1, 10) - pconst(32768)};
    default:
      throw std::invalid_argument("rank tables exist for n = 1, 2, 3 only");
  }
}

/// Rows are asserted below the top rank, and for the top row i = 2n when
/// k >= 2n. The top rank i = k < 2n belongs to the complement formula.
inline FormulaDomain case_table_domain(int n) {
  FormulaDomain d;
  d.n_min = n;
  d.n_max = n;
  d.rank_position = FormulaDomain::RankPosition::InteriorOrFullRank;
  d.text = "n = " + std::to_string(n) + ", i < min(2n, k), or i = 2n with k >= 2n";
  return d;
}

/// Row i evaluated at k without any guard; used for boundary comparisons.
inline std::optional<ExactRational> case_table_row_value(int n, int k, int i) {
  if (n < 1 || n > 3 || k < 1 || i < 0 || i > 2 * n) return std::nullopt;
  return eval_pow2(case_table_rows(n)[static_cast<std::size_t>(i)], k);
}

/// Table value, or nullopt when (n, k, i) is outside the tabled range.
inline std::optional<ExactInt> gamma_case_table(int n, int k, int i) {
  if (n < 1 || n > 3 || k < 1) return std::nullopt;
  if (!case_table_domain(n).contains(n, k, i)) return std::nullopt;
  return to_integer(*case_table_row_value(n, k, i));
}

/// b_j^{(i)}(n) for n = 1, 2, 3, one row per rank i = 1..2n, padded with the
/// zeros shown in the printed matrices.
inline std::vector<std::vector<ExactInt>> dual_coefficient_table(int n) {
  switch (n) {
    case 1:
      return {{3, 0}, {-4, 2}};
    case 2:
      return {{9, 0, 0}, {30, 6, 0}, {-168, 42, 0}, {128, -48, 4}};
    case 3:
      return {{21, 0, 0, 0},          {266, 14, 0, 0},       {1344, 294, 0, 0},
              {-22624, 2604, 28, 0},  {53760, -10080, 420, 0}, {-32768, 7168, -448, 8}};
    default:
      throw std::invalid_argument("dual coefficient tables exist for n = 1, 2, 3 only");
  }
}

// ---- boundary formulas ---------------------------------------------------------

/// 2^n prod_{j=1}^{n} (X - 2^{2n-j}) in X = 2^k.
inline RationalPoly full_rank_poly(int n) {
  if (n < 1) throw std::invalid_argument("full_rank_poly needs n >= 1");
  RationalPoly p = pconst(pow2q(n));
  for (int j = 1; j <= n; ++j) p = p * RationalPoly::linear_root(pow2q(2 * n - j));
  return p;
}

inline FormulaDomain full_rank_domain() {
  FormulaDomain d;
  d.k_at_least_2n = true;
  d.rank_position = FormulaDomain::RankPosition::Boundary;
  d.text = "i = 2n, k >= 2n";
  return d;
}

/// Number of full-rank (rank 2n) matrices; requires k >= 2n.
inline ExactInt gamma_full_rank(int n, int k) {
  if (n < 1 || k < 2 * n) throw DomainError("full-rank product needs k >= 2n");
  ExactInt v = pow2(static_cast<unsigned>(n));
  for (int j = 1; j <= n; ++j) v *= pow2(static_cast<unsigned>(k)) - pow2(static_cast<unsigned>(2 * n - j));
  return v;
}

/// Gamma_k by complement, 2^{n(k+1)} - sum of Gamma_0..Gamma_{k-1}, for k < 2n.
inline ExactInt gamma_complement(int n, int k, const std::vector<ExactInt>& prefix) {
  if (n < 1 || k < 1 || k >= 2 * n) throw DomainError("complement formula needs 1 <= k < 2n");
  if (static_cast<int>(prefix.size()) != k)
    throw std::invalid_argument("complement needs exactly k prefix values Gamma_0..Gamma_{k-1}");
  ExactInt v = pow2(static_cast<unsigned>(n * (k + 1)));
  for (const auto& g : prefix) v -= g;
  if (v < 0) throw InconsistencyError("prefix sums past 2^{n(k+1)}; complement would be " + v.str());
  return v;
}

inline FormulaDomain complement_domain() {
  FormulaDomain d;
  d.k_below_2n = true;
  d.rank_position = FormulaDomain::RankPosition::Boundary;
  d.text = "i = k, k < 2n";
  return d;
}

/// Gamma_5 for n = 4: 6300 (X^2 + 100 X - 1856).
inline RationalPoly gamma5_quadruple_poly() {
  return (pterm(1, 2) + pterm(100, 1) - pconst(1856)) * q(6300);
}

inline FormulaDomain gamma5_quadruple_domain() {
  FormulaDomain d;
  d.n_min = 4;
  d.n_max = 4;
  d.k_min = 5;
  d.rank = 5;
  d.text = "n = 4, i = 5, k >= 5";
  return d;
}

inline ExactInt gamma5_quadruple(int k) {
  if (k < 5) throw DomainError("rank-5 formula for n = 4 is stated for k >= 5");
  return to_integer(eval_pow2(gamma5_quadruple_poly(), k));
}

// ---- a_j^{(i)}(k) tables -------------------------------------------------------------

/// a_j^{(i)}(k) in X = 2^k for i = 1..5, j = 0..i-1.
inline std::optional<ClosedFormPoly> coefficient_table(int i, int j) {
  auto wrap = [](RationalPoly p) { return ClosedFormPoly{Variable::Pow2K, std::move(p)}; };
  if (j < 0 || j >= i) return std::nullopt;
  switch (i) {
    case 1:
      return wrap(pconst(-3));
    case 2:
      if (j == 0) return wrap(-pterm(1, 1, 1) + pconst(18));
      return wrap(pterm(1, 1, 1) - pconst(25));
    case 3:
      if (j == 0) return wrap(pterm(14, 1) - pconst(176));
      if (j == 1) return wrap(-pterm(21, 1) + pconst(294));
      return wrap(pterm(7, 1) - pconst(133));
    case 4:
      if (j == 0) return wrap((pterm(1, 2, 2) - pterm(117, 1, 2) + pconst(9440)) * q(1, 3));
      if (j == 1) return wrap(-pterm(1, 2, 1) + pterm(269, 1) - pconst(5744));
      if (j == 2) return wrap((pterm(1, 2, 2) - pterm(783, 1) + pconst(19028)) * q(1, 6));
      return wrap((pterm(35, 1) - pconst(1210)) * q(1, 2));
    case 5:
      if (j == 0) return wrap(-pterm(20, 2) + pterm(2960, 1) - pconst(106752));
      if (j == 1) return wrap(pterm(35, 2) - pterm(5490, 1) + pconst(203872));
      if (j == 2) return wrap((-pterm(35, 2) + pterm(6265, 1) - pconst(247520)) * q(1, 2));
      if (j == 3) return wrap(pterm(q(5, 2), 2) - pterm(q(2565, 4), 1) + pconst(29150));
      return wrap(pterm(q(155, 4), 1) - pconst(2573));
    default:
      return std::nullopt;
  }
}

inline constexpr int kMaxTabledRank = 5;

/// Where the a_j^{(i)}(k) polynomials are defined.
inline FormulaDomain coefficient_domain(int i) {
  FormulaDomain d;
  d.rank = i;
  d.k_at_least_rank = true;
  d.text = "i = " + std::to_string(i) + ", k >= i, i <= min(2n, k)";
  return d;
}

/// Where the power-basis expansion of Gamma_i is asserted: i < min(2n, k).
inline FormulaDomain power_form_domain(int i) {
  FormulaDomain d;
  d.rank = i;
  d.rank_position = FormulaDomain::RankPosition::Interior;
  d.text = "i = " + std::to_string(i) + ", i < min(2n, k)";
  return d;
}

/// All a_j^{(i)} for one rank as a polynomial in Y = 2^n whose coefficients
/// are polynomials in X = 2^k, including the leading (2^{i+1}-1) Y^i.
inline std::optional<BiPoly> power_form_bipoly(int i) {
  if (i < 1 || i > kMaxTabledRank) return std::nullopt;
  std::vector<RationalPoly> coeffs;
  for (int j = 0; j < i; ++j) coeffs.push_back(coefficient_table(i, j)->poly);
  coeffs.push_back(pconst(ExactRational(leading_coefficient(i))));
  return BiPoly(std::move(coeffs));
}

/// Gamma_i(n, k) from the power-basis expansion and the a_j tables, for any
/// k >= i (callers decide whether the point is inside the asserted range).
/// Not rounded: a non-integer result is itself evidence of a broken table.
inline std::optional<ExactRational> power_form_value(int i, int n, int k) {
  auto p = power_form_bipoly(i);
  if (!p || k < i) return std::nullopt;
  return eval_pow2(p->evaluate(ExactRational(pow2(static_cast<unsigned>(n)))), k);
}

/// alpha_j^{(5)}(k), j = 0, 1.
inline RationalPoly alpha5_table(int j) {
  if (j == 0) return pterm(q(5, 2), 2) - pterm(370, 1) + pconst(13344);
  if (j == 1) return pterm(q(155, 4), 1) - pconst(2132);
  throw std::invalid_argument("alpha^{(5)} has j = 0, 1");
}

/// Right-hand side of alpha_0^{(5)} + 2^n alpha_1^{(5)} for n = 3 and n = 4,
/// obtained from the n = 3 table and the n = 4 rank-5 formula.
inline RationalPoly alpha5_combination_rhs(int n) {
  if (n == 3) return pterm(q(5, 2), 2) - pterm(60, 1) - pconst(3712);
  if (n == 4) return pterm(q(5, 2), 2) + pterm(250, 1) - pconst(20768);
  throw std::invalid_argument("alpha^{(5)} combinations are tabled for n = 3, 4");
}

/// A printed linear map from bracket coefficients alpha_0..alpha_m to the
/// power-basis coefficients a_j: a_j = sum_t coeff[j][t] alpha_t + constant[j].
struct PrintedLinearMap {
  int rank = 0;
  std::map<int, std::vector<ExactInt>> coeff;
  std::map<int, ExactInt> constant;
  struct Erratum {
    int row;
    ExactInt printed_constant;
    ExactInt corrected_constant;
    std::string note;
  };
  std::vector<Erratum> errata;

  template <typename Coeff>
  Coeff apply(int j, const std::vector<Coeff>& alphas) const {
    Coeff acc{ExactRational(constant.at(j))};
    const auto& row = coeff.at(j);
    for (std::size_t t = 0; t < row.size(); ++t) acc = acc + Coeff(alphas.at(t) * ExactRational(row[t]));
    return acc;
  }
};

/// Rank-5 map for the factored form with prefactor (Y-1)(Y-2)(Y-4). The
/// printed row for a_2 carries constant -1008; the expansion gives
/// -8 * 63 = -504 and only -504 reproduces the a^{(5)} table, so the map
/// stores -504 and keeps the printed value as an erratum.
inline PrintedLinearMap rank5_printed_map() {
  PrintedLinearMap m;
  m.rank = 5;
  m.coeff = {{0, {-8, 0}}, {1, {14, -8}}, {2, {-7, 14}}, {3, {1, -7}}, {4, {0, 1}}};
  m.constant = {{0, 0}, {1, 0}, {2, -504}, {3, 882}, {4, -441}};
  m.errata.push_back({2, -1008, -504, "printed constant of a_2 is -1008; expansion of the factored form gives -504"});
  return m;
}

/// Rank-8 map for the prefactor (Y-1)(Y-2)(Y-4)(Y-8) = Y^4 - 15Y^3 + 70Y^2 - 120Y + 64.
inline PrintedLinearMap rank8_printed_map() {
  PrintedLinearMap m;
  m.rank = 8;
  m.coeff = {{7, {0, 0, 0, 1}},       {6, {0, 0, 1, -15}},  {5, {0, 1, -15, 70}},
             {4, {1, -15, 70, -120}}, {3, {-15, 70, -120, 64}}, {2, {70, -120, 64, 0}},
             {1, {-120, 64, 0, 0}},   {0, {64, 0, 0, 0}}};
  m.constant = {{7, -7665}, {6, 35770}, {5, -61320}, {4, 32704}, {3, 0}, {2, 0}, {1, 0}, {0, 0}};
  return m;
}

// ---- top coefficient a_{i-1}^{(i)}(k) -------------------------------------------

/// a_{i-1}^{(i)}(k) = slope * 2^k - offset.
struct AffinePair {
  ExactRational slope;
  ExactRational offset;
  friend bool operator==(const AffinePair&, const AffinePair&) = default;
};

/// slope = ((2^{2i-1} - 3*2^{i-1} + 1)/3) / 2^{i-3}, offset = (2^{2i+3} - 15*2^i + 7)/3.
inline AffinePair top_coefficient_affine(int i) {
  if (i < 2) throw std::invalid_argument("top coefficient formula needs i >= 2");
  const ExactRational slope =
      make_rational(pow2(static_cast<unsigned>(2 * i - 1)) - 3 * pow2(static_cast<unsigned>(i - 1)) + 1, 3) /
      pow2q(i - 3);
  const ExactRational offset =
      make_rational(pow2(static_cast<unsigned>(2 * i + 3)) - 15 * pow2(static_cast<unsigned>(i)) + 7, 3);
  return {slope, offset};
}

/// The printed values of the top coefficient for i = 2..8.
inline std::map<int, AffinePair> printed_top_coefficient_table() {
  return {{2, {2, 25}},
          {3, {7, 133}},
          {4, {q(35, 2), 605}},
          {5, {q(155, 4), 2573}},
          {6, {q(651, 8), 10605}},
          {7, {q(2667, 16), 43053}},
          {8, {q(10795, 32), 173485}}};
}

struct TopCoefficientSequences {
  std::map<int, ExactInt> a;  // numerators of the slope: a_j = slope(j) * 2^{j-3}
  std::map<int, ExactInt> b;  // offsets
};

/// Unrolls a_j = 4 a_{j-1} + (2^{j-1} - 1), b_j = 4 b_{j-1} + 33 + 40 (2^{j-3} - 1)
/// from a_2 = 1, b_2 = 25.
inline TopCoefficientSequences top_coefficient_recurrences(int j_max) {
  if (j_max < 2) throw std::invalid_argument("recurrences start at j = 2");
  TopCoefficientSequences s;
  s.a[2] = 1;
  s.b[2] = 25;
  for (int j = 3; j <= j_max; ++j) {
    s.a[j] = 4 * s.a[j - 1] + (pow2(static_cast<unsigned>(j - 1)) - 1);
    s.b[j] = 4 * s.b[j - 1] + 33 + 40 * (pow2(static_cast<unsigned>(j - 3)) - 1);
  }
  return s;
}

inline ExactRational top_coefficient_a_closed(int j) {
  return make_rational(pow2(static_cast<unsigned>(2 * j - 1)) - 3 * pow2(static_cast<unsigned>(j - 1)) + 1, 3);
}

inline ExactRational top_coefficient_b_closed(int j) {
  return make_rational(pow2(static_cast<unsigned>(2 * j + 3)) - 15 * pow2(static_cast<unsigned>(j)) + 7, 3);
}

// ---- rank 8 ---------------------------------------------------------------------------

inline RationalPoly rank8_prefactor() { return product_prefactor(8); }

/// alpha_j^{(8)}(k), j = 0..3.
inline RationalPoly alpha8_table(int j) {
  switch (j) {
    case 0:
      return (pterm(1, 4) - pterm(10005, 3) + pterm(22047760, 2) - pterm(17459355, 1, 10) + pterm(35464937, 0, 17)) *
             q(1, 1260);
    case 1:
      return pterm(q(31, 64), 3) - pterm(q(12679, 8), 2) + pterm(1499448, 1) - pterm(408345, 0, 10);
    case 2:
      return pterm(q(3937, 128), 2) - pterm(43688, 1) + pterm(222582, 0, 6);
    case 3:
      return pterm(q(10795, 32), 1) - pconst(165820);
    default:
      throw std::invalid_argument("alpha^{(8)} has j = 0..3");
  }
}

/// Rank-8 count in power basis: sum_j c_j(X) Y^j, c_8 = 511.
inline BiPoly gamma8_power_form() {
  std::vector<RationalPoly> c(9);
  c[8] = pconst(511);
  c[7] = pterm(q(10795, 32), 1) - pconst(173485);
  c[6] = pterm(q(3937, 128), 2) - pterm(q(1559941, 32), 1) + pconst(16768318);
  c[5] = pterm(q(31, 64), 3) - pterm(q(261919, 128), 2) + pterm(q(34854113, 16), 1) - pconst(643492720);
  c[4] = pterm(q(1, 315 * 4), 4) - pterm(q(20437, 21 * 64), 3) + pterm(q(25012451, 9 * 64), 2) -
         pterm(q(3341482313LL, 84), 1) + pconst(7289277664LL) + pterm(q(35464937, 315), 0, 15);
  c[3] = -pterm(q(1, 21 * 4), 4) + pterm(q(102825, 21 * 32), 3) - pterm(q(126707455, 21 * 16), 2) +
         (pconst(110225510) + pterm(q(5819785, 7), 0, 8)) * pterm(1, 1) - pterm(q(7081677751LL, 21), 0, 8);
  c[2] = pterm(q(1, 18), 4) - pterm(q(14735, 24), 3) + pterm(q(25506523, 18), 2) - pterm(q(55123739, 3), 1, 6) +
         pterm(q(169923845, 9), 0, 14);
  c[1] = -pterm(q(2, 21), 4) + pterm(q(20661, 21), 3) - pterm(q(6603656, 3), 2) + pterm(q(24591157, 7), 1, 9) -
         pterm(q(150434993, 21), 0, 16);
  c[0] = (pterm(1, 4) - pterm(10005, 3) + pterm(22047760, 2) - pterm(17459355, 1, 10) + pterm(35464937, 0, 17)) *
         q(16, 315);
  return BiPoly(std::move(c));
}

/// Rank-8 count written as sum_m X^m * prefactor(Y) * Q_m(Y).
inline BiPoly gamma8_factored_form() {
  const BiPoly prefactor = lift_outer(rank8_prefactor());
  auto outer = [](std::initializer_list<long long> lowest_first) {
    std::vector<ExactRational> c;
    for (auto v : lowest_first) c.emplace_back(v);
    return lift_outer(RationalPoly(std::move(c)));
  };
  auto x_power = [](unsigned m, const ExactRational& scale) { return lift_inner(pterm(scale, m)); };
  BiPoly sum;
  sum += x_power(4, q(1, 1260)) * prefactor;
  sum += x_power(3, q(1, 21 * 64)) * prefactor * outer({-10672, 651});
  sum += x_power(2, q(1, 315 * 128)) * prefactor * outer({22047760LL * 32, -63902160, 1240155});
  sum += x_power(1, q(1, 21 * 32)) * prefactor * outer({-1163957LL * 8192, 1007629056, -29358336, 226695});
  sum += x_power(0, q(1, 315)) * prefactor *
         outer({1162115055616LL, -131715763200LL, 4487253120LL, -52233300, 160965});
  return sum;
}

/// Rank-8 rows at fixed n (polynomials in X = 2^k), n = 0..6.
inline std::optional<RationalPoly> gamma8_fixed_n_row(int n) {
  if (n >= 0 && n <= 3) return RationalPoly{};
  if (n == 4)
    return (pterm(1, 4) - pterm(240, 3) + pterm(17920, 2) - pterm(491520, 1) + pterm(1, 0, 22)) * q(16);
  if (n == 5)
    return (pterm(1, 4) + pterm(9525, 3) - pterm(2169440, 2) + pterm(68115, 1, 11) - pterm(9749, 0, 18)) * q(496);
  if (n == 6)
    return (pterm(1, 4) + pterm(29055, 3) + pterm(52983280, 2) - pterm(10751745, 1, 10) + pterm(7323814, 0, 16)) *
           q(10416);
  return std::nullopt;
}

/// Rank-8 rows at fixed k (polynomials in Y = 2^n), k = 9, 10.
inline std::optional<RationalPoly> gamma8_fixed_k_row(int k) {
  auto from = [](std::initializer_list<ExactRational> lowest_first) {
    return RationalPoly(std::vector<ExactRational>(lowest_first));
  };
  if (k == 9)
    return from({14680064, -83951616, 118013952, -57511680, 8456800, 440496, -127762, -765, 511});
  if (k == 10)
    return from({ExactRational(-4445 * pow2(21)), ExactRational(242795 * pow2(16)), ExactRational(-436135 * pow2(14)),
                 271514880, 323250144, -38376240, -897890, 171955, 511});
  return std::nullopt;
}

/// Right-hand side of 2^{2n} alpha_2 + 2^n alpha_1 + alpha_0 for n = 4, 5, 6.
inline std::optional<RationalPoly> alpha8_combination_rhs(int n) {
  if (n == 4)
    return (pterm(1, 4) - pterm(240, 3) + pterm(17920, 2) - pterm(491520, 1) + pterm(1, 0, 22)) * q(1, 1260) -
           pterm(10795, 1, 7) + pconst(645709824);
  if (n == 5)
    return (pterm(1, 4) + pterm(9525, 3) - pterm(2169440, 2) + pterm(68115, 1, 11) - pterm(9749, 0, 18)) *
               q(1, 1260) -
           pterm(10795, 1, 10) + pconst(4897767424LL);
  if (n == 6)
    return (pterm(1, 4) + pterm(29055, 3) + pterm(52983280, 2) - pterm(10751745, 1, 10) + pterm(7323814, 0, 16)) *
               q(1, 1260) -
           pterm(10795, 1, 13) + pterm(33279, 0, 20);
  return std::nullopt;
}

inline FormulaDomain gamma8_domain() {
  FormulaDomain d;
  d.rank = 8;
  d.n_min = 0;
  d.text = "i = 8: zero for n <= 3 or k < 8; fixed-n rows for n = 4, 5, 6 at k = 8; general form for k >= 9";
  return d;
}

/// Rank-8 count. Zero when 2n < 8 or k < 8 (rank bound); the fixed-n rows at
/// k = 8 for n = 4..6; the general form for k >= 9. nullopt elsewhere.
inline std::optional<ExactInt> gamma8(int n, int k) {
  if (n < 0 || k < 1) return std::nullopt;
  if (n <= 3 || k < 8) return ExactInt(0);
  if (k == 8) {
    auto row = gamma8_fixed_n_row(n);
    if (!row) return std::nullopt;
    return to_integer(eval_pow2(*row, k));
  }
  const ExactRational y = pow2(static_cast<unsigned>(n));
  const ExactRational power = eval_pow2(gamma8_power_form().evaluate(y), k);
  const ExactRational factored = eval_pow2(gamma8_factored_form().evaluate(y), k);
  if (power != factored) throw InconsistencyError("the two rank-8 forms disagree at n=" + std::to_string(n));
  return to_integer(power);
}

// ---- catalog export -------------------------------------------------------------------------

struct CatalogEntry {
  std::string id;
  std::string description;
  FormulaDomain domain;
  Variable var = Variable::Pow2K;
  std::vector<std::pair<std::string, RationalPoly>> parts;
  std::vector<std::string> notes;
};

inline std::vector<CatalogEntry> formula_catalog() {
  std::vector<CatalogEntry> out;
  for (int n = 1; n <= 3; ++n) {
    CatalogEntry e{"gamma.table.n" + std::to_string(n), "Gamma_i for n = " + std::to_string(n),
                   case_table_domain(n), Variable::Pow2K, {}, {}};
    auto rows = case_table_rows(n);
    for (std::size_t i = 0; i < rows.size(); ++i) e.parts.emplace_back("i=" + std::to_string(i), rows[i]);
    out.push_back(std::move(e));
  }
  for (int n = 1; n <= 3; ++n) {
    CatalogEntry e{"dual.table.n" + std::to_string(n), "b_j^{(i)}(n) rows, coefficient of 2^{jk}",
                   case_table_domain(n), Variable::Pow2K, {}, {}};
    auto rows = dual_coefficient_table(n);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::vector<ExactRational> c(rows[i].begin(), rows[i].end());
      e.parts.emplace_back("i=" + std::to_string(i + 1), RationalPoly(std::move(c)));
    }
    out.push_back(std::move(e));
  }
  for (int n = 1; n <= 6; ++n) {
    out.push_back({"gamma.full_rank.n" + std::to_string(n), "2^n prod_{j=1}^{n} (2^k - 2^{2n-j})",
                   full_rank_domain(), Variable::Pow2K, {{"i=2n", full_rank_poly(n)}}, {}});
  }
  out.push_back({"gamma.complement", "2^{n(k+1)} - sum_{i<k} Gamma_i", complement_domain(), Variable::Pow2K, {}, {}});
  out.push_back({"gamma.rank5.n4", "6300 (2^{2k} + 100 2^k - 1856)", gamma5_quadruple_domain(), Variable::Pow2K,
                 {{"i=5", gamma5_quadruple_poly()}}, {"k = 5 is the boundary i = min(2n, k)"}});
  for (int i = 1; i <= kMaxTabledRank; ++i) {
    CatalogEntry e{"coeff.a.i" + std::to_string(i), "a_j^{(" + std::to_string(i) + ")}(k), coefficient of 2^{jn}",
                   coefficient_domain(i), Variable::Pow2K, {}, {}};
    for (int j = 0; j < i; ++j) e.parts.emplace_back("j=" + std::to_string(j), coefficient_table(i, j)->poly);
    out.push_back(std::move(e));
  }
  out.push_back({"coeff.alpha.i5", "alpha_j^{(5)}(k)", coefficient_domain(5), Variable::Pow2K,
                 {{"j=0", alpha5_table(0)}, {"j=1", alpha5_table(1)}}, {}});
  {
    auto m = rank5_printed_map();
    CatalogEntry e{"map.rank5", "a_j^{(5)} from alpha_0, alpha_1: part j lists (alpha_0, alpha_1, constant)",
                   coefficient_domain(5), Variable::Pow2K, {}, {}};
    for (const auto& [j, row] : m.coeff) {
      std::vector<ExactRational> c(row.begin(), row.end());
      c.emplace_back(m.constant.at(j));
      e.parts.emplace_back("j=" + std::to_string(j), RationalPoly(std::move(c)));
    }
    for (const auto& er : m.errata) e.notes.push_back(er.note);
    out.push_back(std::move(e));
  }
  {
    CatalogEntry e{"coeff.alpha.i8", "alpha_j^{(8)}(k)", gamma8_domain(), Variable::Pow2K, {}, {}};
    for (int j = 0; j <= 3; ++j) e.parts.emplace_back("j=" + std::to_string(j), alpha8_table(j));
    out.push_back(std::move(e));
  }
  {
    CatalogEntry e{"gamma.rank8.power_form", "coefficient of 2^{jn} in Gamma_8, k >= 9", gamma8_domain(),
                   Variable::Pow2K, {}, {}};
    const auto p = gamma8_power_form();
    for (int j = 0; j <= p.degree(); ++j) e.parts.emplace_back("j=" + std::to_string(j), p.coefficient(static_cast<std::size_t>(j)));
    out.push_back(std::move(e));
  }
  for (int n = 4; n <= 6; ++n) {
    out.push_back({"gamma.rank8.n" + std::to_string(n), "Gamma_8 at fixed n", gamma8_domain(), Variable::Pow2K,
                   {{"i=8", *gamma8_fixed_n_row(n)}}, {}});
  }
  for (int k : {9, 10}) {
    out.push_back({"gamma.rank8.k" + std::to_string(k), "Gamma_8 at fixed k, polynomial in 2^n", gamma8_domain(),
                   Variable::Pow2N, {{"i=8", *gamma8_fixed_k_row(k)}}, {}});
  }
  {
    CatalogEntry e{"coeff.top.affine", "a_{i-1}^{(i)}(k) = slope 2^k - offset, printed values", FormulaDomain{},
                   Variable::Pow2K, {}, {}};
    e.domain.text = "i >= 2, k > i";
    for (const auto& [i, pair] : printed_top_coefficient_table())
      e.parts.emplace_back("i=" + std::to_string(i), RationalPoly{-pair.offset, pair.slope});
    out.push_back(std::move(e));
  }
  return out;
}

inline nlohmann::json formula_catalog_json() {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : formula_catalog()) {
    nlohmann::json parts = nlohmann::json::array();
    for (const auto& [label, poly] : e.parts)
      parts.push_back({{"label", label}, {"coefficients", poly_to_fraction_map(poly)}});
    arr.push_back({{"id", e.id},
                   {"description", e.description},
                   {"variable", to_string(e.var)},
                   {"domain", domain_to_json(e.domain)},
                   {"parts", parts},
                   {"notes", e.notes}});
  }
  return {{"engine_version", "1.0.0"}, {"formulas", arr}};
}

}  // namespace persym
