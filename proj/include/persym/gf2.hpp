#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace persym {

using Word = std::uint64_t;
inline constexpr int kMaxBits = 64;

constexpr Word low_mask(int len) { return len >= 64 ? ~Word{0} : (Word{1} << len) - 1; }

/// A row vector over F2 of 1..64 bits. Bit t holds coordinate t (0-indexed).
class BitVec {
 public:
  BitVec(int len, Word bits) : len_(len), bits_(bits) {
    if (len < 1 || len > kMaxBits) throw std::invalid_argument("BitVec length must be in 1..64");
    if ((bits & ~low_mask(len)) != 0) throw std::invalid_argument("BitVec has bits set beyond its length");
  }

  explicit BitVec(int len) : BitVec(len, 0) {}

  /// Parses a 0/1 string; character j becomes coordinate j, so "1101" means
  /// coordinates (1,1,0,1) read left to right.
  static BitVec from_string(std::string_view text) {
    if (text.empty() || text.size() > kMaxBits) throw std::invalid_argument("BitVec string must have 1..64 digits");
    Word bits = 0;
    for (std::size_t j = 0; j < text.size(); ++j) {
      if (text[j] == '1') bits |= Word{1} << j;
      else if (text[j] != '0') throw std::invalid_argument("BitVec string must contain only 0 and 1");
    }
    return BitVec(static_cast<int>(text.size()), bits);
  }

  int size() const noexcept { return len_; }
  Word word() const noexcept { return bits_; }
  bool test(int pos) const { return ((bits_ >> check(pos)) & 1U) != 0; }

  std::string to_string() const {
    std::string s(static_cast<std::size_t>(len_), '0');
    for (int j = 0; j < len_; ++j)
      if (test(j)) s[static_cast<std::size_t>(j)] = '1';
    return s;
  }

  friend bool operator==(const BitVec&, const BitVec&) = default;

 private:
  int check(int pos) const {
    if (pos < 0 || pos >= len_) throw std::out_of_range("BitVec index out of range");
    return pos;
  }

  int len_;
  Word bits_;
};

/// Dense matrix over F2 with one machine word per row.
class GF2Matrix {
 public:
  GF2Matrix(int ncols, std::vector<BitVec> rows) : ncols_(ncols), rows_(std::move(rows)) {
    if (ncols < 1 || ncols > kMaxBits) throw std::invalid_argument("GF2Matrix column count must be in 1..64");
    for (const auto& r : rows_)
      if (r.size() != ncols) throw std::invalid_argument("GF2Matrix row length differs from column count");
  }

  static GF2Matrix zero(int nrows, int ncols) {
    return GF2Matrix(ncols, std::vector<BitVec>(static_cast<std::size_t>(nrows), BitVec(ncols)));
  }

  int rows() const noexcept { return static_cast<int>(rows_.size()); }
  int cols() const noexcept { return ncols_; }
  const BitVec& row(int r) const { return rows_.at(static_cast<std::size_t>(r)); }
  const std::vector<BitVec>& row_vectors() const noexcept { return rows_; }
  bool at(int r, int c) const { return row(r).test(c); }

  friend bool operator==(const GF2Matrix&, const GF2Matrix&) = default;

 private:
  int ncols_;
  std::vector<BitVec> rows_;
};

/// Rank of the span of the given rows. Pivots are keyed by their lowest set
/// bit; XOR with the pivot keyed at bit b clears b and only touches higher
/// bits, so one ascending sweep over the pivots fully reduces a row.
inline int rank_of_words(std::span<const Word> rows) noexcept {
  std::array<Word, kMaxBits> pivot_rows;
  Word occupied = 0;
  int rank = 0;
  for (Word v : rows) {
    for (Word todo = occupied; todo != 0; todo &= todo - 1) {
      const int b = std::countr_zero(todo);
      v ^= pivot_rows[static_cast<std::size_t>(b)] & (Word{0} - ((v >> b) & 1U));
    }
    if (v != 0) {
      const int b = std::countr_zero(v);
      pivot_rows[static_cast<std::size_t>(b)] = v;
      occupied |= Word{1} << b;
      ++rank;
    }
  }
  return rank;
}

inline int rank(const GF2Matrix& m) {
  std::vector<Word> words;
  words.reserve(static_cast<std::size_t>(m.rows()));
  for (const auto& r : m.row_vectors()) words.push_back(r.word());
  return rank_of_words(words);
}

inline GF2Matrix transpose(const GF2Matrix& m) {
  if (m.rows() < 1 || m.rows() > kMaxBits)
    throw std::invalid_argument("transpose needs 1..64 rows");
  std::vector<BitVec> out;
  out.reserve(static_cast<std::size_t>(m.cols()));
  for (int c = 0; c < m.cols(); ++c) {
    Word bits = 0;
    for (int r = 0; r < m.rows(); ++r)
      if (m.at(r, c)) bits |= Word{1} << r;
    out.emplace_back(m.rows(), bits);
  }
  return GF2Matrix(m.rows(), std::move(out));
}

/// The two row words of one 2 x k persymmetric block. With alpha stored as
/// bits 0..k (alpha_1 in bit 0), the first row is alpha_1..alpha_k and the
/// second row is alpha_2..alpha_{k+1}, i.e. the same window shifted by one.
struct BlockRows {
  Word first;
  Word second;
};

constexpr BlockRows block_rows(Word alpha, int k) noexcept {
  return {alpha & low_mask(k), (alpha >> 1) & low_mask(k)};
}

/// Free parameters of one n-times persymmetric 2n x k matrix: n bit vectors
/// of length k+1, one per 2 x k block.
class PersymParams {
 public:
  PersymParams(int n, int k, std::vector<BitVec> alphas) : n_(n), k_(k), alphas_(std::move(alphas)) {
    if (n < 1) throw std::invalid_argument("PersymParams needs n >= 1");
    if (k < 1 || k + 1 > kMaxBits) throw std::invalid_argument("PersymParams needs 1 <= k <= 63");
    if (static_cast<int>(alphas_.size()) != n) throw std::invalid_argument("PersymParams needs exactly n alpha vectors");
    for (const auto& a : alphas_)
      if (a.size() != k + 1) throw std::invalid_argument("each alpha vector must have length k+1");
  }

  int n() const noexcept { return n_; }
  int k() const noexcept { return k_; }
  const std::vector<BitVec>& alphas() const noexcept { return alphas_; }

  friend bool operator==(const PersymParams&, const PersymParams&) = default;

 private:
  int n_;
  int k_;
  std::vector<BitVec> alphas_;
};

inline GF2Matrix build_block(const BitVec& alpha, int k) {
  if (k < 1 || alpha.size() != k + 1) throw std::invalid_argument("build_block needs alpha of length k+1");
  const auto rows = block_rows(alpha.word(), k);
  return GF2Matrix(k, {BitVec(k, rows.first), BitVec(k, rows.second)});
}

inline GF2Matrix build_matrix(const PersymParams& p) {
  std::vector<BitVec> rows;
  rows.reserve(static_cast<std::size_t>(2 * p.n()));
  for (const auto& alpha : p.alphas()) {
    const auto block = build_block(alpha, p.k());
    rows.push_back(block.row(0));
    rows.push_back(block.row(1));
  }
  return GF2Matrix(p.k(), std::move(rows));
}

}  // namespace persym
