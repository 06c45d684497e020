#pragma once

// Slow reference implementations used only by the tests. They share no code
// with the library: matrices are vectors of 0/1 ints and elimination is the
// textbook row-echelon form.

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using Dense = std::vector<std::vector<int>>;

inline int dense_rank(Dense m) {
  int rank = 0;
  const int rows = static_cast<int>(m.size());
  const int cols = rows == 0 ? 0 : static_cast<int>(m[0].size());
  for (int c = 0; c < cols && rank < rows; ++c) {
    int pivot = -1;
    for (int r = rank; r < rows; ++r)
      if (m[r][c]) { pivot = r; break; }
    if (pivot < 0) continue;
    std::swap(m[pivot], m[rank]);
    for (int r = 0; r < rows; ++r)
      if (r != rank && m[r][c])
        for (int t = 0; t < cols; ++t) m[r][t] ^= m[rank][t];
    ++rank;
  }
  return rank;
}

/// alpha[j][t] is alpha_{t+1} of block j; row 2j is alpha_1..alpha_k and
/// row 2j+1 is alpha_2..alpha_{k+1}.
inline Dense persym_matrix(const std::vector<std::vector<int>>& alpha, int k) {
  Dense m;
  for (const auto& a : alpha) {
    m.emplace_back(a.begin(), a.begin() + k);
    m.emplace_back(a.begin() + 1, a.begin() + k + 1);
  }
  return m;
}

/// Rank counts by walking every parameter vector with dense elimination.
inline std::vector<std::uint64_t> brute_census(int n, int k) {
  const int bits = n * (k + 1);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(std::min(2 * n, k) + 1));
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << bits); ++v) {
    std::vector<std::vector<int>> alpha(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(k + 1)));
    for (int b = 0; b < bits; ++b) alpha[b / (k + 1)][b % (k + 1)] = static_cast<int>((v >> b) & 1U);
    ++counts[static_cast<std::size_t>(dense_rank(persym_matrix(alpha, k)))];
  }
  return counts;
}

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(0x5eed1234abcdULL);
  return g;
}

}  // namespace oracle
