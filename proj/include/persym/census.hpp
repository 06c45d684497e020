#pragma once

#include "persym/errors.hpp"
#include "persym/exact.hpp"
#include "persym/gf2.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <boost/interprocess/sync/file_lock.hpp>
#include <boost/interprocess/sync/scoped_lock.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace persym {

inline constexpr const char* kEngineVersion = "1.0.0";
inline constexpr std::int64_t kCensusSchemaVersion = 1;
inline constexpr int kDefaultBudgetBits = 30;

enum class CensusMethod { Exhaustive, MultisetReduced };

inline std::string to_string(CensusMethod m) {
  return m == CensusMethod::Exhaustive ? "exhaustive" : "multiset-reduced";
}

inline CensusMethod census_method_from_string(const std::string& s) {
  if (s == "exhaustive") return CensusMethod::Exhaustive;
  if (s == "multiset-reduced") return CensusMethod::MultisetReduced;
  throw std::invalid_argument("unknown census method '" + s + "'");
}

inline int max_rank(int n, int k) { return std::min(2 * n, k); }

/// Exact number of n-times persymmetric 2n x k matrices of each rank.
struct RankCensus {
  int n = 0;
  int k = 0;
  std::vector<ExactInt> counts;  // indexed by rank 0..min(2n,k)
  CensusMethod method = CensusMethod::Exhaustive;
  double seconds = 0.0;

  ExactInt count(int rank) const {
    if (rank < 0 || rank >= static_cast<int>(counts.size())) return 0;
    return counts[static_cast<std::size_t>(rank)];
  }

  ExactInt total() const {
    ExactInt s = 0;
    for (const auto& c : counts) s += c;
    return s;
  }

  /// Same counts for the same (n, k); method and timing are provenance only.
  friend bool operator==(const RankCensus& a, const RankCensus& b) {
    return a.n == b.n && a.k == b.k && a.counts == b.counts;
  }
};

/// Throws IntegrityError if the census violates any structural invariant.
inline void validate_census(const RankCensus& c) {
  auto fail = [&](const std::string& what) {
    throw IntegrityError("census (n=" + std::to_string(c.n) + ", k=" + std::to_string(c.k) + "): " + what);
  };
  if (c.n < 1 || c.k < 1) fail("n and k must be positive");
  if (static_cast<int>(c.counts.size()) != max_rank(c.n, c.k) + 1) fail("wrong number of rank entries");
  for (const auto& v : c.counts)
    if (v < 0) fail("negative count");
  if (c.counts[0] != 1) fail("rank-0 count must be 1");
  if (c.total() != pow2(static_cast<unsigned>(c.n * (c.k + 1))))
    fail("counts sum to " + c.total().str() + ", expected 2^" + std::to_string(c.n * (c.k + 1)));
}

inline unsigned default_thread_count() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

/// Number of unordered n-multisets of block parameters, C(2^{k+1}+n-1, n).
inline ExactInt multiset_evaluations(int n, int k) {
  const ExactInt m = pow2(static_cast<unsigned>(k + 1));
  ExactInt num = 1;
  ExactInt den = 1;
  for (int t = 0; t < n; ++t) {
    num *= m + t;
    den *= t + 1;
  }
  return num / den;
}

inline int ceil_log2(const ExactInt& v) {
  if (v <= 1) return 0;
  const ExactInt w = v - 1;
  return static_cast<int>(boost::multiprecision::msb(w)) + 1;
}

namespace detail {

using Histogram = std::array<unsigned __int128, kMaxBits + 1>;

inline void check_shape(int n, int k) {
  if (n < 1) throw std::invalid_argument("census needs n >= 1");
  if (k < 1 || k > 63) throw std::invalid_argument("census needs 1 <= k <= 63");
}

inline std::vector<BlockRows> all_blocks(int k) {
  std::vector<BlockRows> table(std::size_t{1} << (k + 1));
  for (std::size_t a = 0; a < table.size(); ++a) table[a] = block_rows(static_cast<Word>(a), k);
  return table;
}

/// Runs work(task, histogram) for task = 0..tasks-1 over a pool of threads
/// pulling tasks from a shared counter; histograms are merged by addition,
/// so the result does not depend on scheduling.
inline Histogram run_tasks(std::uint64_t tasks, unsigned threads,
                           const std::function<void(std::uint64_t, Histogram&)>& work) {
  threads = std::max(1U, static_cast<unsigned>(std::min<std::uint64_t>(threads, tasks)));
  std::vector<Histogram> partial(threads, Histogram{});
  std::atomic<std::uint64_t> next{0};
  auto worker = [&](unsigned id) {
    for (std::uint64_t t = next++; t < tasks; t = next++) work(t, partial[id]);
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned id = 0; id < threads; ++id) pool.emplace_back(worker, id);
  }
  Histogram merged{};
  for (const auto& h : partial)
    for (std::size_t r = 0; r < merged.size(); ++r) merged[r] += h[r];
  return merged;
}

inline ExactInt to_exact(unsigned __int128 v) {
  ExactInt hi = static_cast<std::uint64_t>(v >> 64);
  return (hi << 64) + static_cast<std::uint64_t>(v);
}

inline RankCensus finish(int n, int k, const Histogram& h, CensusMethod method,
                         std::chrono::steady_clock::time_point start) {
  RankCensus c;
  c.n = n;
  c.k = k;
  c.method = method;
  for (int r = 0; r <= max_rank(n, k); ++r) c.counts.push_back(to_exact(h[static_cast<std::size_t>(r)]));
  for (std::size_t r = static_cast<std::size_t>(max_rank(n, k)) + 1; r < h.size(); ++r)
    if (h[r] != 0) throw IntegrityError("rank above min(2n,k) observed");
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  validate_census(c);
  return c;
}

}  // namespace detail

/// Exhaustive census over all 2^{n(k+1)} parameter vectors. The concatenated
/// alpha vector (block j in bits j(k+1)..j(k+1)+k) is split into contiguous
/// ranges on its high-order bits, one partial histogram per worker.
inline RankCensus full_census(int n, int k, int budget_bits = kDefaultBudgetBits,
                              unsigned threads = default_thread_count()) {
  detail::check_shape(n, k);
  const int bits = n * (k + 1);
  if (bits > budget_bits) throw BudgetExceeded(bits, budget_bits);
  if (bits > 62) throw BudgetExceeded(bits, 62);
  const auto start = std::chrono::steady_clock::now();
  const auto blocks = detail::all_blocks(k);
  const int block_bits = k + 1;
  const Word block_mask = low_mask(block_bits);

  const int split_bits = std::min(bits, 10);
  const std::uint64_t chunks = std::uint64_t{1} << split_bits;
  const int chunk_shift = bits - split_bits;

  auto work = [&](std::uint64_t chunk, detail::Histogram& hist) {
    std::array<Word, kMaxBits> rows{};
    const std::uint64_t lo = chunk << chunk_shift;
    const std::uint64_t hi = lo + (std::uint64_t{1} << chunk_shift);
    for (std::uint64_t p = lo; p < hi; ++p) {
      std::uint64_t rest = p;
      for (int j = 0; j < n; ++j) {
        const auto& b = blocks[rest & block_mask];
        rows[static_cast<std::size_t>(2 * j)] = b.first;
        rows[static_cast<std::size_t>(2 * j + 1)] = b.second;
        rest >>= block_bits;
      }
      ++hist[static_cast<std::size_t>(rank_of_words(std::span<const Word>(rows.data(), static_cast<std::size_t>(2 * n))))];
    }
  };
  return detail::finish(n, k, detail::run_tasks(chunks, threads, work), CensusMethod::Exhaustive, start);
}

/// Census that visits each multiset of block parameters once and weights it
/// by its number of orderings n!/prod(mult!). Valid because the rank is
/// unchanged by permuting blocks.
inline RankCensus multiset_census(int n, int k, int budget_bits = kDefaultBudgetBits,
                                  unsigned threads = default_thread_count()) {
  detail::check_shape(n, k);
  if (n > 20) throw std::invalid_argument("multiset census supports n <= 20");
  const int required = ceil_log2(multiset_evaluations(n, k));
  if (required > budget_bits) throw BudgetExceeded(required, budget_bits);
  const auto start = std::chrono::steady_clock::now();
  const auto blocks = detail::all_blocks(k);
  const std::uint64_t m = std::uint64_t{1} << (k + 1);
  std::uint64_t n_factorial = 1;
  for (int t = 2; t <= n; ++t) n_factorial *= static_cast<std::uint64_t>(t);

  auto work = [&](std::uint64_t first, detail::Histogram& hist) {
    std::array<Word, kMaxBits> rows{};
    std::vector<std::uint64_t> idx(static_cast<std::size_t>(n), first);
    std::vector<std::uint64_t> run(static_cast<std::size_t>(n), 1);
    std::vector<std::uint64_t> denom(static_cast<std::size_t>(n), 1);
    auto place = [&](int d) {
      const auto& b = blocks[idx[static_cast<std::size_t>(d)]];
      rows[static_cast<std::size_t>(2 * d)] = b.first;
      rows[static_cast<std::size_t>(2 * d + 1)] = b.second;
      if (d > 0) {
        const bool same = idx[static_cast<std::size_t>(d)] == idx[static_cast<std::size_t>(d - 1)];
        run[static_cast<std::size_t>(d)] = same ? run[static_cast<std::size_t>(d - 1)] + 1 : 1;
        denom[static_cast<std::size_t>(d)] = denom[static_cast<std::size_t>(d - 1)] * run[static_cast<std::size_t>(d)];
      }
    };
    for (int d = 0; d < n; ++d) place(d);
    const auto nrows = static_cast<std::size_t>(2 * n);
    while (true) {
      const int r = rank_of_words(std::span<const Word>(rows.data(), nrows));
      const std::uint64_t dup = denom[static_cast<std::size_t>(n - 1)];
      hist[static_cast<std::size_t>(r)] += dup == 1 ? n_factorial : n_factorial / dup;
      // Advance the non-decreasing tail idx[1..n-1]; idx[0] is fixed per task.
      int d = n - 1;
      while (d >= 1 && idx[static_cast<std::size_t>(d)] == m - 1) --d;
      if (d < 1) break;
      ++idx[static_cast<std::size_t>(d)];
      place(d);
      for (int e = d + 1; e < n; ++e) {
        idx[static_cast<std::size_t>(e)] = idx[static_cast<std::size_t>(d)];
        place(e);
      }
    }
  };
  return detail::finish(n, k, detail::run_tasks(m, threads, work), CensusMethod::MultisetReduced, start);
}

/// Sum over x in F2^k of (number of single-block parameters whose two rows
/// both annihilate x)^n. Equals sum_i Gamma_i 2^{k-i}.
struct MomentValue {
  int n = 0;
  int k = 0;
  ExactInt value;
};

inline MomentValue kernel_moment(int n, int k) {
  if (n < 1) throw std::invalid_argument("kernel_moment needs n >= 1");
  if (k < 1 || k > 30) throw DomainError("kernel_moment needs 1 <= k <= 30");
  // For fixed x the conditions on alpha in F2^{k+1} are
  //   sum_t alpha_t x_t = 0 and sum_t alpha_{t+1} x_t = 0,
  // i.e. alpha is orthogonal to x (coords 0..k-1) and to x shifted up by one.
  std::array<std::uint64_t, 3> by_rank{};
  for (Word x = 0; x < (Word{1} << k); ++x) {
    const std::array<Word, 2> system{x, x << 1};
    ++by_rank[static_cast<std::size_t>(rank_of_words(system))];
  }
  ExactInt value = 0;
  for (int r = 0; r <= 2; ++r) {
    const ExactInt c = pow2(static_cast<unsigned>(k + 1 - r));
    value += ExactInt(by_rank[static_cast<std::size_t>(r)]) * boost::multiprecision::pow(c, static_cast<unsigned>(n));
  }
  return {n, k, value};
}

inline ExactInt moment_from_counts(const RankCensus& c) {
  ExactInt v = 0;
  for (int i = 0; i < static_cast<int>(c.counts.size()); ++i)
    v += c.counts[static_cast<std::size_t>(i)] * pow2(static_cast<unsigned>(c.k - i));
  return v;
}

// ---- persistence -----------------------------------------------------------

inline nlohmann::json census_to_json(const RankCensus& c) {
  nlohmann::json counts = nlohmann::json::array();
  for (const auto& v : c.counts) counts.push_back(v.str());
  return {{"schema_version", kCensusSchemaVersion},
          {"n", c.n},
          {"k", c.k},
          {"method", to_string(c.method)},
          {"counts", counts},
          {"total", c.total().str()},
          {"engine_version", kEngineVersion},
          {"seconds", c.seconds}};
}

inline RankCensus census_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw IntegrityError("census document is not a JSON object");
  const auto version = j.value("schema_version", std::int64_t{0});
  if (version != kCensusSchemaVersion) throw SchemaVersionError(version, kCensusSchemaVersion);
  RankCensus c;
  try {
    c.n = j.at("n").get<int>();
    c.k = j.at("k").get<int>();
    c.method = census_method_from_string(j.at("method").get<std::string>());
    for (const auto& v : j.at("counts")) c.counts.push_back(parse_exact_int(v.get<std::string>()));
    c.seconds = j.value("seconds", 0.0);
    const auto total = parse_exact_int(j.at("total").get<std::string>());
    if (total != c.total()) throw IntegrityError("recorded total does not match the counts");
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("malformed census document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw IntegrityError(std::string("malformed census document: ") + e.what());
  }
  validate_census(c);
  return c;
}

inline void save_census(const RankCensus& c, const std::filesystem::path& path) {
  validate_census(c);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << census_to_json(c).dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline RankCensus load_census(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw IntegrityError(path.string() + ": " + e.what());
  }
  return census_from_json(j);
}

inline std::string sha256_hex(const std::string& data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  std::ostringstream os;
  for (unsigned int j = 0; j < len; ++j) os << std::hex << std::setw(2) << std::setfill('0') << int(md[j]);
  return os.str();
}

/// Digest of the census content (no timing), used to tie a reported
/// mismatch to the exact data that produced it.
inline std::string census_digest(const RankCensus& c) {
  auto j = census_to_json(c);
  j.erase("seconds");
  return sha256_hex(j.dump());
}

/// Directory of census files keyed by (n, k, engine version). Writers hold a
/// per-key lock file so two processes never write the same entry.
class CensusCache {
 public:
  explicit CensusCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const noexcept { return dir_; }

  std::filesystem::path path_for(int n, int k) const {
    return dir_ / ("census_n" + std::to_string(n) + "_k" + std::to_string(k) + "_v" + kEngineVersion + ".json");
  }

  bool contains(int n, int k) const { return std::filesystem::exists(path_for(n, k)); }

  /// Loads a cached entry; corrupted entries raise IntegrityError.
  std::optional<RankCensus> load(int n, int k) const {
    const auto p = path_for(n, k);
    if (!std::filesystem::exists(p)) return std::nullopt;
    auto c = load_census(p);
    if (c.n != n || c.k != k) throw IntegrityError(p.string() + " holds a census for a different (n, k)");
    return c;
  }

  /// Returns the cached census or computes and stores it. `computed` is set
  /// when fresh work was done.
  RankCensus get_or_compute(int n, int k, const std::function<RankCensus()>& compute, bool force = false,
                            bool* computed = nullptr) {
    std::filesystem::create_directories(dir_);
    auto lock_path = path_for(n, k);
    lock_path += ".lock";
    { std::ofstream touch(lock_path, std::ios::app); }
    boost::interprocess::file_lock lock(lock_path.c_str());
    boost::interprocess::scoped_lock<boost::interprocess::file_lock> guard(lock);
    if (!force) {
      if (auto c = load(n, k)) {
        if (computed) *computed = false;
        return *c;
      }
    }
    auto c = compute();
    save_census(c, path_for(n, k));
    if (computed) *computed = true;
    return c;
  }

 private:
  std::filesystem::path dir_;
};

}  // namespace persym
