#include "oracle.hpp"
#include "reference_data.hpp"
#include "persym/census.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>

using namespace persym;

namespace {

ExactInt moment_closed_form(int n, int k) {
  // Every nonzero x gives a rank-2 system in the block parameters.
  return pow2(static_cast<unsigned>(n * (k + 1))) +
         (pow2(static_cast<unsigned>(k)) - 1) * pow2(static_cast<unsigned>(n * (k - 1)));
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("persym_test_" + std::to_string(oracle::rng()()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST(FullCensus, MatchesDenseBruteForce) {
  for (auto [n, k] : std::vector<std::pair<int, int>>{{1, 1}, {1, 4}, {2, 1}, {2, 3}, {2, 5}, {3, 2}, {3, 3}, {4, 2}}) {
    const auto c = full_census(n, k, 30, 1);
    const auto ref = oracle::brute_census(n, k);
    ASSERT_EQ(c.counts.size(), ref.size()) << n << "," << k;
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_EQ(c.counts[i], ExactInt(ref[i])) << n << "," << k << " i=" << i;
  }
}

TEST(FullCensus, MatchesFrozenTables) {
  for (const auto& [nk, counts] : reference::frozen_counts()) {
    if (nk.first * (nk.second + 1) > 24) continue;
    EXPECT_EQ(full_census(nk.first, nk.second).counts, counts) << nk.first << "," << nk.second;
  }
}

TEST(MultisetCensus, AgreesWithFullEnumeration) {
  for (auto [n, k] : std::vector<std::pair<int, int>>{{1, 3}, {2, 2}, {2, 6}, {3, 4}, {3, 5}, {4, 4}}) {
    const auto full = full_census(n, k);
    const auto reduced = multiset_census(n, k);
    EXPECT_EQ(full, reduced) << n << "," << k;
    EXPECT_EQ(reduced.method, CensusMethod::MultisetReduced);
  }
}

TEST(MultisetCensus, MatchesFrozenTablesBeyondFullBudget) {
  EXPECT_EQ(multiset_census(4, 6).counts, reference::frozen_counts().at({4, 6}));
  EXPECT_EQ(multiset_census(5, 5).counts, reference::frozen_counts().at({5, 5}));
}

TEST(Census, ThreadCountDoesNotChangeResult) {
  EXPECT_EQ(full_census(3, 4, 30, 1), full_census(3, 4, 30, 3));
  EXPECT_EQ(multiset_census(3, 5, 30, 1), multiset_census(3, 5, 30, 4));
}

TEST(Census, SumAndMomentIdentities) {
  for (const auto& [nk, counts] : reference::frozen_counts()) {
    RankCensus c{nk.first, nk.second, counts, CensusMethod::Exhaustive, 0};
    EXPECT_NO_THROW(validate_census(c));
    EXPECT_EQ(c.total(), pow2(static_cast<unsigned>(nk.first * (nk.second + 1))));
    EXPECT_EQ(moment_from_counts(c), moment_closed_form(nk.first, nk.second));
  }
}

TEST(KernelMoment, MatchesClosedForm) {
  EXPECT_EQ(kernel_moment(1, 2).value, 14);
  EXPECT_EQ(kernel_moment(2, 2).value, 76);
  for (int n = 1; n <= 6; ++n)
    for (int k = 1; k <= 12; ++k) EXPECT_EQ(kernel_moment(n, k).value, moment_closed_form(n, k));
  EXPECT_THROW(kernel_moment(1, 31), DomainError);
}

TEST(Census, RefusesOverBudget) {
  try {
    full_census(3, 10);
    FAIL() << "expected BudgetExceeded";
  } catch (const BudgetExceeded& e) {
    EXPECT_EQ(e.required_bits(), 33);
    EXPECT_EQ(e.budget_bits(), 30);
    EXPECT_NE(std::string(e.what()).find("--budget"), std::string::npos);
  }
  EXPECT_THROW(full_census(4, 7, 20), BudgetExceeded);
  EXPECT_THROW(multiset_census(6, 9, 20), BudgetExceeded);
}

TEST(Census, ValidateRejectsCorruption) {
  RankCensus c{2, 3, reference::frozen_counts().at({2, 3}), CensusMethod::Exhaustive, 0};
  auto bad = c;
  bad.counts[2] += 1;
  EXPECT_THROW(validate_census(bad), IntegrityError);
  bad = c;
  bad.counts.pop_back();
  EXPECT_THROW(validate_census(bad), IntegrityError);
  bad = c;
  bad.counts[0] = 0;
  bad.counts[1] += 1;
  EXPECT_THROW(validate_census(bad), IntegrityError);
}

TEST(Persistence, JsonRoundTrip) {
  RankCensus c{3, 5, reference::frozen_counts().at({3, 5}), CensusMethod::MultisetReduced, 0.25};
  const auto j = census_to_json(c);
  EXPECT_EQ(j["counts"][5], "161280");
  EXPECT_EQ(j["total"], pow2(18).str());
  const auto back = census_from_json(j);
  EXPECT_EQ(back, c);
  EXPECT_EQ(back.method, CensusMethod::MultisetReduced);
}

TEST(Persistence, RejectsTamperedTotalAndWrongSchema) {
  auto j = census_to_json(RankCensus{2, 2, reference::frozen_counts().at({2, 2}), CensusMethod::Exhaustive, 0});
  auto tampered = j;
  tampered["counts"][1] = "10";
  EXPECT_THROW(census_from_json(tampered), IntegrityError);
  auto future = j;
  future["schema_version"] = 99;
  EXPECT_THROW(census_from_json(future), SchemaVersionError);
}

TEST(Persistence, DigestIgnoresTiming) {
  RankCensus a{2, 4, reference::frozen_counts().at({2, 4}), CensusMethod::Exhaustive, 1.0};
  auto b = a;
  b.seconds = 9.0;
  EXPECT_EQ(census_digest(a), census_digest(b));
  EXPECT_EQ(census_digest(a).size(), 64U);
  b.counts[1] += 1;
  EXPECT_NE(census_digest(a), census_digest(b));
}

TEST(Cache, ComputesOnceThenLoads) {
  TempDir tmp;
  CensusCache cache(tmp.path);
  int calls = 0;
  auto compute = [&] {
    ++calls;
    return full_census(2, 4);
  };
  bool computed = false;
  auto first = cache.get_or_compute(2, 4, compute, false, &computed);
  EXPECT_TRUE(computed);
  auto second = cache.get_or_compute(2, 4, compute, false, &computed);
  EXPECT_FALSE(computed);
  EXPECT_EQ(first, second);
  EXPECT_EQ(calls, 1);
  cache.get_or_compute(2, 4, compute, true, &computed);
  EXPECT_TRUE(computed);
  EXPECT_EQ(calls, 2);
  EXPECT_TRUE(cache.contains(2, 4));
}

TEST(Cache, CorruptedEntryIsReported) {
  TempDir tmp;
  CensusCache cache(tmp.path);
  cache.get_or_compute(1, 3, [] { return full_census(1, 3); });
  {
    std::ofstream out(cache.path_for(1, 3), std::ios::trunc);
    out << "{\"schema_version\": 1, \"n\": 1";
  }
  EXPECT_THROW(cache.load(1, 3), IntegrityError);
}
