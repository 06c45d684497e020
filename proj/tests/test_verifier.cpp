#include "reference_data.hpp"
#include "persym/verifier.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>

using namespace persym;

namespace {

RankCensus frozen(int n, int k) {
  return RankCensus{n, k, reference::frozen_counts().at({n, k}), CensusMethod::Exhaustive, 0};
}

const CheckResult* find(const std::vector<CheckResult>& v, const std::string& id, std::optional<int> i = std::nullopt) {
  for (const auto& c : v)
    if (c.id == id && (!i || c.scope.i == i)) return &c;
  return nullptr;
}

int count_verdict(const std::vector<CheckResult>& v, Verdict verdict, bool asserted = true) {
  int n = 0;
  for (const auto& c : v) n += (c.verdict == verdict && c.asserted == asserted);
  return n;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() / ("persym_verify_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST(VerifyCase, SingleBlockAllMatch) {
  const auto checks = verify_case(frozen(1, 4));
  EXPECT_EQ(count_verdict(checks, Verdict::Mismatch), 0);
  for (int i = 0; i <= 2; ++i) ASSERT_NE(find(checks, "census.case_table", i), nullptr) << i;
  EXPECT_NE(find(checks, "census.full_rank", 2), nullptr);
  EXPECT_NE(find(checks, "census.sum_identity"), nullptr);
  EXPECT_NE(find(checks, "census.kernel_moment"), nullptr);
}

TEST(VerifyCase, ThreeBlocksKFive) {
  const auto checks = verify_case(frozen(3, 5));
  EXPECT_EQ(count_verdict(checks, Verdict::Mismatch), 0);
  EXPECT_EQ(count_verdict(checks, Verdict::Mismatch, false), 0);
  const auto* boundary = find(checks, "census.case_table.boundary", 5);
  ASSERT_NE(boundary, nullptr);
  EXPECT_EQ(boundary->expected, "161280");
  EXPECT_FALSE(boundary->asserted);
  EXPECT_EQ(find(checks, "census.complement", 5)->verdict, Verdict::Match);
}

TEST(VerifyCase, TopRankRecordedBothWays) {
  const auto checks = verify_case(frozen(2, 2));
  const auto* table = find(checks, "census.case_table.boundary", 2);
  const auto* complement = find(checks, "census.complement", 2);
  ASSERT_TRUE(table && complement);
  EXPECT_EQ(table->verdict, Verdict::Match);
  EXPECT_EQ(complement->verdict, Verdict::Match);
  EXPECT_EQ(complement->observed, "54");
}

TEST(VerifyCase, TopRankBelowNIsAnUnassertedDifference) {
  const auto checks = verify_case(frozen(2, 1));
  const auto* table = find(checks, "census.case_table.boundary", 1);
  ASSERT_NE(table, nullptr);
  EXPECT_EQ(table->verdict, Verdict::Mismatch);
  EXPECT_FALSE(table->asserted);
  EXPECT_EQ(find(checks, "census.complement", 1)->verdict, Verdict::Match);
  EXPECT_EQ(count_verdict(checks, Verdict::Mismatch), 0);
}

TEST(VerifyCase, FourBlocksRankFiveThreeWay) {
  const auto checks = verify_case(frozen(4, 5));
  for (const char* id : {"census.rank5_four_blocks.boundary", "census.complement", "census.power_form.boundary"}) {
    const auto* c = find(checks, id, 5);
    ASSERT_NE(c, nullptr) << id;
    EXPECT_EQ(c->verdict, Verdict::Match) << id;
    EXPECT_EQ(c->observed, "14918400") << id;
  }
  EXPECT_EQ(count_verdict(checks, Verdict::Mismatch), 0);
}

TEST(VerifyCase, CorruptedCountIsAMismatchWithWitness) {
  auto c = frozen(2, 3);
  c.counts[2] += 1;
  c.counts[3] -= 1;
  const auto checks = verify_case(c, census_digest(c), "somewhere.json");
  const auto* r = find(checks, "census.case_table", 2);
  ASSERT_NE(r, nullptr);
  EXPECT_EQ(r->verdict, Verdict::Mismatch);
  ASSERT_TRUE(r->witness.has_value());
  EXPECT_EQ(r->witness->census_digest, census_digest(c));
  EXPECT_EQ(r->witness->census_file, "somewhere.json");
}

TEST(VerifyCase, UncoveredRanksAreExplicit) {
  const auto checks = verify_case(frozen(4, 7));
  const auto* c = find(checks, "census.any_formula", 6);
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->verdict, Verdict::NotCovered);
}

TEST(Gamma8Suite, AllIdentitiesHoldQuickly) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto checks = verify_gamma8_suite();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(secs, 1.0);
  EXPECT_EQ(count_verdict(checks, Verdict::Match), static_cast<int>(checks.size()));
  EXPECT_GT(checks.size(), 300U);
  bool found = false;
  for (const auto& c : checks)
    if (c.id == "rank8.zero_below_four_blocks" && c.scope.n == 3 && c.scope.k == 15) found = c.verdict == Verdict::Match;
  EXPECT_TRUE(found);
}

TEST(FormulaIdentities, AssertedChecksMatchAndErratumIsReported) {
  const auto checks = verify_formula_identities();
  EXPECT_EQ(count_verdict(checks, Verdict::Mismatch), 0);
  const auto* erratum = find(checks, "rank5.map_printed_constant_2");
  ASSERT_NE(erratum, nullptr);
  EXPECT_EQ(erratum->verdict, Verdict::Mismatch);
  EXPECT_FALSE(erratum->asserted);
}

TEST(Fits, RecoverTablesFromCensuses) {
  CensusMap m;
  for (auto [n, k] : std::vector<std::pair<int, int>>{{1, 5}, {2, 5}, {3, 5}, {4, 5}, {5, 5}, {1, 6}, {2, 6}, {3, 6},
                                                     {4, 6}, {1, 7}, {2, 7}, {3, 7}, {4, 7}, {1, 4}, {2, 4}, {3, 4}})
    m.emplace(std::make_pair(n, k), frozen(n, k));
  const auto checks = verify_fits(m);
  EXPECT_EQ(count_verdict(checks, Verdict::Mismatch), 0);
  int table_matches = 0;
  for (const auto& c : checks)
    if (c.id == "fit.product.vs_coefficient_table" && c.verdict == Verdict::Match) ++table_matches;
  EXPECT_EQ(table_matches, 5 + 5 + 5 + 4);  // i = 1..5 at k = 5, 6, 7; i = 1..4 at k = 4
  for (int i = 2; i <= 5; ++i) {
    const auto* a = find(checks, "fit.affine_top_coefficient", i);
    ASSERT_NE(a, nullptr);
    EXPECT_EQ(a->verdict, Verdict::Match) << i;
  }
}

TEST(RunPlan, EmptyPlanStillRunsFormulaChecks) {
  PlanConfig cfg;
  const auto r = run_plan(cfg);
  EXPECT_EQ(r.exit_code(), 0);
  EXPECT_NE(find(r.checks, "rank8.forms_identical"), nullptr);
  EXPECT_NE(find(r.checks, "top_coefficient.recurrence_a"), nullptr);
}

TEST(RunPlan, DeterministicBody) {
  PlanConfig cfg;
  cfg.entries = {{2, 4}, {1, 3}, {2, 3}};
  cfg.threads = 2;
  const auto a = report_body_json(run_plan(cfg)).dump();
  cfg.entries = {{2, 3}, {2, 4}, {1, 3}, {1, 3}};
  cfg.threads = 1;
  const auto b = report_body_json(run_plan(cfg)).dump();
  EXPECT_EQ(a, b);
}

TEST(RunPlan, BudgetAndCorruptionStayLocal) {
  TempDir tmp;
  PlanConfig cfg;
  cfg.cache_dir = tmp.path;
  cfg.entries = {{1, 3}, {2, 3}};
  cfg.formulas = false;
  EXPECT_EQ(run_plan(cfg).exit_code(), 0);

  {
    std::ofstream out(CensusCache(tmp.path).path_for(2, 3), std::ios::trunc);
    out << "not json";
  }
  cfg.entries = {{1, 3}, {2, 3}, {3, 10}};
  cfg.budget_bits = 20;
  const auto r = run_plan(cfg);
  EXPECT_EQ(r.exit_code(), 2);
  const auto* load = find(r.checks, "census.load");
  ASSERT_NE(load, nullptr);
  EXPECT_EQ(load->scope.n, 2);
  EXPECT_EQ(load->verdict, Verdict::Error);
  const auto* skipped = find(r.checks, "census.compute");
  ASSERT_NE(skipped, nullptr);
  EXPECT_EQ(skipped->verdict, Verdict::SkippedBudget);
  EXPECT_EQ(find(r.checks, "census.case_table", 2)->scope.n, 1);
}

TEST(RunPlan, MismatchSetsExitCodeOne) {
  TempDir tmp;
  auto bad = frozen(2, 4);
  bad.counts[1] += 1;
  bad.counts[2] -= 1;
  save_census(bad, CensusCache(tmp.path).path_for(2, 4));
  PlanConfig cfg;
  cfg.cache_dir = tmp.path;
  cfg.entries = {{2, 4}};
  cfg.formulas = false;
  const auto r = run_plan(cfg);
  EXPECT_EQ(r.exit_code(), 1);
  EXPECT_GT(r.tallies().at("mismatch"), 0);
}

TEST(RunPlan, DefaultPlanAllAssertedChecksMatch) {
  PlanConfig cfg;
  cfg.entries = default_plan();
  const auto r = run_plan(cfg);
  const auto t = r.tallies();
  EXPECT_EQ(t.at("mismatch"), 0);
  EXPECT_EQ(t.at("error"), 0);
  EXPECT_EQ(t.at("skipped-budget"), 0);
  EXPECT_EQ(r.exit_code(), 0);
  EXPECT_GT(t.at("match"), 500);
  const auto text = report_to_text(r);
  EXPECT_NE(text.find("census.case_table"), std::string::npos);
}
