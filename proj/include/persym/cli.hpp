#pragma once

#include "persym/census.hpp"
#include "persym/closed_forms.hpp"
#include "persym/coeff_extract.hpp"
#include "persym/verifier.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace persym::cli {

inline constexpr const char* kCacheEnvVar = "PERSYM_CACHE_DIR";
inline constexpr const char* kDefaultCacheDir = ".census-cache";

/// Parses "3-7,9" into {3,4,5,6,7,9}. Result is sorted and deduplicated.
inline std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  auto to_int = [&](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (s.empty() || used != s.size()) throw std::invalid_argument("bad integer '" + s + "' in list '" + text + "'");
    return v;
  };
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    const auto dash = part.find('-', 1);
    if (dash == std::string::npos) {
      out.push_back(to_int(part));
      continue;
    }
    const int lo = to_int(part.substr(0, dash));
    const int hi = to_int(part.substr(dash + 1));
    if (hi < lo) throw std::invalid_argument("empty range '" + part + "'");
    for (int v = lo; v <= hi; ++v) out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty list '" + text + "'");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct CliConfig {
  std::string subcommand;
  std::string n_list;
  std::string k_list;
  std::optional<int> i;
  unsigned threads = default_thread_count();
  int budget_bits = kDefaultBudgetBits;
  std::string cache_dir;
  bool no_cache = false;
  bool force = false;
  std::string method = "auto";
  std::string output;
  std::string format = "table";

  // verify
  bool default_plan = false;
  bool formulas_only = false;
  bool no_fits = false;
  bool problems_only = false;
  bool timing = false;

  // extract
  std::optional<int> fix_k;
  std::optional<int> fix_n;
  std::string samples_n;
  std::string samples_k;
  bool affine_check = false;
  std::string ks;
  std::string form;
};

inline std::string resolve_cache_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kCacheEnvVar); env != nullptr && *env != '\0') return env;
  return kDefaultCacheDir;
}

inline std::optional<CensusMethod> parse_method(const std::string& m) {
  if (m == "auto") return std::nullopt;
  return census_method_from_string(m);
}

/// Loads or computes censuses under the configured budget and cache.
class CensusSource {
 public:
  explicit CensusSource(const CliConfig& cfg)
      : budget_(cfg.budget_bits), threads_(cfg.threads), force_(cfg.force), method_(parse_method(cfg.method)) {
    if (!cfg.no_cache) cache_.emplace(resolve_cache_dir(cfg.cache_dir));
  }

  RankCensus get(int n, int k) {
    const auto method = method_.value_or(n >= 2 ? CensusMethod::MultisetReduced : CensusMethod::Exhaustive);
    auto compute = [&] {
      ++computed_;
      return compute_census(n, k, method, budget_, threads_);
    };
    RankCensus c = cache_ ? cache_->get_or_compute(n, k, compute, force_) : compute();
    validate_census(c);
    return c;
  }

  int computed() const noexcept { return computed_; }
  std::optional<std::filesystem::path> cache_dir() const {
    if (!cache_) return std::nullopt;
    return cache_->dir();
  }

 private:
  int budget_;
  unsigned threads_;
  bool force_;
  std::optional<CensusMethod> method_;
  std::optional<CensusCache> cache_;
  int computed_ = 0;
};

inline void emit(const CliConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.output.empty()) {
    out << text;
    return;
  }
  const std::filesystem::path p(cfg.output);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + cfg.output);
  f << text;
}

// ---- census -------------------------------------------------------------------------------

inline std::string census_table(const RankCensus& c) {
  std::ostringstream os;
  os << "n=" << c.n << " k=" << c.k << " method=" << to_string(c.method) << '\n';
  std::size_t w = 5;
  for (const auto& v : c.counts) w = std::max(w, v.str().size());
  const int iw = std::max(1, static_cast<int>(std::to_string(c.counts.size()).size()));
  os << std::setw(iw) << "i" << "  " << std::setw(static_cast<int>(w)) << "count" << '\n';
  for (std::size_t i = 0; i < c.counts.size(); ++i)
    os << std::setw(iw) << i << "  " << std::setw(static_cast<int>(w)) << c.counts[i].str() << '\n';
  os << "total " << c.total().str() << '\n';
  return os.str();
}

inline int cmd_census(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto ns = parse_int_list(cfg.n_list);
  const auto ks = parse_int_list(cfg.k_list);
  CensusSource source(cfg);
  std::vector<RankCensus> done;
  int status = 0;
  for (int n : ns)
    for (int k : ks) {
      try {
        done.push_back(source.get(n, k));
      } catch (const BudgetExceeded& e) {
        err << "refused n=" << n << " k=" << k << ": " << e.what() << '\n';
        status = 2;
      } catch (const std::exception& e) {
        err << "error n=" << n << " k=" << k << ": " << e.what() << '\n';
        status = 2;
      }
    }

  std::ostringstream os;
  const bool single = ns.size() == 1 && ks.size() == 1;
  if (cfg.format == "json") {
    if (single && !done.empty()) {
      os << census_to_json(done.front()).dump(2) << '\n';
    } else {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& c : done) arr.push_back(census_to_json(c));
      os << arr.dump(2) << '\n';
    }
  } else if (cfg.format == "csv") {
    os << (single ? "i,count\n" : "n,k,i,count\n");
    for (const auto& c : done)
      for (std::size_t i = 0; i < c.counts.size(); ++i) {
        if (!single) os << c.n << ',' << c.k << ',';
        os << i << ',' << c.counts[i].str() << '\n';
      }
  } else {
    for (std::size_t t = 0; t < done.size(); ++t) os << (t ? "\n" : "") << census_table(done[t]);
  }
  emit(cfg, os.str(), out);
  return status;
}

// ---- verify -------------------------------------------------------------------------------

inline int cmd_verify(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  PlanConfig plan;
  plan.budget_bits = cfg.budget_bits;
  plan.threads = cfg.threads;
  plan.force = cfg.force;
  plan.method = parse_method(cfg.method);
  plan.fits = !cfg.no_fits;
  if (!cfg.no_cache) plan.cache_dir = resolve_cache_dir(cfg.cache_dir);
  if (cfg.default_plan) plan.entries = default_plan();
  if (!cfg.formulas_only && (!cfg.n_list.empty() || !cfg.k_list.empty())) {
    if (cfg.n_list.empty() || cfg.k_list.empty()) throw std::invalid_argument("--n and --k must be given together");
    for (int n : parse_int_list(cfg.n_list))
      for (int k : parse_int_list(cfg.k_list)) plan.entries.push_back({n, k});
  }
  if (cfg.formulas_only) {
    plan.entries.clear();
    plan.fits = false;
  }
  if (!cfg.formulas_only && plan.entries.empty())
    throw std::invalid_argument("nothing to verify: give --default-plan, --n/--k or --formulas-only");

  const auto report = run_plan(plan);
  std::string text;
  if (cfg.format == "json") {
    auto j = cfg.timing ? report_to_json(report) : report_body_json(report);
    text = j.dump(2) + "\n";
  } else {
    text = report_to_text(report, cfg.problems_only);
  }
  emit(cfg, text, out);
  const int code = report.exit_code();
  if (code != 0) err << "verification " << (code == 1 ? "found mismatches" : "had execution failures") << '\n';
  return code;
}

// ---- extract ------------------------------------------------------------------------------

struct TableComparison {
  std::string status;  // match-vs-table, mismatch-vs-table, not-tabled
  std::map<int, ExactRational> table;
};

inline TableComparison compare_power_with_table(const CoefficientFit& f) {
  const auto t = tabled_power_coefficients(f.spec.i, f.spec.fixed_param);
  if (!t) return {"not-tabled", {}};
  return {f.power_coefficients() == *t ? "match-vs-table" : "mismatch-vs-table", *t};
}

inline TableComparison compare_dual_with_table(const CoefficientFit& f) {
  const int n = f.spec.fixed_param;
  if (n < 1 || n > 3) return {"not-tabled", {}};
  const auto rows = dual_coefficient_table(n);
  if (f.spec.i < 1 || f.spec.i > static_cast<int>(rows.size())) return {"not-tabled", {}};
  TableComparison c;
  const auto& row = rows[static_cast<std::size_t>(f.spec.i - 1)];
  for (std::size_t j = 0; j < row.size(); ++j) c.table[static_cast<int>(j)] = ExactRational(row[j]);
  auto fitted = f.coefficients;
  for (const auto& [j, v] : c.table) fitted.try_emplace(j, ExactRational(0));
  for (const auto& [j, v] : fitted) c.table.try_emplace(j, ExactRational(0));
  c.status = fitted == c.table ? "match-vs-table" : "mismatch-vs-table";
  return c;
}

inline std::string coeff_line(const std::string& name, const std::map<int, ExactRational>& m) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [j, v] : m) {
    os << (first ? "" : ", ") << name << '_' << j << '=' << to_display_string(v);
    first = false;
  }
  return os.str();
}

inline std::string affine_string(const ExactRational& slope, const ExactRational& offset) {
  return to_display_string(slope) + " * 2^k " + (offset < 0 ? "- " : "+ ") + to_display_string(abs(offset));
}

inline std::string fit_text(const CoefficientFit& f, const TableComparison& cmp) {
  std::ostringstream os;
  const bool in_n = f.spec.variable == FitVariable::Pow2N;
  os << "i=" << f.spec.i << (in_n ? " k=" : " n=") << f.spec.fixed_param << " fit in " << to_string(f.spec.variable)
     << " (" << to_string(f.spec.form) << " form)\n";
  os << "  solved at " << (in_n ? "n=" : "k=");
  for (std::size_t t = 0; t < f.solved_points.size(); ++t) os << (t ? "," : "") << f.solved_points[t];
  os << '\n';
  if (!f.excluded_zero_points.empty()) {
    os << "  excluded (zero count) at ";
    for (std::size_t t = 0; t < f.excluded_zero_points.size(); ++t) os << (t ? "," : "") << f.excluded_zero_points[t];
    os << '\n';
  }
  if (in_n && f.spec.form == FitForm::Product) os << "  " << coeff_line("alpha", f.coefficients) << '\n';
  os << "  " << coeff_line(in_n ? "a" : "b", in_n ? f.power_coefficients() : f.coefficients) << '\n';
  for (const auto& h : f.holdouts)
    os << "  holdout " << h.point << ": observed " << h.observed.str() << ", predicted "
       << to_display_string(h.predicted) << (h.match ? " ok" : " MISMATCH") << '\n';
  os << "  verdict " << f.verdict() << ", " << cmp.status << '\n';
  if (cmp.status == "mismatch-vs-table") os << "  table " << coeff_line(in_n ? "a" : "b", cmp.table) << '\n';
  return os.str();
}

inline nlohmann::json fit_json(const CoefficientFit& f, const TableComparison& cmp) {
  auto j = fit_to_json(f);
  j["table_comparison"] = cmp.status;
  if (!cmp.table.empty()) j["table"] = rational_map_json(cmp.table);
  return j;
}

inline int fit_status(const CoefficientFit& f, const TableComparison& cmp) {
  return f.residual_consistent && cmp.status != "mismatch-vs-table" ? 0 : 1;
}

/// Default sample points in n for a fit at rank i: the lowest n with a nonzero
/// count, as many as the form has unknowns.
inline std::vector<int> default_samples_n(int i, FitForm form) {
  const int lo = (i + 1) / 2;
  std::vector<int> out;
  for (int t = 0; t < fit_unknowns(i, form); ++t) out.push_back(lo + t);
  return out;
}

inline std::vector<Sample> collect_samples_n(CensusSource& src, int i, int k, const std::vector<int>& ns) {
  std::vector<Sample> s;
  for (int n : ns) s.push_back({n, src.get(n, k).count(i)});
  return s;
}

inline int cmd_extract(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  if (!cfg.i) throw std::invalid_argument("--i is required");
  const int i = *cfg.i;
  const int modes = (cfg.fix_k ? 1 : 0) + (cfg.fix_n ? 1 : 0) + (cfg.affine_check ? 1 : 0);
  if (modes != 1) throw std::invalid_argument("give exactly one of --fix-k, --fix-n, --affine-check");
  CensusSource src(cfg);
  const bool json = cfg.format == "json";
  std::ostringstream os;
  nlohmann::json doc{{"i", i}};
  int status = 0;

  if (cfg.fix_k) {
    const FitForm form = cfg.form.empty() ? FitForm::Power : fit_form_from_string(cfg.form);
    const auto ns = cfg.samples_n.empty() ? default_samples_n(i, form) : parse_int_list(cfg.samples_n);
    const auto fit = fit_in_2n(i, *cfg.fix_k, collect_samples_n(src, i, *cfg.fix_k, ns), form);
    const auto cmp = compare_power_with_table(fit);
    status = fit_status(fit, cmp);
    doc["mode"] = "fix-k";
    doc["fit"] = fit_json(fit, cmp);
    os << fit_text(fit, cmp);
  } else if (cfg.fix_n) {
    if (!cfg.form.empty() && cfg.form != "power") throw std::invalid_argument("--fix-n fits only support the power form");
    if (cfg.samples_k.empty()) throw std::invalid_argument("--fix-n needs --samples-k");
    std::vector<Sample> samples;
    for (int k : parse_int_list(cfg.samples_k)) samples.push_back({k, src.get(*cfg.fix_n, k).count(i)});
    const auto fit = fit_in_2k(i, *cfg.fix_n, std::move(samples));
    const auto cmp = compare_dual_with_table(fit);
    status = fit_status(fit, cmp);
    doc["mode"] = "fix-n";
    doc["fit"] = fit_json(fit, cmp);
    os << fit_text(fit, cmp);
  } else {
    if (i < 2) throw std::invalid_argument("--affine-check needs i >= 2");
    if (cfg.ks.empty()) throw std::invalid_argument("--affine-check needs --ks");
    const FitForm form = cfg.form.empty() ? FitForm::Product : fit_form_from_string(cfg.form);
    const auto ns = cfg.samples_n.empty() ? default_samples_n(i, form) : parse_int_list(cfg.samples_n);
    std::vector<std::pair<int, ExactRational>> points;
    nlohmann::json fits = nlohmann::json::array();
    nlohmann::json skipped = nlohmann::json::array();
    for (int k : parse_int_list(cfg.ks)) {
      try {
        const auto fit = fit_in_2n(i, k, collect_samples_n(src, i, k, ns), form);
        const auto cmp = compare_power_with_table(fit);
        fits.push_back(fit_json(fit, cmp));
        os << fit_text(fit, cmp);
        if (!fit.residual_consistent) status = 1;
        points.emplace_back(k, fit.power_coefficients().at(i - 1));
      } catch (const BudgetExceeded& e) {
        skipped.push_back({{"k", k}, {"reason", e.what()}});
        os << "k=" << k << " skipped-budget: " << e.what() << '\n';
        err << "k=" << k << " skipped-budget: " << e.what() << '\n';
      }
    }
    doc["mode"] = "affine-check";
    doc["fits"] = fits;
    doc["skipped"] = skipped;
    if (points.size() < 3) {
      doc["affine"] = nullptr;
      doc["verdict"] = "not-covered";
      os << "affine check not covered: " << points.size() << " value(s) of k available, 3 needed\n";
      status = std::max(status, 2);
    } else {
      const auto check = verify_affine_in_2k(i, points);
      const auto closed = top_coefficient_affine(i);
      doc["affine"] = affine_to_json(check);
      doc["closed_form"] = {{"slope", to_display_string(closed.slope)},
                            {"offset", to_display_string(-closed.offset)}};
      os << "top coefficient a_" << i - 1 << " = " << affine_string(check.slope, check.offset) << " ("
         << check.verdict() << "; closed form " << affine_string(closed.slope, -closed.offset) << ")\n";
      if (check.verdict() != "match") status = std::max(status, 1);
    }
  }

  if (json) {
    doc["status"] = status;
    emit(cfg, doc.dump(2) + "\n", out);
  } else {
    emit(cfg, os.str(), out);
  }
  return status;
}

// ---- formulas -----------------------------------------------------------------------------

inline int cmd_formulas(const CliConfig& cfg, std::ostream& out) {
  emit(cfg, formula_catalog_json().dump(2) + "\n", out);
  return 0;
}

// ---- entry point ------------------------------------------------------------------------------

inline void add_census_options(CLI::App* sub, CliConfig& cfg) {
  sub->add_option("--threads", cfg.threads, "worker threads (default: available cores)")->check(CLI::PositiveNumber);
  sub->add_option("--budget", cfg.budget_bits, "largest census allowed, as log2 of rank evaluations")
      ->check(CLI::Range(1, 62));
  sub->add_option("--cache-dir", cfg.cache_dir,
                  std::string("census cache directory (env ") + kCacheEnvVar + ", default " + kDefaultCacheDir + ")");
  sub->add_flag("--no-cache", cfg.no_cache, "neither read nor write the census cache");
  sub->add_flag("--force", cfg.force, "recompute even if a cached census exists");
  sub->add_option("--method", cfg.method, "census method")
      ->check(CLI::IsMember({"auto", "exhaustive", "multiset-reduced"}));
  sub->add_option("--output,-o", cfg.output, "write output to this file instead of stdout");
}

/// Runs one command line. Exit status: 0 success, 1 mismatch, 2 failure or usage error.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CliConfig cfg;
  CLI::App app{"Rank census and closed-form verification for n-times persymmetric matrices over F2", "persym"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kEngineVersion);

  auto* census = app.add_subcommand("census", "count matrices of each rank");
  census->add_option("--n", cfg.n_list, "number of blocks, list or range")->required();
  census->add_option("--k", cfg.k_list, "number of columns, list or range")->required();
  census->add_option("--format", cfg.format)->check(CLI::IsMember({"table", "json", "csv"}));
  add_census_options(census, cfg);

  auto* verify = app.add_subcommand("verify", "check censuses and formulas against each other");
  verify->add_flag("--default-plan", cfg.default_plan, "verify the standard grid of small (n, k)");
  verify->add_option("--n", cfg.n_list, "number of blocks, list or range");
  verify->add_option("--k", cfg.k_list, "number of columns, list or range");
  verify->add_flag("--formulas-only", cfg.formulas_only, "formula identities only, no census");
  verify->add_flag("--no-fits", cfg.no_fits, "skip coefficient fits across censuses");
  verify->add_flag("--problems-only", cfg.problems_only, "table output lists only checks that are not a match");
  verify->add_flag("--timing", cfg.timing, "include timing in JSON output");
  verify->add_option("--format", cfg.format)->check(CLI::IsMember({"table", "json"}));
  add_census_options(verify, cfg);

  auto* extract = app.add_subcommand("extract", "recover coefficient polynomials from censuses");
  extract->add_option("--i", cfg.i, "rank")->required()->check(CLI::PositiveNumber);
  extract->add_option("--fix-k", cfg.fix_k, "fit in 2^n at this k");
  extract->add_option("--fix-n", cfg.fix_n, "fit in 2^k at this n");
  extract->add_option("--samples-n", cfg.samples_n, "sample points in n");
  extract->add_option("--samples-k", cfg.samples_k, "sample points in k");
  extract->add_flag("--affine-check", cfg.affine_check, "check the top coefficient is affine in 2^k");
  extract->add_option("--ks", cfg.ks, "values of k for --affine-check");
  extract->add_option("--form", cfg.form, "fit form")->check(CLI::IsMember({"power", "product"}));
  extract->add_option("--format", cfg.format)->check(CLI::IsMember({"table", "json"}));
  add_census_options(extract, cfg);

  auto* formulas = app.add_subcommand("formulas", "export the closed-form catalog as JSON");
  formulas->add_option("--output,-o", cfg.output, "write output to this file instead of stdout");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (census->parsed()) return cmd_census(cfg, out, err);
    if (verify->parsed()) return cmd_verify(cfg, out, err);
    if (extract->parsed()) return cmd_extract(cfg, out, err);
    if (formulas->parsed()) return cmd_formulas(cfg, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int t = 1; t < argc; ++t) args.emplace_back(argv[t]);
  return run_cli(std::move(args), out, err);
}

}  // namespace persym::cli
