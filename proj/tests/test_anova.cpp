#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <set>

#include "ccx/anova.hpp"
#include "ccx/error.hpp"
#include "ccx/market.hpp"
#include "test_support.hpp"

using namespace ccx;

namespace {

const Scenario& scenario(const char* name) {
  static std::map<std::string, Scenario> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, make_case(default_data_dir(), name)).first;
  return it->second;
}

long binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

long multiplicity_of(const std::vector<PlanTerm>& terms, const IndexList& f) {
  for (const auto& t : terms)
    if (t.factors == f) return t.multiplicity;
  return 0;
}

DecompositionConfig small_config(int m1 = 20, int steps = 100) {
  DecompositionConfig c;
  c.grid.m1 = m1;
  c.solver.steps = steps;
  c.threads = 1;
  return c;
}

}  // namespace

TEST(Plan, ThreeFactorsSecondOrderTelescopesToFullTerm) {
  auto terms = enumerate_plan(3, {0}, 2).terms();
  ASSERT_EQ(terms.size(), 1u);
  EXPECT_EQ(terms[0].factors, (IndexList{0, 1, 2}));
  EXPECT_EQ(terms[0].multiplicity, 1);
}

TEST(Plan, SevenFactorsFirstOrder) {
  auto terms = enumerate_plan(7, {0}, 1).terms();
  ASSERT_EQ(terms.size(), 7u);
  EXPECT_EQ(multiplicity_of(terms, {0}), -5);
  for (int j = 1; j < 7; ++j) EXPECT_EQ(multiplicity_of(terms, {0, j}), 1);
}

// Inclusion-exclusion gives C(n-|v|-1, s-|v|) (-1)^{s-|v|} for n = d - r free factors: (10, -4, 1) for d = 7, s = 2.
TEST(Plan, SevenFactorsSecondOrder) {
  auto terms = enumerate_plan(7, {0}, 2).terms();
  int three = 0, two = 0;
  for (const auto& t : terms) {
    if (t.factors.size() == 3) {
      ++three;
      EXPECT_EQ(t.multiplicity, 1);
    }
    if (t.factors.size() == 2) {
      ++two;
      EXPECT_EQ(t.multiplicity, -4);
    }
  }
  EXPECT_EQ(three, 15);
  EXPECT_EQ(two, 6);
  EXPECT_EQ(multiplicity_of(terms, {0}), 10);
}

TEST(Plan, MultiplicitiesSumToOneAndMatchClosedForm) {
  for (int d = 1; d <= 10; ++d)
    for (int r = 0; r <= d; ++r)
      for (int s = 0; r + s <= d; ++s) {
        IndexList base;
        for (int b = 0; b < r; ++b) base.push_back(d - 1 - b);  // any base ordering
        auto terms = enumerate_plan(d, base, s).terms();
        long sum = 0;
        const int n = d - r;
        for (const auto& t : terms) {
          sum += t.multiplicity;
          int v = static_cast<int>(t.factors.size()) - r;
          long expected = binomial(n - v - 1, s - v) * ((s - v) % 2 ? -1 : 1);
          if (n == v) expected = 1;
          EXPECT_EQ(t.multiplicity, expected) << d << r << s;
          for (int b = 0; b < r; ++b) EXPECT_EQ(t.factors[b], base[b]);
        }
        EXPECT_EQ(sum, 1) << "d=" << d << " r=" << r << " s=" << s;
      }
}

TEST(Plan, RejectsOrderBeyondDimension) {
  EXPECT_THROW(enumerate_plan(3, {0}, 3), InvalidArgument);
  EXPECT_THROW(enumerate_plan(3, {0, 0}, 1), InvalidArgument);
  EXPECT_THROW(make_index_set({1, 1}), InvalidArgument);
}

TEST(Pruning, CaseBKeepsEightThreeDimensionalSurpluses) {
  const auto& sc = scenario("B");
  auto plan = enumerate_plan(7, {0}, 2);
  prune_vanishing(plan, *sc.portfolio);
  std::set<std::string> kept;
  int two = 0;
  for (const auto& sp : plan.surpluses()) {
    if (sp.w.size() == 1) {
      EXPECT_FALSE(sp.pruned);
      ++two;
    }
    if (sp.w.size() == 2 && !sp.pruned) kept.insert(term_name(*sc.system, plan.term_factors(sp.w)));
  }
  EXPECT_EQ(two, 6);
  std::set<std::string> expected{"BSBSBS EU-EG-EJ", "BSBSHW EU-EG-RE", "BSBSHW EU-EJ-RE", "BSBSHW EU-EG-RU",
                                 "BSBSHW EU-EG-RG", "BSBSHW EU-EJ-RU", "BSBSHW EU-EJ-RJ", "BSHWHW EU-RE-RU"};
  EXPECT_EQ(kept, expected);
}

TEST(Pruning, NothingPrunedForCaseAOrWhenAllFactorsAreValueFactors) {
  const auto& a = scenario("A");
  auto plan = enumerate_plan(3, {0}, 2);
  prune_vanishing(plan, *a.portfolio);
  for (const auto& sp : plan.surpluses()) EXPECT_FALSE(sp.pruned);

  const auto& sys = *scenario("B").system;
  std::vector<Instrument> opts;
  for (int p = 0; p < 3; ++p) opts.push_back(FxOptionContract{p, 1.0, 2.0, 100.0});
  Portfolio all(sys, opts);
  auto plan7 = enumerate_plan(7, {0}, 2);
  prune_vanishing(plan7, all);
  for (const auto& sp : plan7.surpluses()) EXPECT_FALSE(sp.pruned) << term_name(sys, plan7.term_factors(sp.w));
}

TEST(Plan, ExplainListsTermsAndReasons) {
  const auto& sc = scenario("B");
  auto plan = enumerate_plan(7, {0}, 2);
  prune_vanishing(plan, *sc.portfolio);
  auto text = explain_plan(plan, *sc.system);
  EXPECT_NE(text.find("surpluses of dimension 2: 6 kept, 0 pruned"), std::string::npos) << text;
  EXPECT_NE(text.find("surpluses of dimension 3: 8 kept, 7 pruned"), std::string::npos) << text;
  EXPECT_NE(text.find("BSHWHW EU-RE-RU"), std::string::npos);
  EXPECT_EQ(term_name(*sc.system, {}), "ANCHOR");
}

TEST(EvaluateTerm, EmptySetIsDeterministicAlongAnchor) {
  const auto& sc = scenario("B");
  const auto& sys = *sc.system;
  auto dates = exposure_dates(5.0, 10);
  auto r = evaluate_term(sys, *sc.portfolio, {}, dates, small_config());
  for (size_t i = 0; i < dates.size(); ++i) {
    std::vector<double> xs(7);
    sys.anchor().state(dates[i], xs);
    double v = sc.portfolio->value(xs.data(), dates[i]);
    EXPECT_NEAR(r.ee[i], v, 1e-12 * std::max(1.0, std::abs(v)));
    EXPECT_NEAR(r.epe[i], std::max(v, 0.0), 1e-12 * std::max(1.0, std::abs(v)));
    EXPECT_NEAR(r.mass[i], 1.0, 1e-15);
  }
}

TEST(EvaluateTerm, CaseAOneDimensionalEEDecreases) {
  const auto& sc = scenario("A");
  auto dates = exposure_dates(5.0, 20);
  auto r = evaluate_term(*sc.system, *sc.portfolio, {0}, dates, small_config(40, 200));
  for (size_t i = 2; i + 1 < dates.size(); ++i) EXPECT_LT(r.ee[i], r.ee[i - 1]) << dates[i];
  for (size_t i = 1; i + 1 < dates.size(); ++i) EXPECT_GT(r.epe[i], 0.0);
}

// IRS value depends on R^d only, so the term with R^d stochastic is exact against the Gaussian short-rate law
// up to solver error. EE is limited by the time and space error of the mean; EPE by the second-order nodal
// quadrature error at the kink of max(V, 0) on the secondary rate axis (m1/2 nodes).
TEST(EvaluateTerm, IrsExposureIsExactWhenDomesticRateIsStochastic) {
  const auto& sys = *scenario("B").system;
  ZcbFormula zcb(sys.curve(1), sys.hull_white(1));
  IrsContract s{0.0, 150.0, 5.0, 100};
  s.fixed_rate = atm_swap_rate(sys.curve(1), s) + 0.002;
  Portfolio pf(sys, {s});
  auto dates = exposure_dates(5.0, 10);
  auto r = evaluate_term(sys, pf, {0, 1}, dates, small_config(120, 250));
  const auto& hw = sys.hull_white(1);
  for (size_t i = 1; i + 1 < dates.size(); ++i) {
    double t = dates[i];
    double mean = sys.anchor().value(1, t);
    double sd = hw.eta * std::sqrt((1 - std::exp(-2 * hw.lambda * t)) / (2 * hw.lambda));
    // Gauss-Hermite-free oracle: fine trapezoid in z
    double ee = 0.0, epe = 0.0;
    const double dz = 0.01;
    for (double z = -8; z <= 8; z += dz) {
      double phi = std::exp(-0.5 * z * z) / std::sqrt(2 * std::numbers::pi) * dz;
      double v = irs_value(s, zcb, mean + sd * z, t);
      ee += phi * v;
      epe += phi * std::max(v, 0.0);
    }
    EXPECT_NEAR(r.ee[i], ee, 1e-3) << t;
    EXPECT_NEAR(r.epe[i], epe, 2.5e-2 * epe) << t;
  }
}

TEST(Assemble, EqualTermsReproduceThatProfile) {
  auto terms = enumerate_plan(5, {0}, 2).terms();
  std::vector<TermResult> res(terms.size());
  for (auto& r : res) {
    r.times = {0.0, 1.0};
    r.ee = {1.5, -2.0};
    r.epe = {1.5, 0.5};
    r.ene = {0.0, -2.5};
  }
  auto p = assemble_profile(terms, res, "test");
  EXPECT_NEAR(p.ee[0], 1.5, 1e-12);
  EXPECT_NEAR(p.ee[1], -2.0, 1e-12);
  EXPECT_NEAR(p.epe[1], 0.5, 1e-12);
  EXPECT_NO_THROW(p.validate());
}

TEST(Assemble, CaseATelescopedPlanEqualsDirectSolve) {
  const auto& sc = scenario("A");
  auto dates = exposure_dates(5.0, 10);
  auto cfg = small_config(20, 50);
  auto plan = enumerate_plan(3, {0}, 2);
  auto run = run_decomposition(*sc.system, *sc.portfolio, plan.terms(), dates, cfg);
  auto direct = evaluate_term(*sc.system, *sc.portfolio, {0, 1, 2}, dates, cfg);
  for (size_t i = 0; i < dates.size(); ++i) {
    EXPECT_NEAR(run.profile.ee[i], direct.ee[i], 1e-12 * std::max(1.0, std::abs(direct.ee[i])));
    EXPECT_NEAR(run.profile.epe[i], direct.epe[i], 1e-12 * std::max(1.0, std::abs(direct.epe[i])));
  }
  run.profile.validate();
}

TEST(Assemble, PrunedSurplusIsStructurallyZero) {
  const auto& sc = scenario("B");
  auto plan = enumerate_plan(7, {0}, 2);
  prune_vanishing(plan, *sc.portfolio);
  auto dates = exposure_dates(5.0, 10);
  auto cfg = small_config(20, 50);
  IndexSet w{4, 6};  // RG, RJ
  auto it = std::find_if(plan.surpluses().begin(), plan.surpluses().end(), [&](auto& s) { return s.w == w; });
  ASSERT_TRUE(it != plan.surpluses().end() && it->pruned);
  auto terms = plan.expand(w);
  auto run = run_decomposition(*sc.system, *sc.portfolio, terms, dates, cfg);
  auto base = evaluate_term(*sc.system, *sc.portfolio, {0}, dates, cfg);
  for (size_t i = 0; i < dates.size(); ++i) {
    EXPECT_LE(std::abs(run.profile.ee[i]), 1e-8 * std::max(1.0, std::abs(base.ee[i])));
    EXPECT_LE(std::abs(run.profile.epe[i]), 1e-8 * std::max(1.0, std::abs(base.epe[i])));
  }
}

TEST(Profile, IdentitiesAndIo) {
  ExposureProfile p{"x", {0, 1}, {1, -1}, {1, 0.5}, {0, -1.5}, {}, {}};
  EXPECT_NO_THROW(p.validate());
  auto bad = p;
  bad.epe[1] = -0.1;
  bad.ene[1] = -0.9;
  EXPECT_THROW(bad.validate(), NumericalError);
  auto path = (std::filesystem::temp_directory_path() / "ccx_profile_test.csv").string();
  p.se_ee = {0.0, 0.1};
  p.se_epe = {0.0, 0.05};
  write_profile(path, p);
  auto q = read_profile(path);
  EXPECT_EQ(q.times, p.times);
  EXPECT_EQ(q.ee, p.ee);
  EXPECT_EQ(q.se_epe, p.se_epe);
  EXPECT_EQ(q.source, "x");
}
