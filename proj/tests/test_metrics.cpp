#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "ccx/error.hpp"
#include "ccx/market.hpp"
#include "ccx/metrics.hpp"

using namespace ccx;

namespace {

std::vector<double> ramp(int n, double a, double b) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + b * i;
  return v;
}

ExposureProfile profile_of(std::vector<double> ee, std::vector<double> epe) {
  ExposureProfile p;
  p.times = exposure_dates(5.0, static_cast<int>(ee.size()) - 1);
  p.ee = std::move(ee);
  p.epe = std::move(epe);
  for (size_t i = 0; i < p.ee.size(); ++i) p.ene.push_back(p.ee[i] - p.epe[i]);
  return p;
}

}  // namespace

TEST(Metrics, IdenticalProfilesGiveZero) {
  auto r = ramp(11, 3.0, -0.2);
  auto t = exposure_dates(5.0, 10);
  EXPECT_EQ(e_l2(r, r), 0.0);
  EXPECT_EQ(e_linf(r, r), 0.0);
  EXPECT_EQ(mean_difference(r, r, t, 100.0), 0.0);
  EXPECT_EQ(se_profile(std::vector<double>(11, 0.0), r), 0.0);
}

TEST(Metrics, Homogeneity) {
  auto r = ramp(21, 2.0, 0.3);
  std::vector<double> c(r);
  for (auto& x : c) x *= 1.01;
  EXPECT_NEAR(e_l2(c, r), 1.0, 1e-12);
  EXPECT_NEAR(e_linf(c, r), 1.0, 1e-12);
  std::vector<double> se(r);
  for (auto& x : se) x *= 0.004;
  EXPECT_NEAR(se_profile(se, r), 0.4, 1e-12);
}

TEST(Metrics, SpikeAndArithmeticExamples) {
  auto r = ramp(11, 10.0, -0.5);  // max |r| = 10
  auto c = r;
  c[4] += 0.2;
  EXPECT_NEAR(e_linf(c, r), 2.0, 1e-12);
  auto t = exposure_dates(5.0, 100);
  std::vector<double> a(101, 5.0), b(101, 6.0);
  EXPECT_NEAR(mean_difference(b, a, t, 350.0), 1e4 / 350.0, 1e-9);
}

TEST(Metrics, ScaleInvarianceAndNotionalScaling) {
  std::mt19937_64 g(3);
  std::normal_distribution<double> n;
  std::vector<double> r(31), c(31);
  for (int i = 0; i < 31; ++i) r[i] = 5 + n(g), c[i] = r[i] + 0.1 * n(g);
  auto t = exposure_dates(5.0, 30);
  std::vector<double> r2(r), c2(c);
  for (int i = 0; i < 31; ++i) r2[i] *= 7.5, c2[i] *= 7.5;
  EXPECT_NEAR(e_l2(c2, r2), e_l2(c, r), 1e-10);
  EXPECT_NEAR(e_linf(c2, r2), e_linf(c, r), 1e-10);
  EXPECT_NEAR(mean_difference(c, r, t, 200.0), 0.5 * mean_difference(c, r, t, 100.0), 1e-12);
  EXPECT_GT(e_l2(c, r), 0.0);
  EXPECT_GT(e_linf(c, r), 0.0);
  EXPECT_GT(mean_difference(c, r, t, 100.0), 0.0);
}

TEST(Metrics, StandardErrorScalesWithPathCount) {
  // SE of a mean halves when paths quadruple; the normalised SE follows
  auto r = ramp(11, 4.0, 0.1);
  std::vector<double> se1(11), se4(11);
  for (int i = 0; i < 11; ++i) se1[i] = 0.8 / std::sqrt(1e4), se4[i] = 0.8 / std::sqrt(4e4);
  EXPECT_NEAR(se_profile(se1, r) / se_profile(se4, r), 2.0, 1e-12);
}

TEST(Metrics, RejectsBadInput) {
  std::vector<double> a{1, 2, 3}, b{1, 2};
  EXPECT_THROW(e_l2(a, b), InvalidArgument);
  EXPECT_THROW(e_l2({1.0}, {0.0}), InvalidArgument);
  EXPECT_THROW(mean_difference(a, a, {0, 1, 2}, 0.0), InvalidArgument);
  EXPECT_THROW(se_profile({-1.0, 0.0, 0.0}, a), InvalidArgument);
}

TEST(Metrics, CompareProfilesRowsAndReport) {
  auto ref = profile_of(ramp(11, 10, -1), ramp(11, 12, -1));
  auto cand = profile_of(ramp(11, 10.1, -1), ramp(11, 12, -1));
  cand.se_ee.assign(11, 0.05);
  cand.se_epe.assign(11, 0.0);
  auto rows = compare_profiles(cand, ref, 350.0, "A", "mc");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].measure, "EE");
  EXPECT_NEAR(rows[0].md_bp, 1e4 * 0.1 / 350.0, 1e-9);
  EXPECT_GT(rows[0].se, 0.0);
  EXPECT_EQ(rows[1].e_l2, 0.0);
  EXPECT_EQ(rows[1].se, 0.0);
  auto self = compare_profiles(ref, ref, 350.0, "A", "pde");
  EXPECT_EQ(self[0].e_l2, 0.0);
  EXPECT_TRUE(std::isnan(self[0].se));

  auto shifted = ref;
  shifted.times[3] += 1e-6;
  EXPECT_THROW(compare_profiles(shifted, ref, 350.0, "A", "x"), InvalidArgument);

  auto path = (std::filesystem::temp_directory_path() / "ccx_errors_test.csv").string();
  write_error_report(path, rows, 350.0);
  std::ifstream in(path);
  std::string l1, l2, l3;
  std::getline(in, l1);
  std::getline(in, l2);
  std::getline(in, l3);
  EXPECT_EQ(l1, "# ccx error report v1");
  EXPECT_EQ(l2, "# N_total: 350");
  EXPECT_EQ(l3, "case,method,measure,e_l2_pct,e_linf_pct,md_bp,se_pct");
  std::filesystem::remove(path);
}

TEST(Metrics, NotionalTotalsOfThePresetCases) {
  const double expect[] = {100.0, 250.0, 400.0, 500.0};
  const char* names[] = {"A", "B", "C", "D"};
  for (int i = 0; i < 4; ++i) {
    auto sc = make_case(default_data_dir(), names[i]);
    EXPECT_DOUBLE_EQ(sc.portfolio->total_notional(), expect[i]) << names[i];
  }
}
