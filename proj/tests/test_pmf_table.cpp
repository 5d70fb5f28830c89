#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "skellamk/analytic.hpp"

namespace sk = skellamk;

namespace {

/// Twelve or more parameter points per family.
std::vector<sk::ProcessSpec> grid() {
  std::vector<sk::ProcessSpec> g;
  for (double l1 : {0.5, 1.0, 3.0}) {
    for (double l2 : {0.0, 0.5, 1.0, 2.0}) g.push_back(sk::Skellam{l1, l2});
  }
  for (int k : {1, 2, 3, 5}) {
    for (double l : {0.3, 1.0, 4.0}) g.push_back(sk::PPoK{k, l});
  }
  for (int k : {1, 2, 4}) {
    for (double l1 : {0.5, 2.0}) {
      for (double l2 : {0.0, 1.0}) g.push_back(sk::SPoK{k, l1, l2});
    }
  }
  for (double a : {0.4, 0.6, 0.8, 0.95, 1.0}) {
    for (double l : {0.5, 1.0, 2.0}) g.push_back(sk::SFPP{a, l});
  }
  for (double a : {0.3, 0.5, 0.8}) {
    for (double mu : {0.5, 1.0, 3.0}) {
      for (double l : {1.0, 2.0}) g.push_back(sk::TSFPP{a, mu, l});
    }
  }
  for (double a1 : {0.7, 0.9, 1.0}) {
    for (double a2 : {0.8, 1.0}) {
      for (double l : {0.5, 1.0}) g.push_back(sk::SFSP{a1, a2, l, 1.0});
    }
  }
  for (double a1 : {0.4, 0.8}) {
    for (double mu2 : {0.5, 2.0}) {
      for (double l2 : {0.5, 1.5}) g.push_back(sk::TSFSP{a1, 1.0, 0.6, mu2, 1.0, l2});
    }
  }
  for (const sk::SubordinatorSpec& sub :
       {sk::SubordinatorSpec{sk::GammaSubordinator{1.0, 1.0}}, sk::SubordinatorSpec{sk::GammaSubordinator{3.0, 2.0}},
        sk::SubordinatorSpec{sk::TemperedStableSubordinator{0.5, 1.0}},
        sk::SubordinatorSpec{sk::InverseGaussianSubordinator{1.0, 1.0}}}) {
    for (int k : {1, 2, 3}) g.push_back(sk::TimeChangedSPoK{k, 1.0, 0.5, sub});
  }
  return g;
}

}  // namespace

TEST(PmfTable, NormalizationOnParameterGrid) {
  for (const auto& spec : grid()) {
    for (double t : {0.5, 2.0}) {
      const auto table = sk::pmf_table(spec, t);
      EXPECT_NEAR(table.total(), 1.0, table.truncation_bound + 1e-9) << sk::family_name(spec) << " t=" << t;
      EXPECT_LE(table.total(), 1.0 + 1e-9);
      for (double p : table.probs) ASSERT_GE(p, 0.0);
    }
  }
}

TEST(PmfTable, LightTailedTablesReachTolerance) {
  for (const sk::ProcessSpec& spec : {sk::ProcessSpec{sk::Skellam{2.0, 1.0}}, sk::ProcessSpec{sk::PPoK{3, 1.0}},
                                      sk::ProcessSpec{sk::SPoK{2, 1.0, 0.5}}, sk::ProcessSpec{sk::TSFPP{0.5, 1.0, 2.0}},
                                      sk::ProcessSpec{sk::TSFSP{0.6, 1.0, 0.7, 2.0, 1.0, 1.5}}}) {
    const auto table = sk::pmf_table(spec, 1.0);
    EXPECT_LT(table.truncation_bound, 1e-12) << sk::family_name(spec);
    EXPECT_NEAR(table.total(), 1.0, 1e-11) << sk::family_name(spec);
  }
}

TEST(PmfTable, HeavyTailedTablesCarryHonestBounds) {
  const auto table = sk::pmf_table(sk::SFPP{0.6, 1.0}, 1.0);
  EXPECT_EQ(table.m_hi, std::int64_t{1} << 16);
  EXPECT_GT(table.truncation_bound, 1e-6);
  EXPECT_GE(table.truncation_bound, 1.0 - table.total());
}

TEST(PmfTable, SfspNormalizationOnFixedWindow) {
  sk::PmfOptions opt;
  opt.window = std::make_pair(std::int64_t{-60}, std::int64_t{60});
  const auto table = sk::pmf_table(sk::SFSP{0.8, 0.9, 1.0, 1.0}, 1.0, opt);
  EXPECT_NEAR(table.total() + table.truncation_bound, 1.0, table.truncation_bound + 1e-9);
  EXPECT_LT(table.truncation_bound, 0.1);
}

TEST(PmfTable, EntriesMatchPointFunctions) {
  const auto s = sk::pmf_table(sk::Skellam{1.0, 2.0}, 1.5);
  for (std::int64_t m = s.m_lo; m <= s.m_hi; m += 3) EXPECT_NEAR(s.at(m), sk::skellam_pmf(1.0, 2.0, 1.5, m), 1e-15);
  const auto p = sk::pmf_table(sk::SPoK{3, 1.0, 0.5}, 1.0);
  for (std::int64_t m = -10; m <= 20; ++m) {
    EXPECT_NEAR(p.at(m), sk::spok_pmf_conv(3, 1.0, 0.5, 1.0, m, 1e-16), 1e-14);
  }
  const auto f = sk::pmf_table(sk::TSFPP{0.5, 0.5, 1.0}, 1.0);
  for (std::int64_t n = 0; n <= 10; ++n) EXPECT_NEAR(f.at(n), sk::tsfpp_pmf(0.5, 0.5, 1.0, 1.0, n), 1e-13);
  const auto c = sk::pmf_table(sk::TimeChangedSPoK{2, 1.0, 1.0, sk::GammaSubordinator{1.0, 1.0}}, 1.0);
  EXPECT_NEAR(c.at(0), 1.0 / 3.0, 1e-12);
}

TEST(PmfTable, ClosedFormOption) {
  sk::PmfOptions opt;
  opt.spok_form = sk::SpokForm::closed_form;
  const auto table = sk::pmf_table(sk::SPoK{2, 1.0, 1.0}, 0.01, opt);
  EXPECT_EQ(table.form, "closed_form");
  EXPECT_NEAR(table.at(1), 1.92196e-2, 1e-7);
  const auto conv = sk::pmf_table(sk::SPoK{2, 1.0, 1.0}, 0.01);
  EXPECT_EQ(conv.form, "default");
  EXPECT_NEAR(conv.at(1), 9.70e-3, 1e-5);
  EXPECT_EQ(sk::pmf_table(sk::TimeChangedSPoK{2, 1.0, 1.0, sk::GammaSubordinator{}}, 1.0).form, "closed_form");
  EXPECT_EQ(sk::pmf_table(sk::TimeChangedSPoK{1, 1.0, 1.0, sk::GammaSubordinator{}}, 1.0).form, "default");
}

TEST(PmfTable, SupportQueries) {
  const auto p = sk::pmf_table(sk::PPoK{2, 1.0}, 1.0);
  EXPECT_TRUE(p.covers(-5));
  EXPECT_EQ(p.at(-5), 0.0);
  EXPECT_THROW((void)p.at(p.m_hi + 1), sk::SupportError);
  const auto s = sk::pmf_table(sk::Skellam{1.0, 1.0}, 1.0);
  EXPECT_FALSE(s.covers(s.m_lo - 1));
  EXPECT_THROW((void)s.at(s.m_lo - 1), sk::SupportError);
}

TEST(PmfTable, RejectsBadInput) {
  EXPECT_THROW(sk::pmf_table(sk::RunningAvgPPoK{1, 1.0}, 1.0), sk::UnsupportedFamily);
  EXPECT_THROW(sk::pmf_table(sk::Skellam{1.0, 1.0}, -1.0), sk::DomainError);
  sk::PmfOptions opt;
  opt.window = std::make_pair(std::int64_t{3}, std::int64_t{1});
  EXPECT_THROW(sk::pmf_table(sk::Skellam{1.0, 1.0}, 1.0, opt), sk::DomainError);
  EXPECT_THROW(sk::pmf_table(sk::TimeChangedSPoK{1, 1.0, 1.0, sk::StableSubordinator{0.5}}, 1.0),
               sk::UnsupportedFamily);
}

TEST(PmfTable, InitialConditionConcentratesAtZero) {
  for (const sk::ProcessSpec& spec :
       {sk::ProcessSpec{sk::Skellam{1.0, 1.0}}, sk::ProcessSpec{sk::PPoK{3, 1.0}}, sk::ProcessSpec{sk::SPoK{2, 1.0, 1.0}},
        sk::ProcessSpec{sk::SFPP{0.5, 1.0}}, sk::ProcessSpec{sk::TSFPP{0.5, 1.0, 1.0}},
        sk::ProcessSpec{sk::SFSP{0.7, 0.8, 1.0, 1.0}}, sk::ProcessSpec{sk::TSFSP{}}}) {
    const auto table = sk::pmf_table(spec, 1e-8);
    EXPECT_GE(table.at(0), 1.0 - 1e-6) << sk::family_name(spec);
  }
}
