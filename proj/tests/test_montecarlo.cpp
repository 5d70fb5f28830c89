#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "skellamk/montecarlo.hpp"
#include "skellamk/pmf_table.hpp"

namespace sk = skellamk;

namespace {

struct ThreadsGuard {
  explicit ThreadsGuard(const char* v) { setenv("SKELLAMK_THREADS", v, 1); }
  ~ThreadsGuard() { unsetenv("SKELLAMK_THREADS"); }
};

}  // namespace

TEST(MonteCarlo, ResultsDoNotDependOnThreadCount) {
  const sk::ProcessSpec specs[] = {sk::SPoK{3, 1.0, 0.5}, sk::SFPP{0.7, 1.0}, sk::TSFSP{}};
  for (const auto& spec : specs) {
    sk::EmpiricalDist one;
    {
      ThreadsGuard g("1");
      one = sk::estimate_pmf(spec, 1.0, 20000, 7);
    }
    for (const char* n : {"2", "3", "8"}) {
      ThreadsGuard g(n);
      EXPECT_EQ(sk::estimate_pmf(spec, 1.0, 20000, 7), one) << sk::family_name(spec) << " threads=" << n;
    }
  }
}

TEST(MonteCarlo, SeedsGiveDifferentSamples) {
  EXPECT_FALSE(sk::estimate_pmf(sk::Skellam{1.0, 1.0}, 1.0, 1000, 1) ==
               sk::estimate_pmf(sk::Skellam{1.0, 1.0}, 1.0, 1000, 2));
}

TEST(MonteCarlo, SkellamMatchesTable) {
  const sk::Skellam s{2.0, 1.0};
  const auto e = sk::estimate_pmf(s, 1.5, 200000, 11);
  const auto c = sk::compare(e, sk::pmf_table(s, 1.5));
  EXPECT_LT(c.tv_distance, 0.01);
  EXPECT_GT(c.chi2_pvalue, 1e-4);
}

TEST(MonteCarlo, SingleSample) {
  const auto e = sk::estimate_pmf(sk::PPoK{2, 1.0}, 1.0, 1, 5);
  EXPECT_EQ(e.n_samples, 1);
  ASSERT_EQ(e.counts.size(), 1u);
  EXPECT_EQ(e.counts.begin()->second, 1);
  EXPECT_THROW((void)sk::estimate_pmf(sk::PPoK{2, 1.0}, 1.0, 0, 5), sk::DomainError);
}

TEST(MonteCarlo, RejectsNonIntegerFamilies) {
  EXPECT_THROW((void)sk::estimate_pmf(sk::RunningAvgPPoK{2, 1.0}, 1.0, 10, 1), sk::UnsupportedFamily);
  EXPECT_THROW((void)sk::estimate_pmf(sk::Skellam{1.0, 1.0}, 0.0, 10, 1), sk::DomainError);
}

TEST(MonteCarlo, ChiSquarePValuesAreUniformUnderTheNull) {
  const auto table = sk::pmf_table(sk::SPoK{2, 1.0, 0.7}, 1.0);
  std::vector<double> p;
  for (std::uint64_t r = 0; r < 200; ++r) {
    p.push_back(sk::compare(sk::sample_from_table(table, 5000, 1000 + r), table).chi2_pvalue);
  }
  EXPECT_GT(sk::ks_uniform(p).pvalue, 0.01);
}

TEST(MonteCarlo, SpokFormsAgainstSimulation) {
  const sk::SPoK s{2, 1.0, 1.0};
  const auto e = sk::estimate_pmf(s, 0.5, 1000000, 99);
  const auto conv = sk::compare(e, sk::pmf_table(s, 0.5));
  sk::PmfOptions opt;
  opt.spok_form = sk::SpokForm::closed_form;
  const auto closed = sk::compare(e, sk::pmf_table(s, 0.5, opt));
  EXPECT_GT(conv.chi2_pvalue, 1e-4);
  EXPECT_LT(conv.tv_distance, 3e-3);
  EXPECT_LT(closed.chi2_pvalue, 1e-6);
  EXPECT_GT(closed.tv_distance, 0.05);
}

TEST(MonteCarlo, OverflowCellCountsOutsideMass) {
  sk::PmfOptions o;
  o.window = std::make_pair(std::int64_t{-2}, std::int64_t{2});
  const auto table = sk::pmf_table(sk::Skellam{1.0, 1.0}, 1.0, o);
  ASSERT_GT(table.truncation_bound, 1e-3);
  const auto e = sk::estimate_pmf(sk::Skellam{1.0, 1.0}, 1.0, 100000, 3);
  EXPECT_THROW((void)sk::compare(e, table), sk::CoverageError);
  o.window = std::make_pair(std::int64_t{-6}, std::int64_t{6});
  const auto narrow = sk::pmf_table(sk::Skellam{1.0, 1.0}, 1.0, o);
  ASSERT_LT(narrow.truncation_bound, 1e-3);
  ASSERT_GT(1.0 - narrow.total(), 0.0);
  const auto c = sk::compare(e, narrow);
  EXPECT_GT(c.chi2_pvalue, 1e-4);
  EXPECT_LT(c.tv_distance, 0.01);
  const auto full = sk::pmf_table(sk::Skellam{1.0, 1.0}, 1.0);
  EXPECT_LT(sk::compare(e, full).tv_distance, 0.01);
}

TEST(MonteCarlo, HeavyTailTablesAreRejected) {
  const auto table = sk::pmf_table(sk::SFPP{0.3, 1.0}, 1.0);
  ASSERT_GT(table.truncation_bound, 1e-3);
  const auto e = sk::estimate_pmf(sk::SFPP{0.3, 1.0}, 1.0, 1000, 3);
  EXPECT_THROW((void)sk::compare(e, table), sk::CoverageError);
}

TEST(MonteCarlo, SkellamTransitionFrequencies) {
  const double l1 = 1.5;
  const double l2 = 0.5;
  for (double d : {1e-2, 1e-3}) {
    const auto f = sk::estimate_transition(sk::Skellam{l1, l2}, 3.0, d, 1000000, 17);
    const double c = 2.0 * (l1 + l2) * (l1 + l2);
    EXPECT_LE(std::abs(f.at(1).frequency - l1 * d), c * d * d + 4.0 * f.at(1).standard_error) << d;
    EXPECT_LE(std::abs(f.at(-1).frequency - l2 * d), c * d * d + 4.0 * f.at(-1).standard_error) << d;
    double big = 0.0;
    for (const auto& [x, q] : f) {
      if (std::abs(x) >= 2) big += q.frequency;
    }
    EXPECT_LE(big, c * d * d + 4.0 * std::sqrt(c * d * d / 1e6)) << d;
  }
}

TEST(MonteCarlo, SpokTransitionFrequencies) {
  const int k = 3;
  const double l1 = 1.0;
  const double l2 = 0.5;
  const double d = 1e-3;
  const auto f = sk::estimate_transition(sk::SPoK{k, l1, l2}, 0.0, d, 1000000, 23);
  const double c = 2.0 * k * k * (l1 + l2) * (l1 + l2);
  for (int i = 1; i <= k; ++i) {
    EXPECT_LE(std::abs(f.at(i).frequency - l1 * d), c * d * d + 4.0 * f.at(i).standard_error) << i;
    EXPECT_LE(std::abs(f.at(-i).frequency - l2 * d), c * d * d + 4.0 * f.at(-i).standard_error) << i;
  }
  EXPECT_LE(std::abs(f.at(0).frequency - (1.0 - k * (l1 + l2) * d)), c * d * d + 4.0 * f.at(0).standard_error);
  EXPECT_THROW((void)sk::estimate_transition(sk::PPoK{2, 1.0}, 0.0, d, 10, 1), sk::UnsupportedFamily);
}

TEST(MonteCarlo, StandardErrorsScaleWithSampleSize) {
  const auto a = sk::estimate_moments(sk::PPoK{3, 1.0}, 2.0, 10000, 5);
  const auto b = sk::estimate_moments(sk::PPoK{3, 1.0}, 2.0, 1000000, 5);
  EXPECT_NEAR(a.mean_se / b.mean_se, 10.0, 0.5);
  EXPECT_NEAR(b.mean_se, std::sqrt(28.0 / 1e6), 0.05 * std::sqrt(28.0 / 1e6));
  EXPECT_NEAR(b.mean, 12.0, 4.0 * b.mean_se);
  EXPECT_NEAR(b.variance, 28.0, 4.0 * b.variance_se);
}

TEST(MonteCarlo, KolmogorovSmirnov) {
  std::vector<double> u;
  for (int i = 0; i < 1000; ++i) u.push_back((i + 0.5) / 1000.0);
  EXPECT_GT(sk::ks_uniform(u).pvalue, 0.99);
  std::vector<double> v;
  for (int i = 0; i < 1000; ++i) v.push_back(std::pow((i + 0.5) / 1000.0, 2.0));
  EXPECT_LT(sk::ks_uniform(v).pvalue, 1e-6);
  EXPECT_NEAR(sk::kolmogorov_q(1.36), 0.0494, 5e-4);
  const auto same = sk::ks_two_sample(u, u);
  EXPECT_EQ(same.statistic, 0.0);
  EXPECT_LT(sk::ks_two_sample(u, v).pvalue, 1e-6);
}
