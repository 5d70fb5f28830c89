#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "skellamk/governing.hpp"

namespace sk = skellamk;

namespace {

sk::PmfTable table_from(std::int64_t lo, std::vector<double> probs) {
  sk::PmfTable t;
  t.spec = sk::Skellam{1.0, 1.0};
  t.t = 1.0;
  t.m_lo = lo;
  t.m_hi = lo + static_cast<std::int64_t>(probs.size()) - 1;
  t.probs = std::move(probs);
  return t;
}

}  // namespace

TEST(FracDiff, UnitOrderIsFirstDifference) {
  const auto p = sk::pmf_table(sk::Skellam{1.0, 0.5}, 1.0);
  sk::FracDiffSpec op;
  op.order = 1.0;
  op.truncation = 5;
  for (std::int64_t m = -5; m <= 5; ++m) {
    const auto r = sk::frac_diff(op, p, m);
    EXPECT_NEAR(r.value, p.at(m) - p.at(m - 1), 1e-16);
    EXPECT_EQ(r.truncation_bound, 0.0);
  }
}

TEST(FracDiff, HalfOrderOnPointMass) {
  std::vector<double> probs(21, 0.0);
  probs[12] = 1.0;  // delta at m = 2 on [-10, 10]
  const auto p = table_from(-10, probs);
  sk::FracDiffSpec op;
  op.order = 0.5;
  op.truncation = 4;
  // (1 - B)^(1/2) delta_2 at m = 4 is binom(1/2, 2) = -1/8.
  EXPECT_NEAR(sk::frac_diff(op, p, 4).value, -0.125, 1e-16);
  EXPECT_NEAR(sk::frac_diff(op, p, 2).value, 1.0, 1e-16);
  EXPECT_NEAR(sk::frac_diff(op, p, 3).value, -0.5, 1e-16);
  op.direction = sk::ShiftDirection::forward;
  EXPECT_NEAR(sk::frac_diff(op, p, 0).value, -0.125, 1e-16);
  EXPECT_EQ(sk::frac_diff(op, p, 3).value, 0.0);
}

TEST(FracDiff, AnnihilatesConstantsInTheLimit) {
  const auto p = table_from(-5, std::vector<double>(2000, 1e-3));
  sk::FracDiffSpec op;
  op.order = 0.5;
  op.direction = sk::ShiftDirection::forward;
  double prev = 1.0;
  for (int n : {10, 100, 1000}) {
    op.truncation = n;
    const double v = std::abs(sk::frac_diff(op, p, 0).value);
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_LT(prev, 2e-5);
  op.order = 1.0;
  op.truncation = 3;
  EXPECT_NEAR(sk::frac_diff(op, p, 0).value, 0.0, 1e-18);
}

TEST(FracDiff, BoundCoversOmittedTerms) {
  const auto p = sk::pmf_table(sk::SFPP{0.6, 1.0}, 1.0);
  sk::FracDiffSpec op;
  op.order = 0.6;
  for (int n : {5, 20, 80}) {
    op.truncation = n;
    const auto a = sk::frac_diff(op, p, 100);
    op.truncation = 100;
    const auto full = sk::frac_diff(op, p, 100);
    op.truncation = n;
    EXPECT_LE(std::abs(a.value - full.value), a.truncation_bound + 1e-17) << n;
  }
}

TEST(FracDiff, RejectsBadInput) {
  const auto p = sk::pmf_table(sk::Skellam{1.0, 1.0}, 1.0);
  sk::FracDiffSpec op;
  op.order = 1.5;
  EXPECT_THROW((void)sk::frac_diff(op, p, 0), sk::DomainError);
  op.order = 0.5;
  op.truncation = 0;
  EXPECT_THROW((void)sk::frac_diff(op, p, 0), sk::DomainError);
  op.truncation = 10000;
  EXPECT_THROW((void)sk::frac_diff(op, p, 0), sk::SupportError);
}

TEST(Governing, LightFamilies) {
  const std::pair<std::int64_t, std::int64_t> w{-10, 10};
  EXPECT_LT(sk::governing_residual(sk::Skellam{1.0, 0.7}, 1.3, w), 1e-6);
  EXPECT_LT(sk::governing_residual(sk::PPoK{3, 1.0}, 1.0, {0, 20}), 1e-6);
  EXPECT_LT(sk::governing_residual(sk::SPoK{2, 1.0, 0.5}, 1.0, w), 1e-6);
  EXPECT_LT(sk::governing_residual(sk::SPoK{4, 0.3, 0.8}, 2.0, w), 1e-6);
}

TEST(Governing, FractionalFamilies) {
  sk::GoverningOptions opt;
  opt.truncation = 100;
  EXPECT_LT(sk::governing_residual(sk::SFPP{0.5, 1.0}, 1.0, {0, 15}, opt), 1e-5);
  EXPECT_LT(sk::governing_residual(sk::SFPP{0.8, 2.0}, 0.5, {0, 15}, opt), 1e-5);
  EXPECT_LT(sk::governing_residual(sk::TSFPP{0.5, 1.0, 2.0}, 1.0, {0, 15}, opt), 1e-5);
  EXPECT_LT(sk::governing_residual(sk::SFSP{0.8, 0.9, 1.0, 1.0}, 1.0, {-8, 8}, opt), 1e-5);
  EXPECT_LT(sk::governing_residual(sk::TSFSP{0.6, 1.0, 0.7, 2.0, 1.0, 1.5}, 1.0, {-8, 8}, opt), 1e-5);
}

TEST(Governing, ClosedFormSpokViolatesTheEquation) {
  sk::GoverningOptions opt;
  opt.table.spok_form = sk::SpokForm::closed_form;
  EXPECT_GT(sk::governing_residual(sk::SPoK{2, 1.0, 1.0}, 1.0, {-10, 10}, opt), 1e-2);
  EXPECT_LT(sk::governing_residual(sk::SPoK{1, 1.0, 1.0}, 1.0, {-10, 10}, opt), 1e-6);
}

TEST(Governing, SingleLagPpokEquationFails) {
  // d/dt p(n) = -k l p(n) + k l p(n - k) is the equation of k times a
  // Poisson count, not of PPoK.
  const int k = 3;
  const double l = 1.0;
  const double t = 1.0;
  const double h = 1e-4;
  sk::PmfOptions o;
  o.window = std::make_pair(std::int64_t{0}, std::int64_t{30});
  const auto a = sk::pmf_table(sk::PPoK{k, l}, t - h, o);
  const auto b = sk::pmf_table(sk::PPoK{k, l}, t + h, o);
  const auto p = sk::pmf_table(sk::PPoK{k, l}, t, o);
  double worst = 0.0;
  for (std::int64_t n = 0; n <= 20; ++n) {
    const double d = (b.at(n) - a.at(n)) / (2.0 * h);
    const double rhs = -k * l * p.at(n) + k * l * (n >= k ? p.at(n - k) : 0.0);
    worst = std::max(worst, std::abs(d - rhs));
  }
  EXPECT_GT(worst, 1e-2);
}

TEST(Governing, InitialCondition) {
  for (const sk::ProcessSpec& spec :
       {sk::ProcessSpec{sk::Skellam{1.0, 1.0}}, sk::ProcessSpec{sk::PPoK{2, 1.0}}, sk::ProcessSpec{sk::SFPP{0.5, 1.0}},
        sk::ProcessSpec{sk::SFSP{0.7, 0.8, 1.0, 1.0}}}) {
    const auto p = sk::pmf_table(spec, 1e-8);
    EXPECT_NEAR(p.at(0), 1.0, 1e-6) << sk::family_name(spec);
    EXPECT_LT(p.at(1), 1e-6);
  }
}

TEST(Governing, SfspMgfOde) {
  const sk::SFSP s{0.7, 0.8, 1.0, 1.5};
  for (double th : {0.1, 0.5, 1.0, 2.0}) {
    EXPECT_LT(sk::sfsp_mgf_ode_residual(s, 1.0, sk::Complex{0.0, th}), 1e-6) << th;
  }
  EXPECT_LT(sk::sfsp_mgf_ode_residual(sk::SFSP{1.0, 1.0, 2.0, 0.5}, 0.7, sk::Complex{0.0, 0.3}), 1e-6);
}

TEST(Governing, RejectsUnsupported) {
  EXPECT_THROW((void)sk::governing_residual(sk::RunningAvgPPoK{2, 1.0}, 1.0, {0, 3}), sk::UnsupportedFamily);
  EXPECT_THROW((void)sk::governing_residual(sk::TimeChangedSPoK{2, 1.0, 1.0, sk::GammaSubordinator{}}, 1.0, {0, 3}),
               sk::UnsupportedFamily);
  EXPECT_THROW((void)sk::governing_residual(sk::Skellam{1.0, 1.0}, 1.0, {3, 0}), sk::DomainError);
  sk::GoverningOptions opt;
  opt.dt = 2.0;
  EXPECT_THROW((void)sk::governing_residual(sk::Skellam{1.0, 1.0}, 1.0, {0, 3}, opt), sk::DomainError);
}
