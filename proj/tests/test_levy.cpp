#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "skellamk/analytic.hpp"

namespace sk = skellamk;

namespace {

std::vector<sk::ProcessSpec> levy_families() {
  return {sk::Skellam{1.2, 0.7},
          sk::PPoK{3, 0.8},
          sk::SPoK{2, 1.0, 0.5},
          sk::SFPP{0.6, 1.5},
          sk::TSFPP{0.5, 1.0, 2.0},
          sk::SFSP{0.7, 0.8, 1.0, 1.2},
          sk::TSFSP{0.6, 1.0, 0.7, 2.0, 1.0, 1.5},
          sk::TimeChangedSPoK{2, 1.0, 0.5, sk::GammaSubordinator{1.0, 1.0}}};
}

bool finite_atoms(const sk::ProcessSpec& s) {
  return std::holds_alternative<sk::Skellam>(s) || std::holds_alternative<sk::PPoK>(s) ||
         std::holds_alternative<sk::SPoK>(s);
}

}  // namespace

TEST(LevyMeasure, SkellamAtoms) {
  const auto m = sk::levy_measure(sk::Skellam{1.5, 0.25});
  ASSERT_EQ(m.atoms.size(), 2u);
  EXPECT_EQ(m.atoms[0], (sk::LevyAtom{-1, 0.25}));
  EXPECT_EQ(m.atoms[1], (sk::LevyAtom{1, 1.5}));
  EXPECT_EQ(m.truncation_bound, 0.0);
}

TEST(LevyMeasure, PPoKAtoms) {
  const auto m = sk::levy_measure(sk::PPoK{3, 2.0});
  ASSERT_EQ(m.atoms.size(), 3u);
  for (int j = 1; j <= 3; ++j) EXPECT_EQ(m.atoms[static_cast<std::size_t>(j - 1)], (sk::LevyAtom{j, 2.0}));
}

TEST(LevyMeasure, SPoKAtomsAreSymmetricInLocation) {
  const auto m = sk::levy_measure(sk::SPoK{3, 2.0, 0.5});
  ASSERT_EQ(m.atoms.size(), 6u);
  for (int j = 1; j <= 3; ++j) {
    EXPECT_EQ(m.mass_at(j), 2.0);
    EXPECT_EQ(m.mass_at(-j), 0.5);
  }
  EXPECT_EQ(m.mass_at(0), 0.0);
}

TEST(LevyMeasure, SfppAtomMasses) {
  const auto m = sk::levy_measure(sk::SFPP{0.5, 1.0}, 200);
  EXPECT_NEAR(m.mass_at(1), 0.5, 1e-15);
  EXPECT_NEAR(m.mass_at(2), 0.125, 1e-15);
  EXPECT_NEAR(m.mass_at(3), 0.0625, 1e-15);
  for (const auto& a : m.atoms) EXPECT_GT(a.mass, 0.0);
  EXPECT_EQ(m.atoms.size(), 200u);
  EXPECT_GT(m.truncation_bound, 0.0);
}

TEST(LevyMeasure, TsfppAtomsMatchPrintedDoubleSum) {
  // Printed form: nu(l) = sum_{n >= l} mu^(a-n) binom(a, n) lambda^n binom(n, l) (-1)^(l+1),
  // convergent for lambda < mu.
  const double a = 0.6;
  const double mu = 2.0;
  const double lambda = 0.5;
  const auto m = sk::levy_measure(sk::TSFPP{a, mu, lambda}, 50);
  for (int l = 1; l <= 6; ++l) {
    double sum = 0.0;
    double binom_nl = 1.0;  // binom(n, l) starting at n = l
    for (int n = l; n < l + 400; ++n) {
      if (n > l) binom_nl *= static_cast<double>(n) / (n - l);
      sum += std::pow(mu, a - n) * sk::gen_binomial(a, n) * std::pow(lambda, n) * binom_nl *
             ((l + 1) % 2 == 0 ? 1.0 : -1.0);
    }
    EXPECT_NEAR(m.mass_at(l), sum, 1e-14) << "l=" << l;
  }
}

TEST(LevyMeasure, TruncationBoundShrinks) {
  const auto a = sk::levy_measure(sk::SFPP{0.7, 1.0}, 50);
  const auto b = sk::levy_measure(sk::SFPP{0.7, 1.0}, 500);
  EXPECT_LT(b.truncation_bound, a.truncation_bound);
  EXPECT_THROW(sk::levy_measure(sk::SFPP{0.7, 1.0}, 0), sk::DomainError);
  EXPECT_THROW(sk::levy_measure(sk::RunningAvgPPoK{1, 1.0}), sk::UnsupportedFamily);
}

TEST(LevyMeasure, TimeChangedMassMatchesMeanExponent) {
  // The average of psi over a full period is the mass off the origin.
  const sk::ProcessSpec spec = sk::TimeChangedSPoK{2, 1.0, 0.5, sk::GammaSubordinator{1.0, 1.0}};
  const auto m = sk::levy_measure(spec, 400);
  const int nodes = 4096;
  double avg = 0.0;
  for (int j = 0; j < nodes; ++j) avg += sk::char_exponent(spec, 2.0 * std::numbers::pi * j / nodes).real();
  avg /= nodes;
  EXPECT_NEAR(m.total_mass(), avg, m.truncation_bound + 1e-12);
  EXPECT_LT(m.total_mass(), std::log1p(3.0));
}

TEST(LevyKhintchine, ZeroAtOrigin) {
  for (const auto& spec : levy_families()) {
    EXPECT_LT(sk::levy_khintchine_residual(spec, 0.0), 1e-15) << sk::family_name(spec);
  }
}

TEST(LevyKhintchine, ResidualWithinBoundOnGrid) {
  for (const auto& spec : levy_families()) {
    const auto m = sk::levy_measure(spec, 200);
    for (int j = 1; j <= 30; ++j) {
      const double th = 0.1 * j;
      const double r = sk::levy_khintchine_residual(spec, th, 200);
      if (finite_atoms(spec)) {
        EXPECT_LT(r, 1e-14) << sk::family_name(spec) << " theta=" << th;
      } else {
        EXPECT_LE(r, m.truncation_bound + 1e-14) << sk::family_name(spec) << " theta=" << th;
      }
    }
  }
}

TEST(LevyKhintchine, SfppBoundIsNotVacuous) {
  const double th = std::numbers::pi / 3;
  const auto m = sk::levy_measure(sk::SFPP{0.5, 1.0}, 200);
  EXPECT_LT(m.truncation_bound, 0.1);
  EXPECT_LE(sk::levy_khintchine_residual(sk::SFPP{0.5, 1.0}, th, 200), m.truncation_bound);
}
