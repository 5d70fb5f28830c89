#include <gtest/gtest.h>

#include <cmath>
#include <tuple>
#include <utility>
#include <vector>

#include "skellamk/analytic.hpp"

namespace sk = skellamk;

// Reference values below were computed independently at 30-digit precision.

TEST(SkellamPmf, ReferenceValues) {
  EXPECT_NEAR(sk::skellam_pmf(1.0, 1.0, 1.0, 0), 0.30850832255367103953, 1e-15);
  EXPECT_NEAR(sk::skellam_pmf(1.0, 0.0, 1.0, 2), std::exp(-1.0) / 2.0, 1e-16);
  EXPECT_EQ(sk::skellam_pmf(1.0, 0.0, 1.0, -1), 0.0);
  EXPECT_THROW(sk::skellam_pmf(1.0, 1.0, 0.0, 0), sk::DomainError);
}

TEST(SkellamPmf, SymmetricWhenRatesEqual) {
  for (int m = 1; m <= 20; ++m) {
    EXPECT_NEAR(sk::skellam_pmf(2.5, 2.5, 1.3, m), sk::skellam_pmf(2.5, 2.5, 1.3, -m), 1e-17);
  }
}

TEST(PPoKPmf, ReferenceValues) {
  EXPECT_NEAR(sk::ppok_pmf(2, 1.0, 1.0, 2), 1.5 * std::exp(-2.0), 1e-16);
  EXPECT_NEAR(sk::ppok_pmf(3, 0.7, 2.0, 0), std::exp(-3 * 0.7 * 2.0), 1e-17);
  EXPECT_NEAR(sk::ppok_pmf_enumerate(2, 0.8, 1.5, 1), std::exp(-2 * 1.2) * 1.2, 1e-16);
  EXPECT_EQ(sk::ppok_pmf(2, 1.0, 1.0, -1), 0.0);
}

TEST(PPoKPmf, RecursionEqualsEnumeration) {
  for (int k = 1; k <= 4; ++k) {
    for (double lt : {0.5, 1.0, 2.0}) {
      for (int n = 0; n <= 12; ++n) {
        EXPECT_NEAR(sk::ppok_pmf(k, lt, 1.0, n), sk::ppok_pmf_enumerate(k, lt, 1.0, n), 1e-12)
            << "k=" << k << " lt=" << lt << " n=" << n;
      }
    }
  }
}

TEST(PPoKPmf, OrderOneIsPoisson) {
  for (int n = 0; n <= 30; ++n) EXPECT_NEAR(sk::ppok_pmf(1, 3.0, 1.2, n), sk::poisson_pmf(3.6, n), 1e-15);
}

TEST(PPoKPmf, EnumerationSizeLimits) {
  EXPECT_THROW(sk::ppok_pmf_enumerate(2, 1.0, 1.0, 31), sk::SizeError);
  EXPECT_THROW(sk::ppok_pmf_enumerate(7, 1.0, 1.0, 3), sk::SizeError);
}

TEST(SpokPmf, ConvolutionReferenceAtSmallTime) {
  // Leading terms p1(1) p2(0) + p1(2) p2(1) give about 9.70e-3.
  EXPECT_NEAR(sk::spok_pmf_conv(2, 1.0, 1.0, 0.01, 1, 1e-15), 9.70e-3, 1e-5);
  EXPECT_NEAR(sk::spok_pmf_closedform(2, 1.0, 1.0, 0.01, 1),
              std::exp(-0.04) * sk::bessel_i(1, 0.04, 1e-17).value, 1e-17);
  EXPECT_NEAR(sk::spok_pmf_closedform(2, 1.0, 1.0, 0.01, 1), 1.92196e-2, 1e-7);
}

TEST(SpokPmf, OrderOneReductions) {
  for (int m = -15; m <= 15; ++m) {
    const double sk1 = sk::skellam_pmf(1.3, 0.6, 2.0, m);
    EXPECT_NEAR(sk::spok_pmf_conv(1, 1.3, 0.6, 2.0, m, 1e-16), sk1, 1e-12);
    EXPECT_NEAR(sk::spok_pmf_closedform(1, 1.3, 0.6, 2.0, m), sk1, 1e-15);
  }
}

TEST(SpokPmf, VanishingSecondRateIsPPoK) {
  for (int m = 0; m <= 10; ++m) {
    EXPECT_NEAR(sk::spok_pmf_conv(3, 1.0, 1e-12, 1.0, m, 1e-16), sk::ppok_pmf(3, 1.0, 1.0, m), 1e-11);
    EXPECT_NEAR(sk::spok_pmf_conv(3, 1.0, 0.0, 1.0, m, 1e-16), sk::ppok_pmf(3, 1.0, 1.0, m), 1e-16);
  }
  EXPECT_THROW(sk::spok_pmf_closedform(2, 1.0, 0.0, 1.0, 1), sk::DomainError);
}

TEST(SpokPmf, ClosedFormNormalizes) {
  double sum = 0.0;
  for (int m = -40; m <= 40; ++m) sum += sk::spok_pmf_closedform(2, 1.0, 1.0, 1.0, m);
  EXPECT_NEAR(sum, 1.0, 1e-10);
}

TEST(SpokPmf, ClosedFormIsScaledSkellam) {
  for (int m = -10; m <= 10; ++m) {
    EXPECT_NEAR(sk::spok_pmf_closedform(3, 1.0, 0.5, 0.8, m), sk::skellam_pmf(3.0, 1.5, 0.8, m), 1e-16);
  }
}

TEST(SfppPmf, ReferenceValues) {
  const double a[] = {0.36787944117144232160, 0.18393972058572116080, 0.091969860292860580399,
                      0.053649085170835338566, 0.035446716987873348695, 0.025483315456146785819};
  for (int n = 0; n <= 5; ++n) {
    const auto r = sk::sfpp_pmf_series(0.5, 1.0, 1.0, n, 1e-14);
    EXPECT_LT(r.truncation_bound, 1e-13);
    EXPECT_NEAR(r.value, a[n], r.truncation_bound + 4e-16 * a[n]) << n;
  }
  const std::pair<int, double> b[] = {{0, 0.087443956403692820540},
                                      {1, 0.14915578258511632850},
                                      {2, 0.14958311631467536920},
                                      {10, 0.017409266784844965087}};
  for (const auto& [n, ref] : b) {
    const auto r = sk::sfpp_pmf_series(0.7, 2.0, 1.5, n, 1e-14);
    EXPECT_LT(r.truncation_bound, 1e-13);
    EXPECT_NEAR(r.value, ref, r.truncation_bound + 4e-16 * ref) << n;
  }
}

TEST(SfppPmf, UnitIndexIsPoisson) {
  EXPECT_NEAR(sk::sfpp_pmf(1.0, 1.0, 1.0, 1), std::exp(-1.0), 1e-16);
  for (int n = 0; n <= 20; ++n) EXPECT_NEAR(sk::sfpp_pmf(1.0, 2.0, 1.5, n), sk::poisson_pmf(3.0, n), 1e-12);
}

TEST(SfppPmf, ZeroStateSolvesItsEquation) {
  EXPECT_NEAR(sk::sfpp_pmf(0.5, 1.0, 1.0, 0), std::exp(-1.0), 1e-16);
  EXPECT_NEAR(sk::sfpp_pmf(0.3, 2.0, 0.7, 0), std::exp(-std::pow(2.0, 0.3) * 0.7), 1e-16);
}

TEST(SfppPmf, RecursionMatchesFoxWright) {
  for (double a : {0.3, 0.6, 0.9}) {
    const auto v = sk::sfpp_pmf_vector(a, 1.5, 2.0, 60).probs;
    for (int n = 0; n <= 60; ++n) {
      EXPECT_NEAR(v[static_cast<std::size_t>(n)], sk::sfpp_pmf(a, 1.5, 2.0, n), 1e-12)
          << "a=" << a << " n=" << n;
    }
  }
}

TEST(SfppPmf, PartialSumsApproachOneWithKnownTail) {
  // At alpha = 0.7, lambda t = 1 the tail beyond N behaves like
  // N^(-alpha) / Gamma(1 - alpha), so 200 terms leave about 8e-3 out.
  const auto v = sk::sfpp_pmf_vector(0.7, 1.0, 1.0, 200).probs;
  double sum = 0.0;
  for (double p : v) sum += p;
  const double tail = 1.0 - sum;
  const double bound = sk::upper_tail_bound(sk::SFPP{0.7, 1.0}, 1.0, 200);
  EXPECT_GT(tail, 0.0);
  EXPECT_LE(tail, bound);
  EXPECT_NEAR(tail, std::pow(200.0, -0.7) / std::tgamma(0.3), 2e-3);
  const auto w = sk::sfpp_pmf_vector(0.7, 1.0, 1.0, 20000).probs;
  double sum2 = 0.0;
  for (double p : w) sum2 += p;
  EXPECT_LT(1.0 - sum2, tail);
}

TEST(TsfppPmf, ReferenceValues) {
  const std::tuple<double, double, double, double, int, double> refs[] = {
      {0.5, 0.5, 1.0, 1.0, 0, 0.59592641148358599809},  {0.5, 0.5, 1.0, 1.0, 1, 0.24328593873043856955},
      {0.5, 0.5, 1.0, 1.0, 3, 0.036827339657636158520}, {0.6, 2.0, 1.0, 2.0, 0, 0.43390443853120263244},
      {0.6, 2.0, 1.0, 2.0, 1, 0.33552650791388744389},  {0.6, 2.0, 1.0, 2.0, 2, 0.15209519800048227099},
      {0.6, 2.0, 1.0, 2.0, 5, 0.0050848746974030876658}};
  for (const auto& [a, mu, l, t, n, ref] : refs) {
    const auto r = sk::tsfpp_pmf_series(a, mu, l, t, n, 1e-14);
    EXPECT_LT(r.truncation_bound, 1e-10);
    EXPECT_NEAR(r.value, ref, r.truncation_bound + 4e-16 * ref) << a << " " << mu << " " << n;
  }
}

TEST(TsfppPmf, ZeroState) {
  const double a = 0.4;
  const double mu = 1.3;
  const double l = 2.0;
  const double t = 1.7;
  EXPECT_NEAR(sk::tsfpp_pmf(a, mu, l, t, 0), std::exp(-t * (std::pow(mu + l, a) - std::pow(mu, a))), 1e-15);
}

TEST(TsfppPmf, SmallTemperingApproachesSfpp) {
  // The laws differ at first order in mu^alpha t.
  for (double mu : {1e-8, 1e-12}) {
    const double gap = std::pow(mu, 0.6);
    for (int n = 0; n <= 2; ++n) {
      const double p = sk::sfpp_pmf(0.6, 1.0, 1.0, n);
      EXPECT_NEAR(sk::tsfpp_pmf(0.6, mu, 1.0, 1.0, n), p, 2.0 * (n + 1) * gap * p + 1e-13) << mu << " " << n;
    }
  }
}

TEST(TsfppPmf, DoubleSeriesAgreesWhereItConverges) {
  for (int n : {0, 1, 2, 5, 9}) {
    const double a = sk::tsfpp_pmf_double_series(0.5, 0.5, 1.0, 1.0, n, 1e-14).value;
    EXPECT_NEAR(a, sk::tsfpp_pmf(0.5, 0.5, 1.0, 1.0, n), 1e-12) << n;
  }
  EXPECT_THROW(sk::tsfpp_pmf_double_series(0.6, 2.0, 1.0, 2.0, 1, 1e-12), sk::ConvergenceError);
}

TEST(TsfppPmf, RecursionMatchesSeries) {
  const auto v = sk::tsfpp_pmf_vector(0.6, 2.0, 1.0, 2.0, 40).probs;
  for (int n = 0; n <= 40; ++n) {
    const auto r = sk::tsfpp_pmf_series(0.6, 2.0, 1.0, 2.0, n, 1e-14);
    EXPECT_LT(r.truncation_bound, 1e-10) << n;
    EXPECT_NEAR(v[static_cast<std::size_t>(n)], r.value, r.truncation_bound + 1e-16) << n;
  }
}

TEST(TsfppPmf, NormalizesWithinBound) {
  const sk::ProcessSpec spec = sk::TSFPP{0.5, 1.0, 1.0};
  const auto v = sk::tsfpp_pmf_vector(0.5, 1.0, 1.0, 1.0, 300).probs;
  double sum = 0.0;
  for (double p : v) sum += p;
  EXPECT_NEAR(sum, 1.0, sk::upper_tail_bound(spec, 1.0, 300) + 1e-12);
}

TEST(SfspPmf, UnitIndicesGiveSkellam) {
  for (int m = -8; m <= 8; ++m) {
    EXPECT_NEAR(sk::sfsp_pmf(1.0, 1.0, 1.2, 0.7, 1.5, m), sk::skellam_pmf(1.2, 0.7, 1.5, m), 1e-12);
    EXPECT_NEAR(sk::tsfsp_pmf(sk::TSFSP{1.0, 0.5, 1.0, 2.0, 1.2, 0.7}, 1.5, m),
                sk::skellam_pmf(1.2, 0.7, 1.5, m), 1e-12);
  }
}

TEST(SfspPmf, NestedSeriesMatchesConvolution) {
  // The cross-series truncated at n < N equals the convolution truncated the same way.
  for (int m : {-3, 0, 2}) {
    const auto a = sk::sfpp_pmf_vector(0.8, 1.0, 1.0, 10).probs;
    const auto b = sk::sfpp_pmf_vector(0.9, 1.0, 1.0, 10).probs;
    double direct = 0.0;
    for (int n = 0; n < 5; ++n) {
      const int i = m >= 0 ? n + m : n;
      const int j = m >= 0 ? n : n - m;
      direct += a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(j)];
    }
    EXPECT_NEAR(sk::sfsp_pmf_partial(0.8, 0.9, 1.0, 1.0, 1.0, m, 5), direct, 1e-14) << m;
  }
}

TEST(SfspPmf, AgreesWithTable) {
  const sk::SFSP s{0.8, 0.9, 1.0, 1.0};
  const auto r = sk::sfsp_pmf_series(0.8, 0.9, 1.0, 1.0, 1.0, 3, 1e-10);
  EXPECT_LE(r.truncation_bound, 1e-10);
  sk::PmfOptions opt;
  opt.window = std::make_pair(std::int64_t{-60}, std::int64_t{60});
  const auto table = sk::pmf_table(s, 1.0, opt);
  EXPECT_NEAR(r.value, table.at(3), 1e-10);
}

TEST(TsfspPmf, CorrectedNestedSeriesMatchesConvolution) {
  const sk::TSFSP s{0.6, 0.4, 0.7, 0.5, 1.0, 1.5};
  const auto a = sk::tsfpp_pmf_vector(0.6, 0.4, 1.0, 1.0, 60).probs;
  const auto b = sk::tsfpp_pmf_vector(0.7, 0.5, 1.5, 1.0, 60).probs;
  for (int m : {-2, 0, 3}) {
    double direct = 0.0;
    double full = 0.0;
    for (int n = 0; n < 50; ++n) {
      const int i = m >= 0 ? n + m : n;
      const int j = m >= 0 ? n : n - m;
      const double term = a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(j)];
      if (n < 20) direct += term;
      full += term;
    }
    EXPECT_NEAR(sk::tsfsp_pmf_partial(s, 1.0, m, 20), direct, 1e-11) << m;
    EXPECT_NEAR(sk::tsfsp_pmf(s, 1.0, m), full, 1e-14) << m;
  }
}

TEST(TsfspPmf, LongPartialSumsReportCancellation) {
  const sk::TSFSP s{0.6, 0.4, 0.7, 0.5, 1.0, 1.5};
  EXPECT_THROW((void)sk::tsfsp_pmf_partial(s, 1.0, 0, 80), sk::PrecisionLoss);
  EXPECT_THROW((void)sk::tsfpp_pmf_double_series(0.5, 0.5, 1.0, 1.0, 40, 1e-13), sk::PrecisionLoss);
}

TEST(TcspokPmf, ExactCaseAndSymmetry) {
  // Gamma(1, 1) clock, k = 2, equal rates: P(Z = 0) = 1/3 exactly.
  const sk::GammaSubordinator g{1.0, 1.0};
  EXPECT_NEAR(sk::tcspok_pmf(2, 1.0, 1.0, g, 1.0, 0), 1.0 / 3.0, 1e-13);
  for (int m = 1; m <= 10; ++m) {
    EXPECT_NEAR(sk::tcspok_pmf(2, 1.0, 1.0, g, 1.0, m), sk::tcspok_pmf(2, 1.0, 1.0, g, 1.0, -m), 1e-15);
  }
}

TEST(TcspokPmf, Normalizes) {
  const sk::GammaSubordinator g{2.0, 1.5};
  double sum = 0.0;
  double bound = 0.0;
  for (int m = -30; m <= 30; ++m) {
    const auto r = sk::tcspok_pmf_series(2, 1.0, 0.5, g, 1.0, m, 1e-13);
    sum += r.value;
    bound += r.truncation_bound;
  }
  const double outside = sk::lower_tail_bound(sk::TimeChangedSPoK{2, 1.0, 0.5, g}, 1.0, -30) +
                          sk::upper_tail_bound(sk::TimeChangedSPoK{2, 1.0, 0.5, g}, 1.0, 30);
  EXPECT_NEAR(sum, 1.0, bound + outside + 1e-12);
}

TEST(TcspokPmf, ConcentratedClockApproachesClosedForm) {
  const sk::GammaSubordinator g{1e4, 1e4};
  for (int m = -3; m <= 3; ++m) {
    EXPECT_NEAR(sk::tcspok_pmf(2, 1.0, 0.7, g, 1.0, m), sk::spok_pmf_closedform(2, 1.0, 0.7, 1.0, m), 1e-3);
  }
}

TEST(TcspokPmf, SeriesAgreesWithMixtureMonteCarlo) {
  const sk::InverseGaussianSubordinator ig{1.0, 1.0};
  for (int m : {-1, 0, 2}) {
    const auto mc = sk::tcspok_pmf_mc(2, 1.0, 0.5, ig, 1.0, m, 200000, 7);
    EXPECT_NEAR(sk::tcspok_pmf(2, 1.0, 0.5, ig, 1.0, m), mc.value, 4.0 * mc.standard_error) << m;
  }
}

TEST(TcspokPmf, StableClockUnsupported) {
  EXPECT_THROW(sk::tcspok_pmf(2, 1.0, 1.0, sk::StableSubordinator{0.5}, 1.0, 0), sk::UnsupportedFamily);
}

TEST(TailBounds, DominateExactTails) {
  const std::vector<sk::ProcessSpec> specs = {sk::Skellam{1.0, 2.0}, sk::PPoK{2, 1.0}, sk::SPoK{2, 1.0, 0.5},
                                              sk::TSFPP{0.5, 1.0, 2.0}, sk::SFPP{0.6, 1.0}};
  for (const auto& spec : specs) {
    sk::PmfOptions opt;
    opt.window = std::make_pair(std::int64_t{-400}, std::int64_t{400});
    const auto table = sk::pmf_table(spec, 1.0, opt);
    for (std::int64_t hi : {2, 5, 10}) {
      double exact = 0.0;
      for (std::int64_t m = hi + 1; m <= table.m_hi; ++m) exact += table.at(m);
      EXPECT_GE(sk::upper_tail_bound(spec, 1.0, hi), exact) << sk::family_name(spec) << " hi=" << hi;
    }
  }
}
