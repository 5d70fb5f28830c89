#pragma once

// Tagged descriptions of every process family the library handles.

#include <cmath>
#include <string>
#include <variant>

#include "skellamk/errors.hpp"
#include "skellamk/subordinators.hpp"

namespace skellamk {

/// Difference of two independent Poisson processes.
struct Skellam {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  friend bool operator==(const Skellam&, const Skellam&) = default;
};

/// Poisson process of order k: jumps of each size 1..k at rate lambda.
struct PPoK {
  int k = 1;
  double lambda = 1.0;
  friend bool operator==(const PPoK&, const PPoK&) = default;
};

/// Skellam process of order k: difference of two independent PPoK.
struct SPoK {
  int k = 1;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  friend bool operator==(const SPoK&, const SPoK&) = default;
};

/// (1/t) * integral of a PPoK path over [0, t].
struct RunningAvgPPoK {
  int k = 1;
  double lambda = 1.0;
  friend bool operator==(const RunningAvgPPoK&, const RunningAvgPPoK&) = default;
};

/// (1/t) * integral of an SPoK path over [0, t].
struct RunningAvgSPoK {
  int k = 1;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  friend bool operator==(const RunningAvgSPoK&, const RunningAvgSPoK&) = default;
};

/// Poisson process on a stable clock; alpha = 1 is the plain Poisson process.
struct SFPP {
  double alpha = 0.5;
  double lambda = 1.0;
  friend bool operator==(const SFPP&, const SFPP&) = default;
};

/// Poisson process on a tempered stable clock; alpha = 1 is plain Poisson.
struct TSFPP {
  double alpha = 0.5;
  double mu = 1.0;
  double lambda = 1.0;
  friend bool operator==(const TSFPP&, const TSFPP&) = default;
};

/// Difference of two independent SFPP.
struct SFSP {
  double alpha1 = 0.5;
  double alpha2 = 0.5;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  friend bool operator==(const SFSP&, const SFSP&) = default;
};

/// Difference of two independent TSFPP.
struct TSFSP {
  double alpha1 = 0.5;
  double mu1 = 1.0;
  double alpha2 = 0.5;
  double mu2 = 1.0;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  friend bool operator==(const TSFSP&, const TSFSP&) = default;
};

/// SPoK run on an independent subordinator clock.
struct TimeChangedSPoK {
  int k = 1;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  SubordinatorSpec sub = GammaSubordinator{};
  friend bool operator==(const TimeChangedSPoK&, const TimeChangedSPoK&) = default;
};

using ProcessSpec = std::variant<Skellam, PPoK, SPoK, RunningAvgPPoK, RunningAvgSPoK, SFPP, TSFPP,
                                 SFSP, TSFSP, TimeChangedSPoK>;

inline std::string family_name(const ProcessSpec& spec) {
  return std::visit(Overloaded{[](const Skellam&) { return std::string("skellam"); },
                               [](const PPoK&) { return std::string("ppok"); },
                               [](const SPoK&) { return std::string("spok"); },
                               [](const RunningAvgPPoK&) { return std::string("ra-ppok"); },
                               [](const RunningAvgSPoK&) { return std::string("ra-spok"); },
                               [](const SFPP&) { return std::string("sfpp"); },
                               [](const TSFPP&) { return std::string("tsfpp"); },
                               [](const SFSP&) { return std::string("sfsp"); },
                               [](const TSFSP&) { return std::string("tsfsp"); },
                               [](const TimeChangedSPoK&) { return std::string("tcspok"); }},
                    spec);
}

/// Integer-valued families (everything except the running averages).
inline bool is_integer_valued(const ProcessSpec& spec) {
  return !std::holds_alternative<RunningAvgPPoK>(spec) &&
         !std::holds_alternative<RunningAvgSPoK>(spec);
}

namespace detail {

inline void require(bool ok, const std::string& family, const std::string& what) {
  if (!ok) throw DomainError(family + ": " + what);
}

inline bool fractional_index(double a) { return a > 0.0 && a <= 1.0; }

}  // namespace detail

/// Checks parameter domains. lambda2 = 0 is accepted for the families whose
/// one-sided reduction is meaningful (Skellam, SPoK and its running average).
inline void validate(const ProcessSpec& spec) {
  using detail::require;
  std::visit(
      Overloaded{
          [](const Skellam& s) {
            require(s.lambda1 > 0.0 && s.lambda2 >= 0.0, "skellam", "needs l1 > 0, l2 >= 0");
          },
          [](const PPoK& s) { require(s.k >= 1 && s.lambda > 0.0, "ppok", "needs k >= 1, l > 0"); },
          [](const SPoK& s) {
            require(s.k >= 1 && s.lambda1 > 0.0 && s.lambda2 >= 0.0, "spok",
                    "needs k >= 1, l1 > 0, l2 >= 0");
          },
          [](const RunningAvgPPoK& s) {
            require(s.k >= 1 && s.lambda > 0.0, "ra-ppok", "needs k >= 1, l > 0");
          },
          [](const RunningAvgSPoK& s) {
            require(s.k >= 1 && s.lambda1 > 0.0 && s.lambda2 >= 0.0, "ra-spok",
                    "needs k >= 1, l1 > 0, l2 >= 0");
          },
          [](const SFPP& s) {
            require(detail::fractional_index(s.alpha) && s.lambda > 0.0, "sfpp",
                    "needs 0 < alpha <= 1, l > 0");
          },
          [](const TSFPP& s) {
            require(detail::fractional_index(s.alpha) && s.mu > 0.0 && s.lambda > 0.0, "tsfpp",
                    "needs 0 < alpha <= 1, mu > 0, l > 0");
          },
          [](const SFSP& s) {
            require(detail::fractional_index(s.alpha1) && detail::fractional_index(s.alpha2) &&
                        s.lambda1 > 0.0 && s.lambda2 > 0.0,
                    "sfsp", "needs alphas in (0, 1], l1 > 0, l2 > 0");
          },
          [](const TSFSP& s) {
            require(detail::fractional_index(s.alpha1) && detail::fractional_index(s.alpha2) &&
                        s.mu1 > 0.0 && s.mu2 > 0.0 && s.lambda1 > 0.0 && s.lambda2 > 0.0,
                    "tsfsp", "needs alphas in (0, 1], mus > 0, l1 > 0, l2 > 0");
          },
          [](const TimeChangedSPoK& s) {
            require(s.k >= 1 && s.lambda1 > 0.0 && s.lambda2 >= 0.0, "tcspok",
                    "needs k >= 1, l1 > 0, l2 >= 0");
            validate(s.sub);
          }},
      spec);
}

/// The clock of a space-fractional component; nullopt when alpha = 1 (the
/// component is then a plain Poisson process).
inline std::optional<SubordinatorSpec> fractional_clock(double alpha) {
  if (alpha >= 1.0) return std::nullopt;
  return StableSubordinator{alpha};
}

inline std::optional<SubordinatorSpec> tempered_clock(double alpha, double mu) {
  if (alpha >= 1.0) return std::nullopt;
  return TemperedStableSubordinator{alpha, mu};
}

}  // namespace skellamk
