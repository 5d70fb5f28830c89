#pragma once

// Closed-form means, variances, covariances and correlation functions.

#include <cmath>
#include <limits>

#include "skellamk/errors.hpp"
#include "skellamk/process.hpp"
#include "skellamk/subordinators.hpp"

namespace skellamk {

namespace detail {

/// sum_j j and sum_j j^2 over j = 1..k.
inline double s1(int k) { return k * (k + 1.0) / 2.0; }
inline double s2(int k) { return k * (k + 1.0) * (2.0 * k + 1.0) / 6.0; }

inline Moments tsfpp_moments(double alpha, double mu, double lambda, double t) {
  if (alpha >= 1.0) return {lambda * t, lambda * t};
  const double m = lambda * alpha * std::pow(mu, alpha - 1.0) * t;
  return {m, m + lambda * lambda * alpha * (1.0 - alpha) * std::pow(mu, alpha - 2.0) * t};
}

}  // namespace detail

/// Mean and variance of X(t). Families with infinite moments (space-fractional
/// with index below 1) are rejected.
inline Moments moments(const ProcessSpec& spec, double t) {
  validate(spec);
  if (!(t > 0.0)) throw DomainError("moments: t must be positive");
  using detail::s1;
  using detail::s2;
  return std::visit(
      Overloaded{
          [&](const Skellam& s) {
            return Moments{(s.lambda1 - s.lambda2) * t, (s.lambda1 + s.lambda2) * t};
          },
          [&](const PPoK& s) { return Moments{s1(s.k) * s.lambda * t, s2(s.k) * s.lambda * t}; },
          [&](const SPoK& s) {
            return Moments{s1(s.k) * (s.lambda1 - s.lambda2) * t,
                           s2(s.k) * (s.lambda1 + s.lambda2) * t};
          },
          [&](const RunningAvgPPoK& s) {
            return Moments{s1(s.k) * s.lambda * t / 2.0, s2(s.k) * s.lambda * t / 3.0};
          },
          [&](const RunningAvgSPoK& s) {
            return Moments{s1(s.k) * (s.lambda1 - s.lambda2) * t / 2.0,
                           s2(s.k) * (s.lambda1 + s.lambda2) * t / 3.0};
          },
          [&](const SFPP& s) -> Moments {
            if (s.alpha < 1.0) throw UnsupportedFamily("sfpp: moments are infinite");
            return {s.lambda * t, s.lambda * t};
          },
          [&](const TSFPP& s) { return detail::tsfpp_moments(s.alpha, s.mu, s.lambda, t); },
          [&](const SFSP& s) -> Moments {
            if (s.alpha1 < 1.0 || s.alpha2 < 1.0) {
              throw UnsupportedFamily("sfsp: moments are infinite");
            }
            return {(s.lambda1 - s.lambda2) * t, (s.lambda1 + s.lambda2) * t};
          },
          [&](const TSFSP& s) {
            const auto a = detail::tsfpp_moments(s.alpha1, s.mu1, s.lambda1, t);
            const auto b = detail::tsfpp_moments(s.alpha2, s.mu2, s.lambda2, t);
            return Moments{a.mean - b.mean, a.variance + b.variance};
          },
          [&](const TimeChangedSPoK& s) {
            const auto d = subordinator_moments(s.sub, t);
            const double drift = s1(s.k) * (s.lambda1 - s.lambda2);
            return Moments{drift * d.mean,
                           s2(s.k) * (s.lambda1 + s.lambda2) * d.mean + drift * drift * d.variance};
          }},
      spec);
}

/// Cov[X(s), X(t)] for s <= t. Running averages use the published expressions;
/// see running_average_covariance_exact for the exact ones.
inline double covariance(const ProcessSpec& spec, double s, double t) {
  if (!(s > 0.0) || s > t) throw DomainError("covariance: needs 0 < s <= t");
  using detail::s1;
  using detail::s2;
  if (const auto* r = std::get_if<RunningAvgPPoK>(&spec)) {
    validate(spec);
    return s2(r->k) * r->lambda * s / 3.0 -
           s1(r->k) * s1(r->k) * r->lambda * r->lambda * s * s / 4.0;
  }
  if (const auto* r = std::get_if<RunningAvgSPoK>(&spec)) {
    validate(spec);
    const double d = r->lambda1 - r->lambda2;
    return s2(r->k) * d * s / 3.0 - s1(r->k) * s1(r->k) * d * d * s * s / 4.0;
  }
  // Levy processes: Cov[X(s), X(t)] = Var[X(s)].
  return moments(spec, s).variance;
}

/// Exact Cov[A(s), A(t)], s <= t, of the running average A of a Levy process
/// with Var X(1) = v: v (s/2 - s^2/(6t)).
inline double running_average_covariance_exact(const ProcessSpec& spec, double s, double t) {
  if (!(s > 0.0) || s > t) throw DomainError("covariance: needs 0 < s <= t");
  double v = 0.0;
  if (const auto* r = std::get_if<RunningAvgPPoK>(&spec)) {
    v = moments(PPoK{r->k, r->lambda}, 1.0).variance;
  } else if (const auto* r = std::get_if<RunningAvgSPoK>(&spec)) {
    v = moments(SPoK{r->k, r->lambda1, r->lambda2}, 1.0).variance;
  } else {
    throw UnsupportedFamily("running_average_covariance_exact: needs ra-ppok or ra-spok");
  }
  return v * (s / 2.0 - s * s / (6.0 * t));
}

/// Cor[X(s), X(t)], 0 < s < t, for SPoK and the running average of PPoK.
inline double correlation(const ProcessSpec& spec, double s, double t) {
  if (!(s > 0.0) || !(s < t)) throw DomainError("correlation: needs 0 < s < t");
  if (!std::holds_alternative<SPoK>(spec) && !std::holds_alternative<RunningAvgPPoK>(spec)) {
    throw UnsupportedFamily("correlation: needs spok or ra-ppok");
  }
  return covariance(spec, s, t) /
         std::sqrt(moments(spec, s).variance * moments(spec, t).variance);
}

/// Exact correlation of the running average of PPoK:
/// (3/2) sqrt(s/t) - (1/2) (s/t)^(3/2).
inline double running_average_correlation_exact(const ProcessSpec& spec, double s, double t) {
  if (!(s > 0.0) || !(s < t)) throw DomainError("correlation: needs 0 < s < t");
  return running_average_covariance_exact(spec, s, t) /
         std::sqrt(moments(spec, s).variance * moments(spec, t).variance);
}

namespace detail {

/// lim t^d Cor for a correlation behaving as c t^(-1/2).
inline double power_limit(double c, double d) {
  if (d == 0.5) return c;
  if (d < 0.5) return 0.0;
  return c > 0 ? std::numeric_limits<double>::infinity()
               : (c < 0 ? -std::numeric_limits<double>::infinity() : 0.0);
}

}  // namespace detail

/// c(s) = lim_{t -> inf} t^d Cor[X(s), X(t)]. For the running average of PPoK
/// this is the published coefficient.
inline double lrd_limit(const ProcessSpec& spec, double s, double d = 0.5) {
  if (!(s > 0.0)) throw DomainError("lrd_limit: s must be positive");
  validate(spec);
  if (std::holds_alternative<SPoK>(spec)) return detail::power_limit(std::sqrt(s), d);
  if (const auto* r = std::get_if<RunningAvgPPoK>(&spec)) {
    const double k = r->k;
    const double c =
        (8.0 * (2.0 * k + 1.0) - 9.0 * (k + 1.0) * k * r->lambda * s) * std::sqrt(s) /
        (8.0 * (2.0 * k + 1.0));
    return detail::power_limit(c, d);
  }
  throw UnsupportedFamily("lrd_limit: needs spok or ra-ppok");
}

/// The same limit from the exact running-average covariance: (3/2) sqrt(s).
inline double lrd_limit_exact(const ProcessSpec& spec, double s, double d = 0.5) {
  if (!(s > 0.0)) throw DomainError("lrd_limit: s must be positive");
  if (!std::holds_alternative<RunningAvgPPoK>(spec) &&
      !std::holds_alternative<RunningAvgSPoK>(spec)) {
    throw UnsupportedFamily("lrd_limit_exact: needs a running average");
  }
  validate(spec);
  return detail::power_limit(1.5 * std::sqrt(s), d);
}

}  // namespace skellamk
