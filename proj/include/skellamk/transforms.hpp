#pragma once

// Characteristic exponents, moment and probability generating functions.

#include <cmath>
#include <complex>
#include <optional>

#include "skellamk/errors.hpp"
#include "skellamk/process.hpp"
#include "skellamk/subordinators.hpp"

namespace skellamk {

using Complex = std::complex<double>;

namespace detail {

inline Complex unit_phase(double x) { return std::polar(1.0, x); }

/// (e^{iu} - 1)/(iu), equal to 1 at u = 0.
inline Complex phase_average(double u) {
  if (std::abs(u) < 1e-8) return {1.0 - u * u / 6.0, u / 2.0};
  return (unit_phase(u) - 1.0) / Complex(0.0, u);
}

/// SPoK exponent psi(theta) = sum_j l1 (1 - e^{ij theta}) + l2 (1 - e^{-ij theta}).
inline Complex spok_exponent(int k, double l1, double l2, double theta) {
  Complex psi = 0.0;
  for (int j = 1; j <= k; ++j) {
    psi += l1 * (1.0 - unit_phase(j * theta)) + l2 * (1.0 - unit_phase(-j * theta));
  }
  return psi;
}

inline Complex sfpp_exponent(double alpha, double lambda, double theta) {
  return std::pow(lambda, alpha) * std::pow(1.0 - unit_phase(theta), alpha);
}

inline Complex tsfpp_exponent(double alpha, double mu, double lambda, double theta) {
  return std::pow(mu + lambda * (1.0 - unit_phase(theta)), alpha) - std::pow(mu, alpha);
}

}  // namespace detail

/// psi(theta) with E[exp(i theta X(t))] = exp(-t psi(theta)).
inline Complex char_exponent(const ProcessSpec& spec, double theta) {
  validate(spec);
  using detail::phase_average;
  return std::visit(
      Overloaded{
          [&](const Skellam& s) { return detail::spok_exponent(1, s.lambda1, s.lambda2, theta); },
          [&](const PPoK& s) { return detail::spok_exponent(s.k, s.lambda, 0.0, theta); },
          [&](const SPoK& s) { return detail::spok_exponent(s.k, s.lambda1, s.lambda2, theta); },
          [&](const RunningAvgPPoK& s) {
            Complex psi = 0.0;
            for (int j = 1; j <= s.k; ++j) psi += s.lambda * (1.0 - phase_average(j * theta));
            return psi;
          },
          [&](const RunningAvgSPoK& s) {
            // (1 - e^{-iu})/(iu) is the conjugate of (e^{iu} - 1)/(iu).
            Complex psi = 0.0;
            for (int j = 1; j <= s.k; ++j) {
              const Complex a = phase_average(j * theta);
              psi += s.lambda1 * (1.0 - a) + s.lambda2 * (1.0 - std::conj(a));
            }
            return psi;
          },
          [&](const SFPP& s) { return detail::sfpp_exponent(s.alpha, s.lambda, theta); },
          [&](const TSFPP& s) { return detail::tsfpp_exponent(s.alpha, s.mu, s.lambda, theta); },
          [&](const SFSP& s) {
            return detail::sfpp_exponent(s.alpha1, s.lambda1, theta) +
                   detail::sfpp_exponent(s.alpha2, s.lambda2, -theta);
          },
          [&](const TSFSP& s) {
            return detail::tsfpp_exponent(s.alpha1, s.mu1, s.lambda1, theta) +
                   detail::tsfpp_exponent(s.alpha2, s.mu2, s.lambda2, -theta);
          },
          [&](const TimeChangedSPoK& s) {
            return laplace_exponent(s.sub, detail::spok_exponent(s.k, s.lambda1, s.lambda2, theta));
          }},
      spec);
}

/// E[exp(i theta X(t))].
inline Complex characteristic_function(const ProcessSpec& spec, double t, double theta) {
  return std::exp(-t * char_exponent(spec, theta));
}

namespace detail {

inline std::optional<double> tsfpp_log_mgf(double alpha, double mu, double lambda, double t,
                                           double theta) {
  if (alpha >= 1.0) return t * lambda * std::expm1(theta);
  const double base = mu - lambda * std::expm1(theta);
  if (base < 0.0) return std::nullopt;
  return -t * (std::pow(base, alpha) - std::pow(mu, alpha));
}

inline std::optional<double> sfpp_log_mgf(double alpha, double lambda, double t, double theta) {
  if (alpha >= 1.0) return t * lambda * std::expm1(theta);
  if (theta > 0.0) return std::nullopt;
  return -t * std::pow(lambda, alpha) * std::pow(-std::expm1(theta), alpha);
}

inline std::optional<double> add(std::optional<double> a, std::optional<double> b) {
  if (!a || !b) return std::nullopt;
  return *a + *b;
}

}  // namespace detail

/// log E[exp(theta X(t))] for real theta; nullopt where the expectation is
/// infinite. Running averages are not integer valued and are rejected.
inline std::optional<double> log_mgf(const ProcessSpec& spec, double t, double theta) {
  validate(spec);
  auto spok = [&](int k, double l1, double l2) {
    double acc = 0.0;
    for (int j = 1; j <= k; ++j) acc += l1 * std::expm1(j * theta) + l2 * std::expm1(-j * theta);
    return t * acc;
  };
  return std::visit(
      Overloaded{
          [&](const Skellam& s) -> std::optional<double> { return spok(1, s.lambda1, s.lambda2); },
          [&](const PPoK& s) -> std::optional<double> { return spok(s.k, s.lambda, 0.0); },
          [&](const SPoK& s) -> std::optional<double> { return spok(s.k, s.lambda1, s.lambda2); },
          [&](const SFPP& s) { return detail::sfpp_log_mgf(s.alpha, s.lambda, t, theta); },
          [&](const TSFPP& s) { return detail::tsfpp_log_mgf(s.alpha, s.mu, s.lambda, t, theta); },
          [&](const SFSP& s) {
            return detail::add(detail::sfpp_log_mgf(s.alpha1, s.lambda1, t, theta),
                               detail::sfpp_log_mgf(s.alpha2, s.lambda2, t, -theta));
          },
          [&](const TSFSP& s) {
            return detail::add(detail::tsfpp_log_mgf(s.alpha1, s.mu1, s.lambda1, t, theta),
                               detail::tsfpp_log_mgf(s.alpha2, s.mu2, s.lambda2, t, -theta));
          },
          [&](const TimeChangedSPoK& s) -> std::optional<double> {
            double arg = 0.0;
            for (int j = 1; j <= s.k; ++j) {
              arg -= s.lambda1 * std::expm1(j * theta) + s.lambda2 * std::expm1(-j * theta);
            }
            const auto f = detail::laplace_exponent_extended(s.sub, arg);
            if (!f) return std::nullopt;
            return -t * *f;
          },
          [&](const auto&) -> std::optional<double> {
            throw UnsupportedFamily("log_mgf: running averages are not integer valued");
          }},
      spec);
}

/// SPoK probability generating function sum_m s^m P(S(t) = m), s > 0.
inline double spok_pgf(int k, double l1, double l2, double t, double s) {
  if (!(s > 0.0)) throw DomainError("spok_pgf: s must be positive");
  double acc = k * (l1 + l2);
  for (int j = 1; j <= k; ++j) acc -= l1 * std::pow(s, j) + l2 * std::pow(s, -j);
  return std::exp(-t * acc);
}

/// SFSP moment generating function in the form exp(-t [l1^a1 (1-e^th)^a1 +
/// l2^a2 (1-e^-th)^a2]). Real only at theta = 0 when an index is below 1;
/// evaluated on the principal branch for complex theta.
inline Complex sfsp_mgf(const SFSP& s, double t, Complex theta) {
  const Complex e = std::exp(theta);
  const Complex a = std::pow(s.lambda1, s.alpha1) * std::pow(1.0 - e, s.alpha1);
  const Complex b = std::pow(s.lambda2, s.alpha2) * std::pow(1.0 - 1.0 / e, s.alpha2);
  return std::exp(-t * (a + b));
}

/// TSFSP moment generating function from the two component transforms
/// (second component at -theta); nullopt outside the domain of finiteness.
inline std::optional<double> tsfsp_mgf(const TSFSP& s, double t, double theta) {
  const auto v = log_mgf(ProcessSpec{s}, t, theta);
  if (!v) return std::nullopt;
  return std::exp(*v);
}

/// The TSFSP transform with both components evaluated at +theta.
inline std::optional<double> tsfsp_mgf_same_sign(const TSFSP& s, double t, double theta) {
  const auto v = detail::add(detail::tsfpp_log_mgf(s.alpha1, s.mu1, s.lambda1, t, theta),
                             detail::tsfpp_log_mgf(s.alpha2, s.mu2, s.lambda2, t, theta));
  if (!v) return std::nullopt;
  return std::exp(*v);
}

}  // namespace skellamk
