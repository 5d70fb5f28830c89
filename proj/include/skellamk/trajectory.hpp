#pragma once

// Exact path simulation: piecewise-constant jump paths, their running
// averages, and paths run on a subordinator clock.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "skellamk/errors.hpp"
#include "skellamk/process.hpp"
#include "skellamk/rng.hpp"
#include "skellamk/subordinators.hpp"

namespace skellamk {

/// Right-continuous piecewise-constant path on [0, horizon]. values[i] is the
/// state from epochs[i] until the next epoch.
struct Trajectory {
  double horizon = 0.0;
  std::int64_t initial_value = 0;
  std::vector<double> epochs;
  std::vector<std::int64_t> values;

  [[nodiscard]] std::int64_t value_at(double t) const {
    const auto it = std::upper_bound(epochs.begin(), epochs.end(), t);
    if (it == epochs.begin()) return initial_value;
    return values[static_cast<std::size_t>(it - epochs.begin()) - 1];
  }
  [[nodiscard]] std::int64_t terminal() const {
    return values.empty() ? initial_value : values.back();
  }
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// PPoK path: exponential gaps at total rate k*lambda, jump sizes uniform on {1..k}.
template <BitGenerator64 G>
Trajectory simulate_ppok(int k, double lambda, double horizon, G& g) {
  if (k < 1 || !(lambda >= 0.0) || !(horizon > 0.0)) {
    throw DomainError("simulate_ppok: needs k >= 1, lambda >= 0, T > 0");
  }
  Trajectory path;
  path.horizon = horizon;
  if (lambda == 0.0) return path;
  const double rate = k * lambda;
  double t = exponential(g, rate);
  std::int64_t x = 0;
  while (t <= horizon) {
    x += uniform_jump(g, k);
    path.epochs.push_back(t);
    path.values.push_back(x);
    t += exponential(g, rate);
  }
  return path;
}

/// Pointwise difference a - b of two paths on the same horizon, epochs merged.
inline Trajectory difference(const Trajectory& a, const Trajectory& b) {
  Trajectory out;
  out.horizon = a.horizon;
  out.initial_value = a.initial_value - b.initial_value;
  std::size_t i = 0;
  std::size_t j = 0;
  std::int64_t va = a.initial_value;
  std::int64_t vb = b.initial_value;
  out.epochs.reserve(a.epochs.size() + b.epochs.size());
  out.values.reserve(a.epochs.size() + b.epochs.size());
  while (i < a.epochs.size() || j < b.epochs.size()) {
    double t = 0.0;
    if (j >= b.epochs.size() || (i < a.epochs.size() && a.epochs[i] <= b.epochs[j])) {
      t = a.epochs[i];
    } else {
      t = b.epochs[j];
    }
    while (i < a.epochs.size() && a.epochs[i] == t) va = a.values[i++];
    while (j < b.epochs.size() && b.epochs[j] == t) vb = b.values[j++];
    out.epochs.push_back(t);
    out.values.push_back(va - vb);
  }
  return out;
}

/// Skellam or SPoK path as the difference of two independent PPoK paths.
template <BitGenerator64 G>
Trajectory simulate_skellam_type(const ProcessSpec& spec, double horizon, G& g) {
  validate(spec);
  int k = 1;
  double l1 = 0.0;
  double l2 = 0.0;
  if (const auto* s = std::get_if<Skellam>(&spec)) {
    l1 = s->lambda1;
    l2 = s->lambda2;
  } else if (const auto* s = std::get_if<SPoK>(&spec)) {
    k = s->k;
    l1 = s->lambda1;
    l2 = s->lambda2;
  } else {
    throw UnsupportedFamily("simulate_skellam_type: needs skellam or spok, got " +
                            family_name(spec));
  }
  const Trajectory up = simulate_ppok(k, l1, horizon, g);
  const Trajectory down = simulate_ppok(k, l2, horizon, g);
  return difference(up, down);
}

/// (1/t) * integral over [0, t] of the path, summed exactly over its segments.
inline double running_average(const Trajectory& path, double t) {
  if (!(t > 0.0) || t > path.horizon) {
    throw DomainError("running_average: t must lie in (0, T]");
  }
  double area = 0.0;
  double prev_t = 0.0;
  double prev_v = static_cast<double>(path.initial_value);
  for (std::size_t i = 0; i < path.epochs.size() && path.epochs[i] <= t; ++i) {
    area += prev_v * (path.epochs[i] - prev_t);
    prev_t = path.epochs[i];
    prev_v = static_cast<double>(path.values[i]);
  }
  area += prev_v * (t - prev_t);
  return area / t;
}

/// Increment of a PPoK(k, lambda) over a duration: sum_j j * Poisson(lambda * duration).
template <BitGenerator64 G>
std::int64_t ppok_increment(int k, double lambda, double duration, G& g) {
  if (lambda == 0.0 || duration == 0.0) return 0;
  std::int64_t x = 0;
  for (int j = 1; j <= k; ++j) x += j * poisson(g, lambda * duration);
  return x;
}

namespace detail {

/// One component N(D(t)) of order k: a PPoK with rate lambda on clock D
/// (identity clock when nullopt).
struct ClockedPPoK {
  int k = 1;
  double lambda = 1.0;
  std::optional<SubordinatorSpec> clock;
};

template <BitGenerator64 G>
double clock_increment(const std::optional<SubordinatorSpec>& clock, double dt, G& g) {
  return clock ? sample_increment(*clock, dt, g) : dt;
}

/// Components of X = sum(+) - sum(-); `shared_clock` marks that all components
/// run on one common clock (time-changed SPoK) rather than on their own.
struct ClockedDecomposition {
  std::vector<ClockedPPoK> up;
  std::vector<ClockedPPoK> down;
  std::optional<SubordinatorSpec> shared_clock;
};

inline ClockedDecomposition decompose(const ProcessSpec& spec) {
  return std::visit(
      Overloaded{
          [](const Skellam& s) {
            return ClockedDecomposition{{{1, s.lambda1, {}}}, {{1, s.lambda2, {}}}, {}};
          },
          [](const PPoK& s) { return ClockedDecomposition{{{s.k, s.lambda, {}}}, {}, {}}; },
          [](const SPoK& s) {
            return ClockedDecomposition{{{s.k, s.lambda1, {}}}, {{s.k, s.lambda2, {}}}, {}};
          },
          [](const SFPP& s) {
            return ClockedDecomposition{{{1, s.lambda, fractional_clock(s.alpha)}}, {}, {}};
          },
          [](const TSFPP& s) {
            return ClockedDecomposition{{{1, s.lambda, tempered_clock(s.alpha, s.mu)}}, {}, {}};
          },
          [](const SFSP& s) {
            return ClockedDecomposition{{{1, s.lambda1, fractional_clock(s.alpha1)}},
                                        {{1, s.lambda2, fractional_clock(s.alpha2)}},
                                        {}};
          },
          [](const TSFSP& s) {
            return ClockedDecomposition{{{1, s.lambda1, tempered_clock(s.alpha1, s.mu1)}},
                                        {{1, s.lambda2, tempered_clock(s.alpha2, s.mu2)}},
                                        {}};
          },
          [](const TimeChangedSPoK& s) {
            return ClockedDecomposition{{{s.k, s.lambda1, {}}}, {{s.k, s.lambda2, {}}}, s.sub};
          },
          [](const auto& other) -> ClockedDecomposition {
            throw UnsupportedFamily("not an integer-valued family: " +
                                    family_name(ProcessSpec{other}));
          }},
      spec);
}

template <BitGenerator64 G>
std::int64_t decomposed_increment(const ClockedDecomposition& d, double dt, G& g) {
  std::int64_t x = 0;
  if (d.shared_clock) {
    const double ddt = sample_increment(*d.shared_clock, dt, g);
    for (const auto& c : d.up) x += ppok_increment(c.k, c.lambda, ddt, g);
    for (const auto& c : d.down) x -= ppok_increment(c.k, c.lambda, ddt, g);
    return x;
  }
  for (const auto& c : d.up) x += ppok_increment(c.k, c.lambda, clock_increment(c.clock, dt, g), g);
  for (const auto& c : d.down) {
    x -= ppok_increment(c.k, c.lambda, clock_increment(c.clock, dt, g), g);
  }
  return x;
}

}  // namespace detail

/// Path of a process run on subordinator clock(s), sampled on a uniform grid of
/// n_steps steps over [0, T]. Clock increments come from sample_increment; the
/// inner Poisson-type counts over each operational-time slice are exact.
/// Families: sfpp, tsfpp, sfsp, tsfsp, tcspok (and the clock-free skellam,
/// ppok, spok, which are then sampled on the grid too).
template <BitGenerator64 G>
Trajectory simulate_time_changed(const ProcessSpec& spec, double horizon, std::int64_t n_steps,
                                 G& g) {
  validate(spec);
  if (n_steps < 1) throw DomainError("simulate_time_changed: n_steps must be >= 1");
  if (!(horizon > 0.0)) throw DomainError("simulate_time_changed: T must be positive");
  const auto d = detail::decompose(spec);
  Trajectory path;
  path.horizon = horizon;
  const double dt = horizon / static_cast<double>(n_steps);
  std::int64_t x = 0;
  for (std::int64_t i = 1; i <= n_steps; ++i) {
    const std::int64_t inc = detail::decomposed_increment(d, dt, g);
    if (inc != 0) {
      x += inc;
      path.epochs.push_back(i == n_steps ? horizon : dt * static_cast<double>(i));
      path.values.push_back(x);
    }
  }
  return path;
}

/// Subordinated Skellam / PPoK / SPoK path X(D(t)) for an explicit clock.
template <BitGenerator64 G>
Trajectory simulate_time_changed(const ProcessSpec& inner, const SubordinatorSpec& sub,
                                 double horizon, std::int64_t n_steps, G& g) {
  validate(inner);
  validate(sub);
  return std::visit(
      Overloaded{[&](const Skellam& s) {
                   return simulate_time_changed(
                       TimeChangedSPoK{1, s.lambda1, s.lambda2, sub}, horizon, n_steps, g);
                 },
                 [&](const PPoK& s) {
                   return simulate_time_changed(TimeChangedSPoK{s.k, s.lambda, 0.0, sub}, horizon,
                                                n_steps, g);
                 },
                 [&](const SPoK& s) {
                   return simulate_time_changed(TimeChangedSPoK{s.k, s.lambda1, s.lambda2, sub},
                                                horizon, n_steps, g);
                 },
                 [&](const auto&) -> Trajectory {
                   throw UnsupportedFamily("simulate_time_changed: inner must be skellam, ppok "
                                           "or spok");
                 }},
      inner);
}

/// Terminal value X(t) of an integer-valued family. Clocked families draw the
/// clock value D(t) in a single exact increment.
template <BitGenerator64 G>
std::int64_t sample_terminal_count(const ProcessSpec& spec, double t, G& g) {
  const auto d = detail::decompose(spec);
  return detail::decomposed_increment(d, t, g);
}

/// Running-average value at t from the compound Poisson representation:
/// Poisson(k (l1 + l2) t) jumps, each i*U with i uniform on {1..k}, U uniform
/// on (0,1), and sign + with probability l1 / (l1 + l2).
template <BitGenerator64 G>
double simulate_running_avg_compound(const ProcessSpec& spec, double t, G& g) {
  validate(spec);
  if (!(t > 0.0)) throw DomainError("simulate_running_avg_compound: t must be positive");
  int k = 1;
  double l1 = 0.0;
  double l2 = 0.0;
  if (const auto* s = std::get_if<RunningAvgPPoK>(&spec)) {
    k = s->k;
    l1 = s->lambda;
  } else if (const auto* s = std::get_if<RunningAvgSPoK>(&spec)) {
    k = s->k;
    l1 = s->lambda1;
    l2 = s->lambda2;
  } else {
    throw UnsupportedFamily("simulate_running_avg_compound: needs ra-ppok or ra-spok");
  }
  const double w = l1 / (l1 + l2);
  const std::int64_t n = poisson(g, k * (l1 + l2) * t);
  double y = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const int size = uniform_jump(g, k);
    const double u = uniform_open(g);
    const bool up = l2 == 0.0 || uniform_closed_open(g) < w;
    y += (up ? 1.0 : -1.0) * size * u;
  }
  return y;
}

/// Terminal value of any family as a real number; running averages are taken
/// pathwise from a simulated PPoK/SPoK path.
template <BitGenerator64 G>
double sample_terminal_real(const ProcessSpec& spec, double t, G& g) {
  if (const auto* s = std::get_if<RunningAvgPPoK>(&spec)) {
    return running_average(simulate_ppok(s->k, s->lambda, t, g), t);
  }
  if (const auto* s = std::get_if<RunningAvgSPoK>(&spec)) {
    return running_average(simulate_skellam_type(SPoK{s->k, s->lambda1, s->lambda2}, t, g), t);
  }
  return static_cast<double>(sample_terminal_count(spec, t, g));
}

}  // namespace skellamk
