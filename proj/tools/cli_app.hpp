#pragma once

// Command-line front end. run() takes the argument list without the program
// name and returns the exit status: 0 success, 1 usage or domain error,
// 2 verification failure.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "skellamk/skellamk.hpp"

namespace skellamk::cli {

struct VerificationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::pair<std::int64_t, std::int64_t> parse_window(const std::string& text) {
  const auto colon = text.find(':', 1);
  if (colon == std::string::npos) throw DomainError("window must look like lo:hi");
  const auto lo = parse_int(text.substr(0, colon));
  const auto hi = parse_int(text.substr(colon + 1));
  if (hi < lo) throw DomainError("window: hi < lo");
  return {lo, hi};
}

inline std::string pick_format(const RunConfig& c, const std::string& fallback) {
  const std::string f = c.format.empty() ? fallback : c.format;
  if (f != "csv" && f != "json") throw DomainError("format must be csv or json");
  return f;
}

inline Json verdict(const Comparison& c, bool pass) {
  return Json{{"tv_distance", c.tv_distance}, {"chi2_stat", c.chi2_stat}, {"chi2_dof", c.chi2_dof},
              {"chi2_pvalue", c.chi2_pvalue}, {"pass", pass}};
}

inline bool passes(const Comparison& c, const RunConfig& cfg) {
  const bool tv_ok = cfg.n_samples < 100000 || c.tv_distance <= cfg.tv_max;
  return c.chi2_pvalue >= cfg.p_min && tv_ok;
}

// ---------------------------------------------------------------------------

inline void cmd_simulate(const RunConfig& c, std::ostream& out) {
  auto g = Stream::for_replicate(c.seed, 0);
  const std::string fmt = pick_format(c, "csv");
  if (std::holds_alternative<RunningAvgPPoK>(c.spec) || std::holds_alternative<RunningAvgSPoK>(c.spec)) {
    // Running average on a grid of ceil(1000 T) steps, from one exact path.
    Trajectory path;
    if (const auto* r = std::get_if<RunningAvgPPoK>(&c.spec)) {
      path = simulate_ppok(r->k, r->lambda, c.t, g);
    } else {
      const auto& r2 = std::get<RunningAvgSPoK>(c.spec);
      path = simulate_skellam_type(SPoK{r2.k, r2.lambda1, r2.lambda2}, c.t, g);
    }
    const auto n = static_cast<std::int64_t>(std::ceil(1000.0 * c.t));
    std::vector<std::pair<double, double>> rows{{0.0, 0.0}};
    for (std::int64_t i = 1; i <= n; ++i) {
      const double s = i == n ? c.t : c.t * static_cast<double>(i) / static_cast<double>(n);
      rows.emplace_back(s, running_average(path, s));
    }
    if (fmt == "csv") {
      write_grid_csv(out, rows);
    } else {
      Json j{{"spec", to_json(c.spec)}, {"t", Json::array()}, {"value", Json::array()}};
      for (const auto& [s, v] : rows) {
        j["t"].push_back(s);
        j["value"].push_back(v);
      }
      out << j.dump() << '\n';
    }
    return;
  }
  Trajectory path;
  if (std::holds_alternative<PPoK>(c.spec)) {
    const auto& p = std::get<PPoK>(c.spec);
    path = simulate_ppok(p.k, p.lambda, c.t, g);
  } else if (std::holds_alternative<Skellam>(c.spec) || std::holds_alternative<SPoK>(c.spec)) {
    path = simulate_skellam_type(c.spec, c.t, g);
  } else {
    const auto n = static_cast<std::int64_t>(std::ceil(1000.0 * c.t));
    path = simulate_time_changed(c.spec, c.t, n, g);
  }
  if (fmt == "csv") {
    write_trajectory_csv(out, path);
  } else {
    out << Json{{"spec", to_json(c.spec)},
                {"horizon", path.horizon},
                {"initial_value", path.initial_value},
                {"epochs", path.epochs},
                {"values", path.values}}
               .dump()
        << '\n';
  }
}

inline PmfOptions table_options(const RunConfig& c) {
  PmfOptions o;
  o.tol = c.tol;
  o.window = c.window;
  if (c.form == "closed") {
    if (!std::holds_alternative<SPoK>(c.spec)) throw DomainError("--form closed applies to spok only");
    o.spok_form = SpokForm::closed_form;
  } else if (c.form != "default") {
    throw DomainError("form must be default or closed");
  }
  return o;
}

inline void cmd_pmf(const RunConfig& c, std::ostream& out) {
  const auto table = pmf_table(c.spec, c.t, table_options(c));
  if (pick_format(c, "json") == "json") {
    out << to_json(table).dump() << '\n';
  } else {
    write_pmf_csv(out, table);
  }
}

inline void cmd_levy(const RunConfig& c, std::ostream& out) {
  const auto m = levy_measure(c.spec, c.truncation);
  if (pick_format(c, "json") == "json") {
    out << to_json(m).dump() << '\n';
  } else {
    write_levy_csv(out, m);
  }
}

inline void cmd_moments(const RunConfig& c, std::ostream& out) {
  const auto m = moments(c.spec, c.t);
  const double s = c.s ? *c.s : c.t / 2.0;
  const double cov = covariance(c.spec, s, c.t);
  Json j{{"spec", to_json(c.spec)}, {"t", c.t},  {"mean", m.mean},
         {"variance", m.variance},  {"s", s},    {"covariance", cov}};
  const bool ra = std::holds_alternative<RunningAvgPPoK>(c.spec) ||
                  std::holds_alternative<RunningAvgSPoK>(c.spec);
  if (ra) j["covariance_exact"] = running_average_covariance_exact(c.spec, s, c.t);
  if (pick_format(c, "json") == "json") {
    out << j.dump() << '\n';
    return;
  }
  out << "quantity,value\n";
  out << "mean," << format_double(m.mean) << '\n';
  out << "variance," << format_double(m.variance) << '\n';
  out << "s," << format_double(s) << '\n';
  out << "covariance," << format_double(cov) << '\n';
  if (ra) out << "covariance_exact," << format_double(j["covariance_exact"].get<double>()) << '\n';
}

inline int cmd_verify(const RunConfig& c, std::ostream& out) {
  Json report{{"spec", to_json(c.spec)}, {"t", c.t}, {"n_samples", c.n_samples}, {"seed", c.seed}};
  bool pass = false;
  const bool ra = std::holds_alternative<RunningAvgPPoK>(c.spec) ||
                  std::holds_alternative<RunningAvgSPoK>(c.spec);
  if (ra) {
    // Compound-Poisson sampling against pathwise integration.
    const auto a = replicate<double>(c.n_samples, c.seed, [&](Stream& g) {
      return simulate_running_avg_compound(c.spec, c.t, g);
    });
    const auto b = replicate<double>(c.n_samples, c.seed ^ 0x5bd1e995ULL, [&](Stream& g) {
      return sample_terminal_real(c.spec, c.t, g);
    });
    const auto ks = ks_two_sample(a, b);
    pass = ks.pvalue >= c.p_min;
    report["checks"] = Json::array(
        {Json{{"reference", "pathwise"}, {"ks_statistic", ks.statistic}, {"ks_pvalue", ks.pvalue}, {"pass", pass}}});
  } else {
    const auto emp = estimate_pmf(c.spec, c.t, c.n_samples, c.seed);
    PmfOptions o;
    o.tol = std::min(c.tol, 1e-9);
    const auto table = pmf_table(c.spec, c.t, o);
    const auto cmp = compare(emp, table);
    pass = passes(cmp, c);
    Json check = verdict(cmp, pass);
    check["reference"] = "default";
    report["checks"] = Json::array({check});
    if (const auto* s = std::get_if<SPoK>(&c.spec); s && s->k >= 2 && s->lambda2 > 0.0) {
      o.spok_form = SpokForm::closed_form;
      const auto cf = compare(emp, pmf_table(c.spec, c.t, o));
      const bool cf_pass = passes(cf, c);
      Json cj = verdict(cf, cf_pass);
      cj["reference"] = "closed_form";
      report["checks"].push_back(cj);
      if (!cf_pass) {
        report["note"] =
            "the Bessel closed form (Skellam with rates k*l1, k*l2) is rejected; the verdict uses the "
            "definition (difference of two order-k Poisson processes)";
      }
    }
  }
  report["pass"] = pass;
  if (pick_format(c, "json") == "json") {
    out << report.dump() << '\n';
  } else {
    out << "reference,statistic,pvalue,pass\n";
    for (const auto& ch : report["checks"]) {
      const bool ks = ch.contains("ks_statistic");
      out << ch["reference"].get<std::string>() << ','
          << format_double(ks ? ch["ks_statistic"].get<double>() : ch["tv_distance"].get<double>()) << ','
          << format_double(ks ? ch["ks_pvalue"].get<double>() : ch["chi2_pvalue"].get<double>()) << ','
          << (ch["pass"].get<bool>() ? "true" : "false") << '\n';
    }
  }
  return pass ? 0 : 2;
}

inline std::pair<std::int64_t, std::int64_t> default_govern_window(const ProcessSpec& spec) {
  if (std::holds_alternative<PPoK>(spec) || std::holds_alternative<SFPP>(spec) ||
      std::holds_alternative<TSFPP>(spec)) {
    return {0, 15};
  }
  return {-10, 10};
}

inline int cmd_govern(const RunConfig& c, std::ostream& out) {
  GoverningOptions o;
  o.dt = c.dt;
  o.truncation = c.truncation;
  o.table = table_options(c);
  o.table.window.reset();
  const auto w = c.window ? *c.window : default_govern_window(c.spec);
  const double r = governing_residual(c.spec, c.t, w, o);
  const bool pass = r <= c.residual_max;
  if (pick_format(c, "json") == "json") {
    out << Json{{"spec", to_json(c.spec)}, {"t", c.t}, {"window", Json::array({w.first, w.second})},
                {"max_residual", r}, {"threshold", c.residual_max}, {"pass", pass}}
               .dump()
        << '\n';
  } else {
    out << "max_residual,threshold,pass\n"
        << format_double(r) << ',' << format_double(c.residual_max) << ',' << (pass ? "true" : "false")
        << '\n';
  }
  return pass ? 0 : 2;
}

}  // namespace detail

/// Parses args into a RunConfig; --config supplies a base that flags override.
inline RunConfig parse_args(const std::vector<std::string>& args) {
  CLI::App app{"Skellam-type processes of order k"};
  app.set_help_flag();
  std::string command;
  std::string process;
  std::string params;
  std::string config;
  std::string window;
  RunConfig c;
  app.add_option("command", command, "simulate | pmf | levy | moments | verify | govern")->required();
  auto* o_process = app.add_option("--process", process);
  auto* o_params = app.add_option("--params", params);
  auto* o_t = app.add_option("--t,--T", c.t);
  auto* o_n = app.add_option("--n", c.n_samples);
  auto* o_seed = app.add_option("--seed", c.seed);
  auto* o_tol = app.add_option("--tol", c.tol);
  auto* o_out = app.add_option("--out", c.out);
  auto* o_format = app.add_option("--format", c.format);
  auto* o_form = app.add_option("--form", c.form);
  auto* o_trunc = app.add_option("--truncation", c.truncation);
  auto* o_s = app.add_option("--s");
  auto* o_window = app.add_option("--window", window);
  auto* o_dt = app.add_option("--dt", c.dt);
  auto* o_tv = app.add_option("--tv-max", c.tv_max);
  auto* o_p = app.add_option("--p-min", c.p_min);
  auto* o_res = app.add_option("--threshold", c.residual_max);
  app.add_option("--config", config);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    throw DomainError(std::string("usage: ") + e.what());
  }

  RunConfig base;
  if (!config.empty()) {
    std::ifstream in(config);
    if (!in) throw DomainError("cannot open config '" + config + "'");
    try {
      base = run_config_from_json(Json::parse(in));
    } catch (const Json::exception& e) {
      throw DomainError(std::string("config: ") + e.what());
    }
  }
  RunConfig r = base;
  r.command = command;
  if (o_process->count() || o_params->count()) {
    if (!o_process->count()) throw DomainError("--params needs --process");
    r.spec = spec_from_params(process, parse_params(params));
  } else if (config.empty()) {
    throw DomainError("--process is required");
  }
  if (o_t->count()) r.t = c.t;
  if (o_n->count()) r.n_samples = c.n_samples;
  if (o_seed->count()) r.seed = c.seed;
  if (o_tol->count()) r.tol = c.tol;
  if (o_out->count()) r.out = c.out;
  if (o_format->count()) r.format = c.format;
  if (o_form->count()) r.form = c.form;
  if (o_trunc->count()) r.truncation = c.truncation;
  if (o_s->count()) r.s = parse_double(o_s->as<std::string>());
  if (o_window->count()) r.window = detail::parse_window(window);
  if (o_dt->count()) r.dt = c.dt;
  if (o_tv->count()) r.tv_max = c.tv_max;
  if (o_p->count()) r.p_min = c.p_min;
  if (o_res->count()) r.residual_max = c.residual_max;

  if (!(r.t > 0.0) || !std::isfinite(r.t)) throw DomainError("--t must be positive");
  if (r.n_samples < 1) throw DomainError("--n must be >= 1");
  if (!(r.tol > 0.0)) throw DomainError("--tol must be positive");
  if (r.truncation < 1) throw DomainError("--truncation must be >= 1");
  return r;
}

inline int execute(const RunConfig& c, std::ostream& out) {
  if (c.command == "simulate") {
    detail::cmd_simulate(c, out);
    return 0;
  }
  if (c.command == "pmf") {
    detail::cmd_pmf(c, out);
    return 0;
  }
  if (c.command == "levy") {
    detail::cmd_levy(c, out);
    return 0;
  }
  if (c.command == "moments") {
    detail::cmd_moments(c, out);
    return 0;
  }
  if (c.command == "verify") return detail::cmd_verify(c, out);
  if (c.command == "govern") return detail::cmd_govern(c, out);
  throw DomainError("unknown command '" + c.command + "'");
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig c = parse_args(args);
    if (c.out.empty()) return execute(c, out);
    std::ostringstream buf;
    const int status = execute(c, buf);
    std::ofstream file(c.out, std::ios::binary);
    if (!file) throw DomainError("cannot write '" + c.out + "'");
    file << buf.str();
    return status;
  } catch (const CoverageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace skellamk::cli
