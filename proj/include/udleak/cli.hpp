#pragma once

// Command-line front end: argument and config-file parsing, grid expansion,
// concurrent evaluation and CSV/JSON emission.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 quadrature failure
// or failed --validate check, 3 perturbative breakdown under --strict.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "udleak/density.hpp"
#include "udleak/entanglement.hpp"
#include "udleak/errors.hpp"
#include "udleak/integrals.hpp"
#include "udleak/model.hpp"

namespace udleak::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumeric = 2;
inline constexpr int kExitStrict = 3;

/// Agreement required by --validate.
inline constexpr double kRateAgreementTol = 1e-10;
inline constexpr double kMeasureAgreementTol = 1e-8;
inline constexpr double kSlopeRelTol = 0.02;

class UsageError : public Error {
 public:
  using Error::Error;
};

enum class OutputFormat { csv, json };

inline const std::vector<std::string>& sweepable_parameters() {
  static const std::vector<std::string> names{"delta_e",    "mass",  "distance", "coupling_a",
                                              "coupling_b", "alpha", "sigma"};
  return names;
}

/// name=start:stop:steps. Value i is start + i (stop - start) / (steps - 1).
struct SweepSpec {
  std::string name;
  double start = 0.0;
  double stop = 0.0;
  int steps = 1;

  double value(int i) const {
    if (steps == 1) return start;
    return start + i * (stop - start) / (steps - 1);
  }
};

namespace detail {

inline std::optional<double> parse_real(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::string canonical_key(std::string k) {
  std::replace(k.begin(), k.end(), '-', '_');
  return k;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline SweepSpec parse_sweep(const std::string& token) {
  auto bad = [&](const std::string& why) {
    return UsageError("malformed sweep '" + token + "': " + why);
  };
  const auto eq = token.find('=');
  if (eq == std::string::npos) throw bad("expected name=start:stop:steps");
  SweepSpec s;
  s.name = detail::canonical_key(detail::trim(token.substr(0, eq)));
  const auto& names = sweepable_parameters();
  if (std::find(names.begin(), names.end(), s.name) == names.end())
    throw bad("unknown parameter '" + s.name + "'");
  std::vector<std::string> parts;
  std::stringstream rest(token.substr(eq + 1));
  for (std::string p; std::getline(rest, p, ':');) parts.push_back(detail::trim(p));
  if (parts.size() != 3) throw bad("expected start:stop:steps");
  const auto a = detail::parse_real(parts[0]);
  const auto b = detail::parse_real(parts[1]);
  if (!a) throw bad("start '" + parts[0] + "' is not a number");
  if (!b) throw bad("stop '" + parts[1] + "' is not a number");
  const auto n = detail::parse_real(parts[2]);
  if (!n || *n != std::floor(*n) || *n < 1.0 || *n > 1e7)
    throw bad("steps '" + parts[2] + "' is not an integer >= 1");
  if (*a > *b) throw bad("start exceeds stop");
  s.start = *a;
  s.stop = *b;
  s.steps = static_cast<int>(*n);
  return s;
}

/// Parameters of one grid point before validation.
struct PointParams {
  SwitchingKind mode = SwitchingKind::eternal;
  double delta_e = 1.0;
  double mass = 0.0;
  double distance = 1.0;
  double coupling_a = 0.1;
  double coupling_b = 0.1;
  double alpha = 1.0 / std::sqrt(2.0);
  int gamma_sign = +1;
  std::optional<double> sigma;
  double c = 1.0;

  void set(const std::string& name, double v) {
    if (name == "delta_e") delta_e = v;
    else if (name == "mass") mass = v;
    else if (name == "distance") distance = v;
    else if (name == "coupling_a") coupling_a = v;
    else if (name == "coupling_b") coupling_b = v;
    else if (name == "alpha") alpha = v;
    else if (name == "sigma") sigma = v;
    else throw UsageError("unknown parameter '" + name + "'");
  }

  ValidatedScenario scenario() const {
    const SwitchingSpec sw = mode == SwitchingKind::eternal
                                 ? SwitchingSpec::eternal()
                                 : SwitchingSpec::gaussian(sigma.value_or(NAN));
    return validate_config({delta_e, coupling_a, coupling_b, distance}, {mass},
                           InitialState::from_alpha(alpha, gamma_sign), sw, {c});
  }
};

struct RunPlan {
  PointParams base;
  std::vector<SweepSpec> sweeps;  ///< first declared is outermost
  QuadratureSettings quad;
  bool shield_b = false;
  bool validate = false;
  bool strict = false;
  OutputFormat format = OutputFormat::csv;
  std::string output;    ///< empty: standard output
  unsigned threads = 0;  ///< 0: hardware concurrency

  std::size_t grid_size() const {
    std::size_t n = 1;
    for (const auto& s : sweeps) n *= static_cast<std::size_t>(s.steps);
    return n;
  }

  PointParams point(std::size_t index) const {
    PointParams p = base;
    for (auto it = sweeps.rbegin(); it != sweeps.rend(); ++it) {
      const auto n = static_cast<std::size_t>(it->steps);
      p.set(it->name, it->value(static_cast<int>(index % n)));
      index /= n;
    }
    if (shield_b) p.coupling_b = 0.0;
    return p;
  }
};

/// Rejects plans whose grid contains an invalid scenario.
inline void check_plan(const RunPlan& plan) {
  bool sigma_swept = false;
  for (std::size_t i = 0; i < plan.sweeps.size(); ++i) {
    sigma_swept = sigma_swept || plan.sweeps[i].name == "sigma";
    for (std::size_t j = 0; j < i; ++j)
      if (plan.sweeps[i].name == plan.sweeps[j].name)
        throw UsageError("parameter '" + plan.sweeps[i].name + "' swept twice");
  }
  if (plan.base.mode == SwitchingKind::gaussian && !plan.base.sigma && !sigma_swept)
    throw ConfigError({"sigma"}, "gaussian mode needs sigma (--sigma or --sweep sigma=...)");
  if (plan.base.mode == SwitchingKind::eternal && sigma_swept)
    throw ConfigError({"sigma"}, "sigma can only be swept in gaussian mode");
  validate_settings(plan.quad);
  for (std::size_t i = 0; i < plan.grid_size(); ++i) {
    try {
      (void)plan.point(i).scenario();
    } catch (const ConfigError& e) {
      throw ConfigError(e.fields(), "grid point " + std::to_string(i) + ": " + e.what());
    }
  }
}

struct ParseResult {
  std::optional<RunPlan> plan;
  int exit_code = kExitOk;
  std::string message;  ///< help text or error
};

namespace detail {

inline bool is_flag_key(const std::string& k) {
  return k == "shield_b" || k == "validate" || k == "strict";
}

/// `key = value` lines with `#` comments, turned into command-line tokens.
inline std::vector<std::string> config_tokens(const std::string& path,
                                              std::size_t& sweep_count) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  static const std::vector<std::string> keys{
      "mode",       "delta_e", "mass",      "distance", "coupling_a", "coupling_b",
      "alpha",      "gamma_sign", "sigma",  "c_light",  "epsilon",    "p_max",
      "quad_tol",   "sweep",   "shield_b",  "validate", "strict",     "format",
      "output",     "threads"};
  std::vector<std::string> out;
  sweep_count = 0;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = path + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw UsageError(where + ": expected key = value, got '" + line + "'");
    const std::string key = canonical_key(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw UsageError(where + ": unknown key '" + key + "'");
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (is_flag_key(key)) {
      if (value == "true" || value == "1" || value == "yes") out.push_back(flag);
      else if (value != "false" && value != "0" && value != "no")
        throw UsageError(where + ": '" + value + "' is not a boolean for " + key);
      continue;
    }
    if (key == "sweep") ++sweep_count;
    out.push_back(flag + "=" + value);
  }
  return out;
}

}  // namespace detail

/// Parses argv. Never throws; errors come back as exit code 1 with a message.
inline ParseResult parse_args(int argc, const char* const* argv) {
  ParseResult result;
  try {
    std::vector<std::string> cmd;
    std::optional<std::string> config_path;
    for (int i = 1; i < argc; ++i) {
      const std::string t = argv[i];
      if (t == "--config") {
        if (i + 1 >= argc) throw UsageError("--config needs a path");
        config_path = argv[++i];
      } else if (t.rfind("--config=", 0) == 0) {
        config_path = t.substr(9);
      } else {
        cmd.push_back(t);
      }
    }
    std::size_t file_sweeps = 0;
    std::vector<std::string> tokens{argc > 0 ? argv[0] : "udleak"};
    if (config_path) {
      auto ft = detail::config_tokens(*config_path, file_sweeps);
      tokens.insert(tokens.end(), ft.begin(), ft.end());
    }
    tokens.insert(tokens.end(), cmd.begin(), cmd.end());

    RunPlan plan;
    PointParams& p = plan.base;
    CLI::App app{"Entanglement leakage of two Unruh-DeWitt detectors", "udleak"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    std::string mode = "eternal", gamma_sign = "+", format = "csv";
    double sigma = 0.0, epsilon = 1e-3;
    std::vector<std::string> sweeps;
    app.add_option("--mode", mode, "eternal or gaussian switching")
        ->check(CLI::IsMember({"eternal", "gaussian"}));
    app.add_option("--delta-e", p.delta_e, "energy gap")->capture_default_str();
    app.add_option("--mass", p.mass, "field mass")->capture_default_str();
    app.add_option("--distance", p.distance, "detector separation")->capture_default_str();
    app.add_option("--coupling-a", p.coupling_a, "coupling of detector A")->capture_default_str();
    app.add_option("--coupling-b", p.coupling_b, "coupling of detector B")->capture_default_str();
    app.add_option("--alpha", p.alpha, "amplitude of |gg>; gamma = sign sqrt(1 - alpha^2)")
        ->capture_default_str();
    app.add_option("--gamma-sign", gamma_sign, "sign of gamma: + or -")
        ->check(CLI::IsMember({"+", "-", "−", "+1", "-1"}));
    auto* sigma_opt = app.add_option("--sigma", sigma, "Gaussian switching width");
    app.add_option("--c-light", p.c, "speed of light")->capture_default_str();
    auto* eps_opt = app.add_option("--epsilon", epsilon, "regulator; extrapolated from 4e, 2e, e, e/2")
                        ->capture_default_str();
    app.add_option("--p-max", plan.quad.p_max, "momentum cutoff (0: automatic)")
        ->capture_default_str();
    app.add_option("--quad-tol", plan.quad.tol, "absolute quadrature tolerance per entry")
        ->capture_default_str();
    app.add_option("--sweep", sweeps, "name=start:stop:steps, repeatable")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    app.add_flag("--shield-b", plan.shield_b, "set coupling_b = 0");
    app.add_flag("--validate", plan.validate, "cross-check closed forms and quadrature");
    app.add_flag("--strict", plan.strict, "exit 3 on perturbative breakdown");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--output", plan.output, "output path (default standard output)");
    app.add_option("--threads", plan.threads, "worker threads (0: all cores)");
    app.add_option("--config")->description("key = value file; flags override it");

    std::vector<const char*> cargv;
    for (const auto& t : tokens) cargv.push_back(t.c_str());
    try {
      app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::CallForHelp&) {
      result.message = app.help();
      return result;
    } catch (const CLI::ParseError& e) {
      throw UsageError(e.what());
    }

    p.mode = mode == "gaussian" ? SwitchingKind::gaussian : SwitchingKind::eternal;
    p.gamma_sign = (gamma_sign == "+" || gamma_sign == "+1") ? +1 : -1;
    if (sigma_opt->count() > 0) p.sigma = sigma;
    if (eps_opt->count() > 0) plan.quad.epsilons = {4 * epsilon, 2 * epsilon, epsilon, epsilon / 2};
    plan.format = format == "json" ? OutputFormat::json : OutputFormat::csv;
    if (sweeps.size() > file_sweeps)
      sweeps.erase(sweeps.begin(), sweeps.begin() + static_cast<std::ptrdiff_t>(file_sweeps));
    for (const auto& s : sweeps) plan.sweeps.push_back(parse_sweep(s));
    check_plan(plan);
    result.plan = std::move(plan);
  } catch (const Error& e) {
    result.exit_code = kExitUsage;
    result.message = e.what();
  }
  return result;
}

// ------------------------------------------------------------------ records

struct RunRecord {
  std::size_t index = 0;
  PointParams params;
  double gamma = 0.0;
  std::optional<IntegralSet> integrals;
  std::optional<EntanglementReport> report;
  double max_quad_error = 0.0;
  std::string error;                  ///< numeric failure, empty on success
  std::vector<std::string> warnings;
  std::vector<std::string> validation_failures;
};

namespace detail {

inline void validate_point(const ValidatedScenario& s, const QuadratureSettings& q,
                           RunRecord& rec) {
  const EntanglementReport& r = *rec.report;
  const IntegralSet& I = *rec.integrals;
  auto fail = [&](const std::string& what) { rec.validation_failures.push_back(what); };
  const bool eternal = I.mode == SwitchingKind::eternal;
  auto agree = [&](const char* what, double got, double tol) {
    if (got <= tol) return;
    std::ostringstream os;
    os << what << " closed-form vs numeric disagreement " << got << " exceeds " << tol;
    fail(os.str());
  };
  if (eternal) {
    agree("negativity rate", r.negativity_agreement, kRateAgreementTol);
    agree("concurrence rate", r.concurrence_agreement, kRateAgreementTol);
  } else {
    // Wootters on a matrix that is not positive semidefinite: the numeric path
    // projects out the O(C^4) negative eigenvalues, the block formulas do not.
    const double ind = r.diagnostics.perturbative_indicator;
    agree("negativity", r.negativity_agreement, kMeasureAgreementTol);
    agree("concurrence", r.concurrence_agreement, kMeasureAgreementTol + 5.0 * ind * ind);
  }
  if (!(r.diagnostics.hermiticity_residual <= 1e-12)) fail("density matrix not Hermitian");
  const double cab = std::abs(s.pair().coupling_a * s.pair().coupling_b);
  const double trace_tol = 1e-12 + 10.0 * cab * I.max_error();
  if (!(r.diagnostics.trace_residual <= trace_tol)) fail("trace deviates from 1");
  if (eternal) return;

  // Brute-force double time integrals for the leakage drivers.
  const double sigma = s.switching().sigma;
  const double window = 6.0 * sigma;
  const double p_max = (s.delta_e() + 8.0 / sigma) / s.c();
  OracleSettings o;
  o.rel_tol = 1e-6;
  o.abs_tol = 1e-7 * std::max(1.0, sigma);
  for (IntegralEntry e : {IntegralEntry::p_dd_a, IntegralEntry::m_re_a, IntegralEntry::x_ab}) {
    QuadResult<std::complex<double>> ref;
    try {
      ref = oracle_quadrature(e, s, window, p_max, 0.0, o);
    } catch (const Error& ex) {
      fail(std::string("oracle for ") + to_string(e) + " failed: " + ex.what());
      continue;
    }
    const double got = I[e].coeff.real();
    const double bound = 10.0 * (ref.error + I[e].error) + 1e-5 * std::abs(ref.value.real()) +
                         q.tol;
    if (!(std::abs(ref.value.real() - got) <= bound)) {
      std::ostringstream os;
      os << "oracle mismatch for " << to_string(e) << ": " << ref.value.real() << " vs " << got;
      fail(os.str());
    }
  }
}

}  // namespace detail

/// Evaluates grid point `index`. Numeric failures are recorded, not thrown.
inline RunRecord evaluate_point(const RunPlan& plan, std::size_t index) {
  RunRecord rec;
  rec.index = index;
  rec.params = plan.point(index);
  try {
    const ValidatedScenario s = rec.params.scenario();
    rec.gamma = s.state().gamma;
    rec.params.alpha = s.state().alpha;
    rec.integrals = integral_set(s, plan.quad);
    rec.max_quad_error = rec.integrals->max_error();
    rec.report = analyze(s, *rec.integrals);
    const double ind = rec.report->diagnostics.perturbative_indicator;
    if (ind > kPerturbativeWarn) {
      std::ostringstream os;
      os << "point " << index << ": perturbative indicator " << ind << " exceeds "
         << kPerturbativeWarn;
      rec.warnings.push_back(os.str());
    }
    if (plan.validate) detail::validate_point(s, plan.quad, rec);
  } catch (const QuadratureNonConvergence& e) {
    rec.error = std::string("quadrature did not converge (") + e.entry() + "): " + e.what();
  } catch (const Error& e) {
    rec.error = e.what();
  }
  return rec;
}

/// Evaluates every grid point on `threads` workers; results in grid order.
inline std::vector<RunRecord> evaluate_grid(const RunPlan& plan) {
  const std::size_t n = plan.grid_size();
  std::vector<RunRecord> out(n);
  unsigned workers = plan.threads ? plan.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) out[i] = evaluate_point(plan, i);
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return out;
}

/// For Gaussian sigma sweeps: least-squares slope of P'' against sigma, times
/// sqrt(pi), must match the eternal coefficient of the same point.
inline std::vector<std::string> sigma_slope_check(const RunPlan& plan,
                                                  const std::vector<RunRecord>& recs) {
  std::vector<std::string> failures;
  if (plan.base.mode != SwitchingKind::gaussian) return failures;
  std::size_t pos = plan.sweeps.size();
  for (std::size_t i = 0; i < plan.sweeps.size(); ++i)
    if (plan.sweeps[i].name == "sigma") pos = i;
  if (pos == plan.sweeps.size() || plan.sweeps[pos].steps < 2) return failures;

  std::map<std::string, std::vector<const RunRecord*>> groups;
  for (const auto& r : recs) {
    PointParams key = r.params;
    key.sigma.reset();
    std::ostringstream os;
    os.precision(17);
    os << key.delta_e << ' ' << key.mass << ' ' << key.distance << ' ' << key.c;
    groups[os.str()].push_back(&r);
  }
  for (const auto& [key, members] : groups) {
    std::vector<double> xs, ys;
    for (const RunRecord* r : members) {
      if (!r->integrals) continue;
      xs.push_back(*r->params.sigma);
      ys.push_back(r->integrals->p_dd_a.coeff.real());
    }
    if (xs.size() < 2) continue;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
    mx /= xs.size();
    my /= xs.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i)
      sxy += (xs[i] - mx) * (ys[i] - my), sxx += (xs[i] - mx) * (xs[i] - mx);
    const double coeff = std::sqrt(M_PI) * sxy / sxx;
    PointParams ep = members.front()->params;
    ep.mode = SwitchingKind::eternal;
    const ValidatedScenario es = ep.scenario();
    const double expected = eternal_integral_set(es).p_dd_a.coeff.real();
    const double scale = std::max(expected, es.delta_e() / (2.0 * es.c() * es.c() * es.c()));
    if (!(std::abs(coeff - expected) <= kSlopeRelTol * scale)) {
      std::ostringstream os;
      os << "sigma slope of P'' gives " << coeff << ", eternal coefficient is " << expected
         << " (delta_e mass distance c = " << key << ")";
      failures.push_back(os.str());
    }
  }
  return failures;
}

// ----------------------------------------------------------------- emission

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline const char* csv_header() {
  return "mode,delta_e,mass,c,distance,coupling_a,coupling_b,alpha,gamma,sigma,"
         "initial_negativity,initial_concurrence,negativity_rate,concurrence_rate,"
         "negativity,concurrence,perturbative_ok,max_quad_error";
}

inline std::string csv_row(const RunRecord& r) {
  const PointParams& p = r.params;
  auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
  std::ostringstream os;
  os << to_string(p.mode) << ',' << format_real(p.delta_e) << ',' << format_real(p.mass) << ','
     << format_real(p.c) << ',' << format_real(p.distance) << ',' << format_real(p.coupling_a)
     << ',' << format_real(p.coupling_b) << ',' << format_real(p.alpha) << ','
     << format_real(r.gamma) << ',' << (p.mode == SwitchingKind::gaussian ? opt(p.sigma) : "")
     << ',';
  if (r.report) {
    const EntanglementReport& e = *r.report;
    os << format_real(e.initial_negativity) << ',' << format_real(e.initial_concurrence) << ','
       << opt(e.negativity_rate) << ',' << opt(e.concurrence_rate) << ',' << opt(e.negativity)
       << ',' << opt(e.concurrence) << ',' << (e.perturbative_ok ? "true" : "false") << ','
       << format_real(r.max_quad_error);
  } else {
    os << ",,,,,,,";
  }
  return os.str();
}

namespace detail {

inline nlohmann::json complex_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

inline nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace detail

inline nlohmann::json record_json(const RunRecord& r) {
  using nlohmann::json;
  const PointParams& p = r.params;
  json j;
  j["index"] = r.index;
  j["mode"] = to_string(p.mode);
  j["parameters"] = {{"delta_e", p.delta_e},       {"mass", p.mass},
                     {"c", p.c},                   {"distance", p.distance},
                     {"coupling_a", p.coupling_a}, {"coupling_b", p.coupling_b},
                     {"alpha", p.alpha},           {"gamma", r.gamma},
                     {"sigma", p.mode == SwitchingKind::gaussian ? detail::opt_json(p.sigma)
                                                                 : json(nullptr)}};
  if (r.integrals) {
    json ints = json::object();
    for (IntegralEntry e : kAllEntries) {
      const RegulatedValue& v = (*r.integrals)[e];
      ints[to_string(e)] = {{"coeff", detail::complex_json(v.coeff)},
                            {"delta0_power", v.delta0_power},
                            {"error", v.error}};
    }
    j["integrals"] = ints;
  }
  if (r.report) {
    const EntanglementReport& e = *r.report;
    auto list = [](const EigenList& l) {
      return json{{"values", l.values}, {"provenance", to_string(l.provenance)}};
    };
    j["initial_negativity"] = e.initial_negativity;
    j["initial_concurrence"] = e.initial_concurrence;
    j["negativity_rate"] = detail::opt_json(e.negativity_rate);
    j["concurrence_rate"] = detail::opt_json(e.concurrence_rate);
    j["negativity"] = detail::opt_json(e.negativity);
    j["concurrence"] = detail::opt_json(e.concurrence);
    j["shielded"] = e.shielded;
    j["negative_pt_index"] = e.negative_index;
    j["closed_numeric_agreement"] = e.agreement;
    j["eigenvalues"] = {{"partial_transpose_closed", list(e.pt_closed)},
                        {"partial_transpose_numeric", list(e.pt_numeric)},
                        {"wootters_closed", list(e.wootters_closed)},
                        {"wootters_numeric", list(e.wootters_numeric)}};
    j["diagnostics"] = {{"hermiticity_residual", e.diagnostics.hermiticity_residual},
                        {"trace_residual", e.diagnostics.trace_residual},
                        {"min_eigenvalue", e.diagnostics.min_eigenvalue},
                        {"perturbative_indicator", e.diagnostics.perturbative_indicator}};
    j["perturbative_ok"] = e.perturbative_ok;
  }
  j["max_quad_error"] = r.max_quad_error;
  j["error"] = r.error.empty() ? json(nullptr) : json(r.error);
  if (!r.validation_failures.empty()) j["validation_failures"] = r.validation_failures;
  return j;
}

inline void emit(const RunPlan& plan, const std::vector<RunRecord>& recs, std::ostream& out) {
  if (plan.format == OutputFormat::csv) {
    out << csv_header() << '\n';
    for (const auto& r : recs) out << csv_row(r) << '\n';
    return;
  }
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : recs) arr.push_back(record_json(r));
  out << arr.dump(2) << '\n';
}

/// Runs a checked plan, writing records to `out` and diagnostics to `err`.
inline int run_plan(const RunPlan& plan, std::ostream& out, std::ostream& err) {
  const std::vector<RunRecord> recs = evaluate_grid(plan);
  int code = kExitOk;
  bool breakdown = false;
  for (const auto& r : recs) {
    for (const auto& w : r.warnings) err << "warning: " << w << '\n';
    if (!r.error.empty()) {
      err << "error: point " << r.index << ": " << r.error << '\n';
      code = kExitNumeric;
    }
    for (const auto& f : r.validation_failures) {
      err << "validate: point " << r.index << ": " << f << '\n';
      code = kExitNumeric;
    }
    if (r.report && r.report->diagnostics.perturbative_indicator > kPerturbativeFail)
      breakdown = true;
  }
  if (plan.validate) {
    for (const auto& f : sigma_slope_check(plan, recs)) {
      err << "validate: " << f << '\n';
      code = kExitNumeric;
    }
  }
  emit(plan, recs, out);
  if (code == kExitOk && plan.strict && breakdown) {
    err << "strict: perturbative indicator exceeds " << kPerturbativeFail << '\n';
    code = kExitStrict;
  }
  return code;
}

/// As above, writing to plan.output or standard output.
inline int run_plan(const RunPlan& plan) {
  if (plan.output.empty()) return run_plan(plan, std::cout, std::cerr);
  std::ofstream file(plan.output);
  if (!file) {
    std::cerr << "error: cannot open output file '" << plan.output << "'\n";
    return kExitUsage;
  }
  const int code = run_plan(plan, file, std::cerr);
  file.flush();
  if (!file) {
    std::cerr << "error: failed writing '" << plan.output << "'\n";
    return kExitUsage;
  }
  return code;
}

}  // namespace udleak::cli
