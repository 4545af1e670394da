// Experiment configuration: a strict key-value format with nested sections,
// kind-specific validation (including regime gating at load time), and a
// canonical hash that is stable under key reordering.
#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pulsefocus/closedform.hpp"
#include "pulsefocus/errors.hpp"
#include "pulsefocus/profiles.hpp"
#include "pulsefocus/regimes.hpp"

namespace pulsefocus {

enum class ExperimentKind {
  FreeCheck,
  SubcriticalRate,
  AppAccuracy,
  Absorption,
  Blowup,
  EnergyAudit,
};

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::FreeCheck: return "free_check";
    case ExperimentKind::SubcriticalRate: return "subcritical_rate";
    case ExperimentKind::AppAccuracy: return "app_accuracy";
    case ExperimentKind::Absorption: return "absorption";
    case ExperimentKind::Blowup: return "blowup";
    case ExperimentKind::EnergyAudit: return "energy_audit";
  }
  return "?";
}

/// One profile block ([u0] or [u1]) of the config.
struct ProfileSpec {
  std::string kind = "zero";  // zero | smooth_bump | polynomial | gaussian
  double amplitude = 0.0;
  std::string envelope = "constant";  // constant | linear
  double envelope_slope = 0.0;
  bool derivative_of_u0 = false;  // u1 only: U1 = d_z U0, making P_+ vanish
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::FreeCheck;
  // Parameter template; eps is swept from eps_list.
  double p = 3.0;
  double alpha = 0.0;
  double a = 0.0;
  double r0 = 1.0;
  double z0 = 1.0;
  std::vector<double> eps_list;
  std::vector<double> lambda_list;
  int resolution = 64;
  std::vector<double> snapshot_times;
  std::vector<double> q_list{2.0, 4.0, 8.0};
  double t_final = -1.0;  // < 0: derived per kind
  std::string out = ".";
  int workers = 1;
  bool deterministic = true;
  double slope_tolerance = 0.15;
  std::optional<double> r2_min;

  ProfileSpec u0;
  ProfileSpec u1;

  ProblemParams params_for(double eps) const {
    return ProblemParams{p, alpha, a, r0, z0, eps};
  }

  PulseProfile build_profile(const ProfileSpec& spec) const {
    PulseProfile prof;
    if (spec.kind == "zero") {
      prof = PulseProfile::zero(z0);
    } else {
      BumpKind bk;
      if (spec.kind == "smooth_bump") bk = BumpKind::SmoothBump;
      else if (spec.kind == "polynomial") bk = BumpKind::Polynomial;
      else if (spec.kind == "gaussian") bk = BumpKind::TruncatedGaussian;
      else throw ConfigError("unknown profile kind '" + spec.kind + "'");
      prof = make_bump(spec.amplitude, z0, bk);
    }
    if (spec.envelope == "linear")
      prof.envelope = Envelope::linear(spec.envelope_slope, r0);
    return prof;
  }

  PulseProfile build_u0() const { return build_profile(u0); }
  PulseProfile build_u1() const {
    if (u1.derivative_of_u0) return derivative_profile(build_u0());
    return build_profile(u1);
  }
  ReducedData build_data() const { return reduce(build_u0(), build_u1()); }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct ConfigLine {
  std::string section;
  std::string key;
  std::string value;
  int line_no = 0;
};

inline std::vector<ConfigLine> tokenize_config(const std::string& text) {
  std::vector<ConfigLine> out;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) +
                          ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    ConfigLine cl;
    cl.section = section;
    cl.key = trim(line.substr(0, eq));
    cl.value = trim(line.substr(eq + 1));
    cl.line_no = line_no;
    if (cl.key.empty() || cl.value.empty())
      throw ConfigError("line " + std::to_string(line_no) +
                        ": empty key or value");
    out.push_back(std::move(cl));
  }
  return out;
}

inline double parse_double(const ConfigLine& cl) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(cl.value, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != cl.value.size())
    throw ConfigError("line " + std::to_string(cl.line_no) + ": field '" +
                      cl.key + "' is not a number");
  return v;
}

inline int parse_int(const ConfigLine& cl) {
  const double v = parse_double(cl);
  if (v != std::floor(v))
    throw ConfigError("line " + std::to_string(cl.line_no) + ": field '" +
                      cl.key + "' must be an integer");
  return static_cast<int>(v);
}

inline bool parse_bool(const ConfigLine& cl) {
  if (cl.value == "true") return true;
  if (cl.value == "false") return false;
  throw ConfigError("line " + std::to_string(cl.line_no) + ": field '" +
                    cl.key + "' must be true or false");
}

inline std::vector<double> parse_list(const ConfigLine& cl) {
  std::vector<double> out;
  std::stringstream ss(cl.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty())
      throw ConfigError("line " + std::to_string(cl.line_no) + ": field '" +
                        cl.key + "' has an empty list entry");
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size())
      throw ConfigError("line " + std::to_string(cl.line_no) + ": field '" +
                        cl.key + "' has a non-numeric entry '" + item + "'");
    out.push_back(v);
  }
  if (out.empty())
    throw ConfigError("line " + std::to_string(cl.line_no) + ": field '" +
                      cl.key + "' is an empty list");
  return out;
}

inline bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace detail

/// Parse and validate a config from text. Unknown keys are rejected
/// (strict mode), duplicates are rejected, and kind-incompatible regimes
/// are rejected here rather than at run time.
inline ExperimentConfig parse_config(const std::string& text) {
  using detail::ConfigLine;
  ExperimentConfig cfg;

  static const std::map<std::string, std::set<std::string>> kKnown = {
      {"",
       {"kind", "resolution", "eps_list", "lambda_list", "snapshot_times",
        "q_list", "t_final", "out", "workers", "deterministic",
        "slope_tolerance", "r2_min"}},
      {"params", {"p", "alpha", "a", "r0", "z0"}},
      {"u0", {"kind", "amplitude", "envelope", "envelope_slope"}},
      {"u1",
       {"kind", "amplitude", "envelope", "envelope_slope",
        "derivative_of_u0"}},
  };

  std::set<std::string> seen;
  std::set<std::string> explicit_keys;
  bool q_list_set = false, snapshots_set = false, t_final_set = false;
  bool u1_kind_set = false, u1_amp_set = false;

  for (const ConfigLine& cl : detail::tokenize_config(text)) {
    const auto sec = kKnown.find(cl.section);
    if (sec == kKnown.end())
      throw ConfigError("line " + std::to_string(cl.line_no) +
                        ": unknown section [" + cl.section + "]");
    if (!sec->second.count(cl.key))
      throw ConfigError("line " + std::to_string(cl.line_no) +
                        ": unknown key '" + cl.key + "' in section [" +
                        cl.section + "]");
    const std::string full = cl.section + "/" + cl.key;
    if (!seen.insert(full).second)
      throw ConfigError("line " + std::to_string(cl.line_no) +
                        ": duplicate key '" + cl.key + "'");

    if (cl.section.empty()) {
      if (cl.key == "kind") {
        if (cl.value == "free_check") cfg.kind = ExperimentKind::FreeCheck;
        else if (cl.value == "subcritical_rate")
          cfg.kind = ExperimentKind::SubcriticalRate;
        else if (cl.value == "app_accuracy")
          cfg.kind = ExperimentKind::AppAccuracy;
        else if (cl.value == "absorption") cfg.kind = ExperimentKind::Absorption;
        else if (cl.value == "blowup") cfg.kind = ExperimentKind::Blowup;
        else if (cl.value == "energy_audit")
          cfg.kind = ExperimentKind::EnergyAudit;
        else
          throw ConfigError("line " + std::to_string(cl.line_no) +
                            ": unknown experiment kind '" + cl.value + "'");
      } else if (cl.key == "resolution") {
        cfg.resolution = detail::parse_int(cl);
      } else if (cl.key == "eps_list") {
        cfg.eps_list = detail::parse_list(cl);
      } else if (cl.key == "lambda_list") {
        cfg.lambda_list = detail::parse_list(cl);
      } else if (cl.key == "snapshot_times") {
        cfg.snapshot_times = detail::parse_list(cl);
        snapshots_set = true;
      } else if (cl.key == "q_list") {
        cfg.q_list = detail::parse_list(cl);
        q_list_set = true;
      } else if (cl.key == "t_final") {
        cfg.t_final = detail::parse_double(cl);
        t_final_set = true;
      } else if (cl.key == "out") {
        cfg.out = cl.value;
      } else if (cl.key == "workers") {
        cfg.workers = detail::parse_int(cl);
      } else if (cl.key == "deterministic") {
        cfg.deterministic = detail::parse_bool(cl);
      } else if (cl.key == "slope_tolerance") {
        cfg.slope_tolerance = detail::parse_double(cl);
      } else if (cl.key == "r2_min") {
        cfg.r2_min = detail::parse_double(cl);
      }
      explicit_keys.insert(cl.key);
    } else if (cl.section == "params") {
      const double v = detail::parse_double(cl);
      if (cl.key == "p") cfg.p = v;
      else if (cl.key == "alpha") cfg.alpha = v;
      else if (cl.key == "a") cfg.a = v;
      else if (cl.key == "r0") cfg.r0 = v;
      else if (cl.key == "z0") cfg.z0 = v;
    } else {
      ProfileSpec& spec = cl.section == "u0" ? cfg.u0 : cfg.u1;
      if (cl.key == "kind") {
        spec.kind = cl.value;
        if (cl.section == "u1") u1_kind_set = true;
      } else if (cl.key == "amplitude") {
        spec.amplitude = detail::parse_double(cl);
        if (cl.section == "u1") u1_amp_set = true;
      } else if (cl.key == "envelope") {
        spec.envelope = cl.value;
      } else if (cl.key == "envelope_slope") {
        spec.envelope_slope = detail::parse_double(cl);
      } else if (cl.key == "derivative_of_u0") {
        spec.derivative_of_u0 = detail::parse_bool(cl);
      }
    }
  }

  // --- schema-level validation ------------------------------------------
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };

  if (!explicit_keys.count("kind")) fail("missing required key 'kind'");
  if (cfg.eps_list.empty()) fail("missing required key 'eps_list'");
  for (double e : cfg.eps_list)
    if (!(e > 0.0)) fail("eps_list entries must be positive");
  for (std::size_t i = 1; i < cfg.eps_list.size(); ++i)
    if (!(cfg.eps_list[i] < cfg.eps_list[i - 1]))
      fail("eps_list must be strictly decreasing (duplicates rejected)");
  if (!detail::is_power_of_two(cfg.resolution) || cfg.resolution < 16)
    fail("resolution must be a power of two >= 16");
  if (cfg.workers < 1) fail("workers must be >= 1");
  for (double q : cfg.q_list)
    if (!(q >= 1.0)) fail("q_list entries must be >= 1");
  if (!cfg.deterministic)
    fail("deterministic = false is not supported; runs are always seedless "
         "and reproducible");
  if (!(cfg.slope_tolerance > 0.0)) fail("slope_tolerance must be positive");

  // Parameters must be valid for every eps in the sweep; the largest eps
  // is the binding one for r0 - z0*eps > 0.
  for (double e : cfg.eps_list) {
    const ProblemParams pp = cfg.params_for(e);
    pp.validate();
    pp.require_positive_horizon();
  }

  // Profile sanity.
  for (const ProfileSpec* spec : {&cfg.u0, &cfg.u1}) {
    static const std::set<std::string> kinds = {"zero", "smooth_bump",
                                                "polynomial", "gaussian"};
    if (!kinds.count(spec->kind))
      fail("unknown profile kind '" + spec->kind + "'");
    if (spec->envelope != "constant" && spec->envelope != "linear")
      fail("unknown envelope '" + spec->envelope + "'");
    if (!std::isfinite(spec->amplitude)) fail("amplitude must be finite");
  }
  if (cfg.u1.derivative_of_u0 && (u1_kind_set || u1_amp_set))
    fail("[u1] derivative_of_u0 excludes explicit kind/amplitude");

  // --- kind-specific validation (regime gating at load time) -------------
  const ProblemParams tmpl = cfg.params_for(cfg.eps_list.front());
  const double max_snapshot =
      cfg.snapshot_times.empty()
          ? 0.0
          : *std::max_element(cfg.snapshot_times.begin(),
                              cfg.snapshot_times.end());
  for (double t : cfg.snapshot_times)
    if (!(t >= 0.0)) fail("snapshot_times must be nonnegative");

  switch (cfg.kind) {
    case ExperimentKind::FreeCheck:
      if (cfg.a != 0.0)
        fail("free_check requires a = 0 (exact transport has no source)");
      if (!snapshots_set) fail("free_check requires snapshot_times");
      if (!t_final_set) cfg.t_final = max_snapshot;
      break;
    case ExperimentKind::SubcriticalRate: {
      try {
        (void)subcritical_rate(tmpl);
      } catch (const RegimeError& e) {
        fail(std::string("subcritical_rate rejected: ") + e.what());
      }
      if (cfg.eps_list.size() < 3)
        fail("subcritical_rate needs at least 3 eps values for a fit");
      if (!snapshots_set) fail("subcritical_rate requires snapshot_times");
      if (!t_final_set) cfg.t_final = max_snapshot;
      break;
    }
    case ExperimentKind::AppAccuracy: {
      const bool supercritical =
          (cfg.alpha < cfg.p - 2.0) || (cfg.alpha == 0.0 && cfg.p == 2.0);
      if (!supercritical)
        fail("app_accuracy requires the super-critical regime "
             "(0 <= alpha < p - 2, or alpha = 0 = p - 2)");
      if (cfg.lambda_list.size() != 1)
        fail("app_accuracy needs exactly one lambda");
      if (cfg.eps_list.size() < 3)
        fail("app_accuracy needs at least 3 eps values for a fit");
      if (snapshots_set)
        fail("app_accuracy derives its snapshot times from T(lambda, eps)");
      if (t_final_set) fail("app_accuracy derives t_final from T(lambda, eps)");
      for (double e : cfg.eps_list)
        if (!(absorption_time(cfg.lambda_list.front(), cfg.params_for(e)) >
              0.0))
          fail("T(lambda, eps) must be positive for every sweep member");
      break;
    }
    case ExperimentKind::Absorption: {
      if (cfg.a < 0.0)
        fail("absorption requires dissipative coupling a > 0 (a = 0 allowed "
             "as a free-transport control); accretive a < 0 blows up instead "
             "of absorbing");
      const bool supercritical =
          (cfg.alpha < cfg.p - 2.0) || (cfg.alpha == 0.0 && cfg.p == 2.0);
      if (!supercritical)
        fail("absorption requires the super-critical regime "
             "(0 <= alpha < p - 2, or alpha = 0 = p - 2)");
      if (cfg.lambda_list.empty()) fail("absorption needs a lambda_list");
      for (std::size_t i = 1; i < cfg.lambda_list.size(); ++i)
        if (!(cfg.lambda_list[i] < cfg.lambda_list[i - 1]))
          fail("lambda_list must be strictly decreasing");
      if (cfg.eps_list.size() < 2)
        fail("absorption needs at least 2 eps values");
      if (snapshots_set)
        fail("absorption derives its snapshot times from T(lambda, eps)");
      if (t_final_set) fail("absorption runs to t = r0");
      for (double e : cfg.eps_list)
        for (double lam : cfg.lambda_list)
          if (!(absorption_time(lam, cfg.params_for(e)) > 0.0))
            fail("T(lambda, eps) must be positive for every sweep member");
      break;
    }
    case ExperimentKind::Blowup:
      if (!(cfg.a < 0.0))
        fail("blowup requires accretive coupling a < 0");
      if (!cfg.u1.derivative_of_u0)
        fail("blowup requires [u1] derivative_of_u0 = true so the outgoing "
             "data P_+ vanishes and only the focusing wave blows up");
      if (t_final_set)
        fail("blowup derives t_final from the pre-focus horizon");
      if (snapshots_set) fail("blowup derives its snapshot times");
      break;
    case ExperimentKind::EnergyAudit: {
      if (!t_final_set) fail("energy_audit requires t_final");
      if (!(cfg.t_final > 0.0)) fail("t_final must be positive");
      if (snapshots_set)
        fail("energy_audit records every step; snapshot_times is derived");
      // Every-step snapshots: refuse configurations that would not fit.
      for (double e : cfg.eps_list) {
        const double dr = 2.0 * cfg.z0 * e / cfg.resolution;
        const double steps = cfg.t_final / dr;
        const double cells = (cfg.r0 + cfg.t_final + cfg.z0 * e) / dr;
        if (steps * cells > 4e7)
          fail("energy_audit run too large for every-step snapshots; reduce "
               "t_final or resolution");
      }
      break;
    }
  }
  (void)q_list_set;
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline void to_json(nlohmann::json& j, const ProfileSpec& p) {
  j = nlohmann::json{{"kind", p.kind},
                     {"amplitude", p.amplitude},
                     {"envelope", p.envelope},
                     {"envelope_slope", p.envelope_slope},
                     {"derivative_of_u0", p.derivative_of_u0}};
}

/// Canonical form: parsed values with defaults materialized, keys sorted by
/// the JSON object ordering. Reordering keys or sections in the file does
/// not change it.
inline nlohmann::json canonical_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["kind"] = to_string(cfg.kind);
  j["params"] = {{"p", cfg.p},   {"alpha", cfg.alpha}, {"a", cfg.a},
                 {"r0", cfg.r0}, {"z0", cfg.z0}};
  j["eps_list"] = cfg.eps_list;
  j["lambda_list"] = cfg.lambda_list;
  j["resolution"] = cfg.resolution;
  j["snapshot_times"] = cfg.snapshot_times;
  j["q_list"] = cfg.q_list;
  j["t_final"] = cfg.t_final;
  j["deterministic"] = cfg.deterministic;
  j["slope_tolerance"] = cfg.slope_tolerance;
  if (cfg.r2_min) j["r2_min"] = *cfg.r2_min;
  j["u0"] = cfg.u0;
  j["u1"] = cfg.u1;
  // 'out' and 'workers' are execution knobs, not part of the experiment
  // identity: reports are byte-identical across worker counts.
  return j;
}

/// FNV-1a over the canonical JSON text.
inline std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = canonical_json(cfg).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace pulsefocus
