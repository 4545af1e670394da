// Experiment orchestration: runs eps/lambda sweeps across the other
// modules, aggregates verdicts, and emits machine-readable reports plus a
// plot script. Sweep members may run concurrently; aggregation is
// order-independent, so reports are byte-identical across schedules.
#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pulsefocus/closedform.hpp"
#include "pulsefocus/config.hpp"
#include "pulsefocus/diagnostics.hpp"
#include "pulsefocus/errors.hpp"
#include "pulsefocus/serialize.hpp"
#include "pulsefocus/solver.hpp"

namespace pulsefocus {

struct Verdict {
  std::string rule;  ///< the quantitative rule being tested, with thresholds
  bool pass = false;
  std::string details;
};

struct MemberResult {
  double eps = 0.0;
  std::optional<double> lambda;
  int resolution = 0;
  bool failed = false;
  std::string message;
  std::optional<double> max_sup_error;
  std::optional<double> predicted_blowup;
  std::optional<std::string> predicted_reason;
  std::optional<BlowupBracket> bracket;
  std::optional<double> initial_sup;
  std::optional<double> terminal_sup;
  std::optional<EnergyMonotonicityReport> energy;
  std::optional<CharBoundReport> char_bound;
  std::optional<WeightedBoundReport> weighted;
};

struct EnergyTraceRow {
  double eps = 0.0;
  double t = 0.0;
  double q = 0.0;
  double total = 0.0;
};

struct ExperimentReport {
  std::string kind;
  std::string config_hash;
  nlohmann::json config_echo;
  std::vector<MemberResult> members;  // sorted by (eps desc, lambda desc)
  ErrorTable errors;
  std::vector<RateFit> fits;
  std::optional<double> expected_order;
  std::optional<AbsorptionReport> absorption;
  std::vector<EnergyTraceRow> energy_trace;
  std::vector<Verdict> verdicts;
  bool pass = false;
};

/// Wall-clock timings live beside the report, never inside it, so the
/// canonical report stays byte-deterministic.
struct RunOutput {
  ExperimentReport report;
  nlohmann::json timings;
};

// --- JSON ------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const Verdict& v) {
  j = nlohmann::json{{"rule", v.rule}, {"pass", v.pass}, {"details", v.details}};
}
inline void from_json(const nlohmann::json& j, Verdict& v) {
  j.at("rule").get_to(v.rule);
  j.at("pass").get_to(v.pass);
  j.at("details").get_to(v.details);
}

inline void to_json(nlohmann::json& j, const MemberResult& m) {
  j = nlohmann::json{{"eps", m.eps},
                     {"resolution", m.resolution},
                     {"failed", m.failed},
                     {"message", m.message}};
  if (m.lambda) j["lambda"] = *m.lambda;
  if (m.max_sup_error) j["max_sup_error"] = *m.max_sup_error;
  if (m.predicted_blowup) j["predicted_blowup"] = *m.predicted_blowup;
  if (m.predicted_reason) j["predicted_reason"] = *m.predicted_reason;
  if (m.bracket) j["bracket"] = *m.bracket;
  if (m.initial_sup) j["initial_sup"] = *m.initial_sup;
  if (m.terminal_sup) j["terminal_sup"] = *m.terminal_sup;
  if (m.energy) j["energy"] = *m.energy;
  if (m.char_bound) j["char_bound"] = *m.char_bound;
  if (m.weighted) j["weighted"] = *m.weighted;
}
inline void from_json(const nlohmann::json& j, MemberResult& m) {
  j.at("eps").get_to(m.eps);
  j.at("resolution").get_to(m.resolution);
  j.at("failed").get_to(m.failed);
  j.at("message").get_to(m.message);
  auto opt = [&j](const char* key, auto& target) {
    using T = typename std::decay_t<decltype(target)>::value_type;
    if (j.contains(key)) target = j.at(key).template get<T>();
  };
  opt("lambda", m.lambda);
  opt("max_sup_error", m.max_sup_error);
  opt("predicted_blowup", m.predicted_blowup);
  opt("predicted_reason", m.predicted_reason);
  opt("bracket", m.bracket);
  opt("initial_sup", m.initial_sup);
  opt("terminal_sup", m.terminal_sup);
  opt("energy", m.energy);
  opt("char_bound", m.char_bound);
  opt("weighted", m.weighted);
}

inline void to_json(nlohmann::json& j, const EnergyTraceRow& r) {
  j = nlohmann::json{{"eps", r.eps}, {"t", r.t}, {"q", r.q}, {"total", r.total}};
}
inline void from_json(const nlohmann::json& j, EnergyTraceRow& r) {
  j.at("eps").get_to(r.eps);
  j.at("t").get_to(r.t);
  j.at("q").get_to(r.q);
  j.at("total").get_to(r.total);
}

inline void to_json(nlohmann::json& j, const ExperimentReport& r) {
  j = nlohmann::json{{"kind", r.kind},
                     {"config_hash", r.config_hash},
                     {"config", r.config_echo},
                     {"members", r.members},
                     {"errors", r.errors},
                     {"fits", r.fits},
                     {"energy_trace", r.energy_trace},
                     {"verdicts", r.verdicts},
                     {"pass", r.pass}};
  if (r.expected_order) j["expected_order"] = *r.expected_order;
  if (r.absorption) j["absorption"] = *r.absorption;
}
inline void from_json(const nlohmann::json& j, ExperimentReport& r) {
  j.at("kind").get_to(r.kind);
  j.at("config_hash").get_to(r.config_hash);
  r.config_echo = j.at("config");
  j.at("members").get_to(r.members);
  j.at("errors").get_to(r.errors);
  j.at("fits").get_to(r.fits);
  j.at("energy_trace").get_to(r.energy_trace);
  j.at("verdicts").get_to(r.verdicts);
  j.at("pass").get_to(r.pass);
  if (j.contains("expected_order"))
    r.expected_order = j.at("expected_order").get<double>();
  if (j.contains("absorption"))
    r.absorption = j.at("absorption").get<AbsorptionReport>();
}

// --- concurrency -------------------------------------------------------

namespace detail {

/// Index-based worker pool. Results must be written into preallocated
/// slots so the aggregate is independent of scheduling order.
template <typename Body>
void parallel_for(std::size_t n, int workers, Body&& body) {
  if (n == 0) return;
  const int count =
      std::clamp(workers, 1, static_cast<int>(std::min<std::size_t>(n, 64)));
  if (count <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(count));
  for (int w = 0; w < count; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= n) break;
          body(i);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
        next.store(n);
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

// --- experiment drivers -------------------------------------------------

namespace detail {

struct MemberRun {
  MemberResult member;
  ErrorTable rows;
  std::vector<EnergyTraceRow> trace;
  double wall_ms = 0.0;
};

/// Run one sweep member against a closed-form reference at the given
/// resolution, appending per-snapshot error rows.
inline void run_and_compare(const ExperimentConfig& cfg,
                            const ReducedData& data, double eps,
                            int resolution, double t_final,
                            std::span<const double> times, ReferenceKind ref,
                            MemberRun& out) {
  const ProblemParams params = cfg.params_for(eps);
  auto [grid, state0] = initialize(data, params, resolution, t_final);
  const Trajectory traj = run(grid, state0, params, times, resolution);
  if (traj.blown_up) {
    out.member.failed = true;
    out.member.message =
        "run blew up in t = [" + fmt(traj.bracket.t_lo) + ", " +
        fmt(traj.bracket.t_hi) + "]";
    out.member.bracket = traj.bracket;
    return;
  }
  const ErrorTable table = error_vs_reference(traj, ref, data);
  for (const auto& row : table.rows) {
    out.rows.append(row);
    if (resolution == cfg.resolution) {
      const double cur = out.member.max_sup_error.value_or(0.0);
      out.member.max_sup_error = std::max(cur, row.sup_error);
    }
  }
}

inline std::vector<double> uniform_times(double t_end, int count) {
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(count));
  for (int k = 1; k <= count; ++k)
    times.push_back(t_end * static_cast<double>(k) /
                    static_cast<double>(count));
  return times;
}

}  // namespace detail

/// Execute the configured experiment. Individual member failures (for
/// example a recorded blow-up in a non-blowup kind) become failed members
/// and failing verdicts, never a crash.
inline RunOutput run_experiment(const ExperimentConfig& cfg) {
  const auto wall_start = std::chrono::steady_clock::now();
  const ReducedData data = cfg.build_data();

  ExperimentReport rep;
  rep.kind = to_string(cfg.kind);
  rep.config_hash = config_hash(cfg);
  rep.config_echo = canonical_json(cfg);

  const std::size_t n_members = cfg.eps_list.size();
  std::vector<detail::MemberRun> runs(n_members);

  auto run_members = [&](auto&& body) {
    detail::parallel_for(n_members, cfg.workers, [&](std::size_t i) {
      const auto t0 = std::chrono::steady_clock::now();
      detail::MemberRun& mr = runs[i];
      mr.member.eps = cfg.eps_list[i];
      mr.member.resolution = cfg.resolution;
      try {
        body(i, mr);
      } catch (const Error& e) {
        mr.member.failed = true;
        mr.member.message = e.what();
      }
      mr.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
    });
  };

  switch (cfg.kind) {
    case ExperimentKind::FreeCheck: {
      run_members([&](std::size_t i, detail::MemberRun& mr) {
        detail::run_and_compare(cfg, data, cfg.eps_list[i], cfg.resolution,
                                cfg.t_final, cfg.snapshot_times,
                                ReferenceKind::Free, mr);
      });
      double worst = 0.0;
      bool ok = true;
      for (auto& mr : runs) {
        if (mr.member.failed || !mr.member.max_sup_error) ok = false;
        else worst = std::max(worst, *mr.member.max_sup_error);
      }
      constexpr double kTol = 1e-10;
      rep.verdicts.push_back(
          {"free transport is exact: sup error vs the free solution <= 1e-10 "
           "for every sweep member",
           ok && worst <= kTol, "max sup error = " + detail::fmt(worst)});
      break;
    }

    case ExperimentKind::SubcriticalRate:
    case ExperimentKind::AppAccuracy: {
      const bool vs_free = cfg.kind == ExperimentKind::SubcriticalRate;
      if (vs_free)
        rep.expected_order =
            subcritical_rate(cfg.params_for(cfg.eps_list.front())).order;
      else
        rep.expected_order =
            cfg.p == 2.0 ? 1.0 : 1.0 - cfg.alpha / (cfg.p - 2.0);

      run_members([&](std::size_t i, detail::MemberRun& mr) {
        const double eps = cfg.eps_list[i];
        const ProblemParams params = cfg.params_for(eps);
        std::vector<double> times;
        double t_final = cfg.t_final;
        if (vs_free) {
          times = cfg.snapshot_times;
        } else {
          mr.member.lambda = cfg.lambda_list.front();
          const double t_abs =
              absorption_time(cfg.lambda_list.front(), params);
          t_final = t_abs;
          times = detail::uniform_times(t_abs, 8);
          // Snapped times must stay inside the validity window.
          const double cap = params.prefocus_horizon() * (1.0 - 1e-9);
          for (double& t : times) t = std::min(t, cap);
        }
        const ReferenceKind ref =
            vs_free ? ReferenceKind::Free : ReferenceKind::App;
        detail::run_and_compare(cfg, data, eps, cfg.resolution, t_final,
                                times, ref, mr);
        if (!mr.member.failed)
          detail::run_and_compare(cfg, data, eps, 2 * cfg.resolution, t_final,
                                  times, ref, mr);
      });

      bool members_ok = true;
      for (auto& mr : runs) members_ok = members_ok && !mr.member.failed;
      ErrorTable merged;
      for (auto& mr : runs)
        for (auto& row : mr.rows.rows) merged.append(row);
      rep.errors = merged;

      const double lo = *rep.expected_order - cfg.slope_tolerance;
      const double hi = *rep.expected_order + cfg.slope_tolerance;
      std::string fit_note;
      std::optional<RateFit> fit;
      if (members_ok) {
        try {
          fit = fit_rate(merged);
          rep.fits.push_back(*fit);
        } catch (const Error& e) {
          fit_note = e.what();
        }
      } else {
        fit_note = "sweep member failed";
      }
      const std::string range =
          detail::fmt(*rep.expected_order) + " +/- " +
          detail::fmt(cfg.slope_tolerance);
      rep.verdicts.push_back(
          {"fitted log(error)/log(eps) slope within " + range +
           " after the Richardson resolution gate",
           fit && fit->slope >= lo && fit->slope <= hi,
           fit ? "slope = " + detail::fmt(fit->slope) : fit_note});
      if (cfg.r2_min) {
        rep.verdicts.push_back(
            {"rate fit r_squared >= " + detail::fmt(*cfg.r2_min),
             fit && fit->r_squared >= *cfg.r2_min,
             fit ? "r_squared = " + detail::fmt(fit->r_squared) : fit_note});
      }
      break;
    }

    case ExperimentKind::Absorption: {
      const AbsorptionReport rep_abs = absorption_verdict(
          data, cfg.params_for(cfg.eps_list.front()), cfg.lambda_list,
          cfg.eps_list, cfg.resolution);
      rep.absorption = rep_abs;
      for (std::size_t i = 0; i < n_members; ++i) {
        runs[i].member.eps = cfg.eps_list[i];
        runs[i].member.resolution = cfg.resolution;
        runs[i].member.max_sup_error = rep_abs.sup_at_focus[i];
      }
      rep.verdicts.push_back(
          {"sup norm over the light-cone interior at t = r0 strictly "
           "decreases along the eps sweep",
           rep_abs.decreasing_pass || rep_abs.control_mode,
           rep_abs.control_mode ? "control run (a = 0): not evaluated"
                                : ""});
      for (const auto& rc : rep_abs.ratios) {
        rep.verdicts.push_back(
            {"lambda-halving ratio sup(T(lambda/2))/sup(T(lambda)) within "
             "[0.75, 1.25] of the predicted bound factor at the smallest eps "
             "(lambda = " + detail::fmt(rc.lambda_hi) + ")",
             rc.pass,
             "measured = " + detail::fmt(rc.measured) +
                 ", predicted = " + detail::fmt(rc.predicted)});
      }
      break;
    }

    case ExperimentKind::Blowup: {
      run_members([&](std::size_t i, detail::MemberRun& mr) {
        const double eps = cfg.eps_list[i];
        const ProblemParams params = cfg.params_for(eps);
        const AppValidity pred = predicted_blowup_time(data, params);
        mr.member.predicted_reason =
            pred.reason == AppValidityReason::DenominatorVanishes
                ? "denominator-vanishes"
                : "pre-focus-only";
        mr.member.predicted_blowup = pred.t_max;

        const double dr = 2.0 * params.z0 * eps / cfg.resolution;
        const double t_final = params.prefocus_horizon() - 2.0 * dr;
        auto [grid, state0] = initialize(data, params, cfg.resolution, t_final);
        const auto times = detail::uniform_times(t_final, 16);
        const Trajectory traj =
            run(grid, state0, params, times, cfg.resolution);
        mr.member.initial_sup = grid.initial_sup;
        if (traj.blown_up) mr.member.bracket = traj.bracket;
        if (!traj.snapshots.empty()) {
          double sup = 0.0;
          const GridState& last = traj.snapshots.back();
          for (std::size_t j = 0; j < grid.n_cells; ++j)
            sup = std::max({sup, std::abs(last.v_minus[j]),
                            std::abs(last.v_plus[j])});
          mr.member.terminal_sup = sup;
        }
      });
      bool bracket_ok = true, growth_ok = true;
      std::string det_bracket, det_growth;
      for (auto& mr : runs) {
        const auto& m = mr.member;
        if (m.failed) {
          bracket_ok = growth_ok = false;
          det_bracket = m.message;
          continue;
        }
        const ProblemParams params = cfg.params_for(m.eps);
        const double dt = 2.0 * params.z0 * m.eps / cfg.resolution;
        const double tol = 5.0 * dt + params.z0 * m.eps;
        if (m.predicted_reason == std::string("denominator-vanishes")) {
          if (!m.bracket) {
            bracket_ok = false;
            det_bracket = "no numerical blow-up despite predicted root";
            growth_ok = false;
            continue;
          }
          const double pred = *m.predicted_blowup;
          const double dist = std::max(
              {0.0, m.bracket->t_lo - pred, pred - m.bracket->t_hi});
          if (dist > tol) bracket_ok = false;
          det_bracket += "eps=" + detail::fmt(m.eps) +
                         ": predicted=" + detail::fmt(pred) + " bracket=[" +
                         detail::fmt(m.bracket->t_lo) + "," +
                         detail::fmt(m.bracket->t_hi) + "] tol=" +
                         detail::fmt(tol) + "; ";
          if (!(m.terminal_sup && m.initial_sup &&
                *m.terminal_sup >= 1e3 * *m.initial_sup))
            growth_ok = false;
          det_growth += "eps=" + detail::fmt(m.eps) + ": terminal/initial=" +
                        detail::fmt(m.terminal_sup.value_or(0.0) /
                                    std::max(1e-300, m.initial_sup.value_or(0.0))) +
                        "; ";
        } else if (m.bracket) {
          bracket_ok = false;
          det_bracket = "numerical blow-up despite no predicted root";
        }
      }
      rep.verdicts.push_back(
          {"solver blow-up bracket within 5*dt + z0*eps of the predicted "
           "denominator root",
           bracket_ok, det_bracket});
      rep.verdicts.push_back(
          {"sup norm at the last recorded state exceeds 1e3 x the initial "
           "sup norm",
           growth_ok, det_growth});
      break;
    }

    case ExperimentKind::EnergyAudit: {
      run_members([&](std::size_t i, detail::MemberRun& mr) {
        const double eps = cfg.eps_list[i];
        const ProblemParams params = cfg.params_for(eps);
        auto [grid, state0] =
            initialize(data, params, cfg.resolution, cfg.t_final);
        const double dt = grid.dt();
        const auto steps = static_cast<std::size_t>(
            std::llround(cfg.t_final / dt));
        std::vector<double> times(steps + 1);
        for (std::size_t k = 0; k <= steps; ++k)
          times[k] = static_cast<double>(k) * dt;
        const Trajectory traj =
            run(grid, state0, params, times, cfg.resolution);
        mr.member.energy = energy_monotonicity_report(traj, cfg.q_list);
        mr.member.weighted = weighted_bound_report(traj, params);
        if (traj.snapshots.back().t < params.prefocus_horizon())
          mr.member.char_bound = char_integral_bound(traj, params);
        for (const auto& st : traj.snapshots)
          for (double q : cfg.q_list) {
            double acc = 0.0;
            for (std::size_t j = 0; j < grid.n_cells; ++j)
              acc += std::pow(std::abs(st.v_minus[j]), q) +
                     std::pow(std::abs(st.v_plus[j]), q);
            mr.trace.push_back({eps, st.t, q, acc * grid.dr});
          }
      });
      bool e_ok = true, w_ok = true, c_ok = true;
      bool any_char = false;
      for (auto& mr : runs) {
        const auto& m = mr.member;
        if (m.failed) { e_ok = w_ok = c_ok = false; continue; }
        e_ok = e_ok && m.energy && m.energy->pass;
        w_ok = w_ok && m.weighted && m.weighted->pass;
        if (m.char_bound) {
          any_char = true;
          c_ok = c_ok && m.char_bound->pass;
        }
      }
      rep.verdicts.push_back(
          {"discrete q-totals are monotone in the direction set by the sign "
           "of a, with <= 1e-8 relative violation per step",
           e_ok, ""});
      rep.verdicts.push_back(
          {"weighted boundary-compensation estimate holds with factor 1.1 on "
           "all cells",
           w_ok, ""});
      if (any_char)
        rep.verdicts.push_back(
            {"pre-focus characteristic-integral audit: linear sup bound with "
             "5% slack and C1 <= 1.2 x the quadrature majorant",
             c_ok, ""});
      break;
    }
  }

  // Aggregate members in sweep order (slots are indexed, so this is
  // independent of the execution schedule).
  nlohmann::json member_timings = nlohmann::json::array();
  for (auto& mr : runs) {
    rep.members.push_back(std::move(mr.member));
    for (auto& row : mr.trace) rep.energy_trace.push_back(row);
    member_timings.push_back({{"eps", rep.members.back().eps},
                              {"wall_ms", mr.wall_ms}});
  }
  if (rep.errors.rows.empty()) {
    ErrorTable merged;
    for (auto& mr : runs)
      for (auto& row : mr.rows.rows) merged.append(row);
    rep.errors = merged;
  }

  rep.pass = !rep.verdicts.empty() &&
             std::all_of(rep.verdicts.begin(), rep.verdicts.end(),
                         [](const Verdict& v) { return v.pass; });

  RunOutput out;
  out.report = std::move(rep);
  out.timings = {{"total_ms",
                  std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - wall_start)
                      .count()},
                 {"members", member_timings}};
  return out;
}

// --- emission ------------------------------------------------------------

namespace detail {

inline std::string sci17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << body;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline std::string plot_script(const std::string& hash) {
  std::string s;
  s += "#!/usr/bin/env python3\n";
  s += "# pulsefocus plot script (plain text, self-contained)\n";
  s += "# config_hash=" + hash + "\n";
  s += R"PY(# Reads the CSV tables emitted next to this script and renders:
#   - log-log sup-error vs eps (one series per resolution)
#   - energy traces (q-totals vs time)
#   - absorption heat map over (lambda, eps)
# Usage: python3 plots.script [output-directory]
import csv, math, os, sys

here = os.path.dirname(os.path.abspath(__file__))
outdir = sys.argv[1] if len(sys.argv) > 1 else here

def read(name):
    path = os.path.join(here, "tables", name)
    if not os.path.exists(path):
        return []
    with open(path) as fh:
        rows = [r for r in csv.DictReader(
            line for line in fh if not line.startswith("#"))]
    return rows

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

errors = read("errors.csv")
if errors:
    fig, ax = plt.subplots()
    by_res = {}
    for r in errors:
        by_res.setdefault(int(r["resolution"]), []).append(
            (float(r["eps"]), float(r["sup_error"])))
    for res, pts in sorted(by_res.items()):
        agg = {}
        for eps, err in pts:
            agg[eps] = max(agg.get(eps, 0.0), err)
        xs = sorted(agg)
        ax.loglog(xs, [agg[x] for x in xs], "o-", label=f"resolution {res}")
    ax.set_xlabel("eps"); ax.set_ylabel("sup error"); ax.legend()
    ax.set_title("sup error vs eps")
    fig.savefig(os.path.join(outdir, "errors.png"), dpi=150)

trace = read("energy_trace.csv")
if trace:
    fig, ax = plt.subplots()
    series = {}
    for r in trace:
        key = (float(r["eps"]), float(r["q"]))
        series.setdefault(key, []).append((float(r["t"]), float(r["total"])))
    for (eps, q), pts in sorted(series.items()):
        pts.sort()
        ax.plot([t for t, _ in pts], [v for _, v in pts],
                label=f"eps={eps:g} q={q:g}")
    ax.set_xlabel("t"); ax.set_ylabel("sum (|v-|^q + |v+|^q) dr")
    ax.legend(fontsize=6); ax.set_title("energy traces")
    fig.savefig(os.path.join(outdir, "energy.png"), dpi=150)

absn = read("absorption_threshold.csv")
if absn:
    lams = sorted({float(r["lambda"]) for r in absn})
    epss = sorted({float(r["eps"]) for r in absn})
    grid = [[math.nan] * len(epss) for _ in lams]
    for r in absn:
        grid[lams.index(float(r["lambda"]))][epss.index(float(r["eps"]))] = \
            float(r["sup"])
    fig, ax = plt.subplots()
    im = ax.imshow(grid, aspect="auto", origin="lower")
    ax.set_xticks(range(len(epss)), [f"{e:g}" for e in epss])
    ax.set_yticks(range(len(lams)), [f"{l:g}" for l in lams])
    ax.set_xlabel("eps"); ax.set_ylabel("lambda")
    fig.colorbar(im, label="sup at T(lambda, eps)")
    ax.set_title("absorption: sup norm at the threshold time")
    fig.savefig(os.path.join(outdir, "absorption.png"), dpi=150)

print("plots written to", outdir)
)PY";
  return s;
}

}  // namespace detail

/// Write report.json (canonical, sorted keys), flat CSV tables, the plot
/// script, and the timing sidecar. Every file carries the config hash.
/// Formats: any subset of {"json", "csv", "plot"}.
inline std::vector<std::filesystem::path> emit_report(
    const RunOutput& output, const std::filesystem::path& dir,
    const std::set<std::string>& formats = {"json", "csv", "plot"}) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "'");
  const ExperimentReport& rep = output.report;
  std::vector<fs::path> written;

  if (formats.count("json")) {
    const nlohmann::json j = rep;
    detail::write_file(dir / "report.json", j.dump(2) + "\n");
    written.push_back(dir / "report.json");
    detail::write_file(dir / "timings.json", output.timings.dump(2) + "\n");
    written.push_back(dir / "timings.json");
  }

  if (formats.count("csv")) {
    fs::create_directories(dir / "tables", ec);
    if (ec) throw IoError("cannot create tables directory");
    const std::string head = "# config_hash=" + rep.config_hash + "\n";

    {
      std::string body = head + "eps,resolution,time,region,sup_error\n";
      for (const auto& r : rep.errors.rows)
        body += detail::sci17(r.eps) + "," + std::to_string(r.resolution) +
                "," + detail::sci17(r.time) + "," + r.region + "," +
                detail::sci17(r.sup_error) + "\n";
      detail::write_file(dir / "tables" / "errors.csv", body);
      written.push_back(dir / "tables" / "errors.csv");
    }
    {
      std::string body = head + "slope,intercept,r_squared,points_used\n";
      for (const auto& f : rep.fits)
        body += detail::sci17(f.slope) + "," + detail::sci17(f.intercept) +
                "," + detail::sci17(f.r_squared) + "," +
                std::to_string(f.points_used) + "\n";
      detail::write_file(dir / "tables" / "fits.csv", body);
      written.push_back(dir / "tables" / "fits.csv");
    }
    {
      std::string body = head + "rule,pass,details\n";
      for (const auto& v : rep.verdicts)
        body += detail::csv_quote(v.rule) + "," + (v.pass ? "1" : "0") + "," +
                detail::csv_quote(v.details) + "\n";
      detail::write_file(dir / "tables" / "verdicts.csv", body);
      written.push_back(dir / "tables" / "verdicts.csv");
    }
    if (!rep.energy_trace.empty()) {
      std::string body = head + "eps,t,q,total\n";
      for (const auto& r : rep.energy_trace)
        body += detail::sci17(r.eps) + "," + detail::sci17(r.t) + "," +
                detail::sci17(r.q) + "," + detail::sci17(r.total) + "\n";
      detail::write_file(dir / "tables" / "energy_trace.csv", body);
      written.push_back(dir / "tables" / "energy_trace.csv");
    }
    if (rep.absorption) {
      std::string body = head + "lambda,eps,sup\n";
      const auto& ab = *rep.absorption;
      for (std::size_t li = 0; li < ab.lambda_list.size(); ++li)
        for (std::size_t ei = 0; ei < ab.eps_list.size(); ++ei)
          body += detail::sci17(ab.lambda_list[li]) + "," +
                  detail::sci17(ab.eps_list[ei]) + "," +
                  detail::sci17(ab.sup_at_t[li][ei]) + "\n";
      detail::write_file(dir / "tables" / "absorption_threshold.csv", body);
      written.push_back(dir / "tables" / "absorption_threshold.csv");

      std::string focus = head + "eps,sup_at_focus\n";
      for (std::size_t ei = 0; ei < ab.eps_list.size(); ++ei)
        focus += detail::sci17(ab.eps_list[ei]) + "," +
                 detail::sci17(ab.sup_at_focus[ei]) + "\n";
      detail::write_file(dir / "tables" / "absorption_focus.csv", focus);
      written.push_back(dir / "tables" / "absorption_focus.csv");
    }
  }

  if (formats.count("plot")) {
    detail::write_file(dir / "plots.script",
                       detail::plot_script(rep.config_hash));
    written.push_back(dir / "plots.script");
  }
  return written;
}

}  // namespace pulsefocus
