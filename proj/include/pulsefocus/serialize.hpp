// JSON conversions for parameters, diagnostics reports, and experiment
// reports. Doubles round-trip exactly through nlohmann::json, so a report
// written and reloaded reproduces the original values bit for bit.
#pragma once

#include <json.hpp>

#include "pulsefocus/diagnostics.hpp"
#include "pulsefocus/regimes.hpp"
#include "pulsefocus/solver.hpp"

namespace pulsefocus {

using nlohmann::json;

inline void to_json(json& j, const ProblemParams& p) {
  j = json{{"p", p.p},   {"alpha", p.alpha}, {"a", p.a},
           {"r0", p.r0}, {"z0", p.z0},       {"eps", p.eps}};
}
inline void from_json(const json& j, ProblemParams& p) {
  j.at("p").get_to(p.p);
  j.at("alpha").get_to(p.alpha);
  j.at("a").get_to(p.a);
  j.at("r0").get_to(p.r0);
  j.at("z0").get_to(p.z0);
  j.at("eps").get_to(p.eps);
}

inline void to_json(json& j, const RegimeClass& c) {
  j = json{{"caustic", to_string(c.caustic)},
           {"propagation", to_string(c.propagation)},
           {"note", to_string(c.note)}};
}

inline void to_json(json& j, const RatePrediction& r) {
  j = json{{"order", r.order}, {"log_factor", r.log_factor}};
}

inline void to_json(json& j, const BlowupBracket& b) {
  j = json{{"t_lo", b.t_lo}, {"t_hi", b.t_hi}};
}
inline void from_json(const json& j, BlowupBracket& b) {
  j.at("t_lo").get_to(b.t_lo);
  j.at("t_hi").get_to(b.t_hi);
}

inline void to_json(json& j, const ErrorRow& r) {
  j = json{{"eps", r.eps},
           {"resolution", r.resolution},
           {"time", r.time},
           {"sup_error", r.sup_error},
           {"region", r.region}};
}
inline void from_json(const json& j, ErrorRow& r) {
  j.at("eps").get_to(r.eps);
  j.at("resolution").get_to(r.resolution);
  j.at("time").get_to(r.time);
  j.at("sup_error").get_to(r.sup_error);
  j.at("region").get_to(r.region);
}

inline void to_json(json& j, const ErrorTable& t) {
  j = json{{"rows", t.rows}};
}
inline void from_json(const json& j, ErrorTable& t) {
  j.at("rows").get_to(t.rows);
}

inline void to_json(json& j, const RateFit& f) {
  j = json{{"slope", f.slope},
           {"intercept", f.intercept},
           {"r_squared", f.r_squared},
           {"points_used", f.points_used}};
}
inline void from_json(const json& j, RateFit& f) {
  j.at("slope").get_to(f.slope);
  j.at("intercept").get_to(f.intercept);
  j.at("r_squared").get_to(f.r_squared);
  j.at("points_used").get_to(f.points_used);
}

inline void to_json(json& j, const EnergyMonotonicityReport::PerQ& e) {
  j = json{{"q", e.q},
           {"max_violation_per_step", e.max_violation_per_step},
           {"pass", e.pass}};
}
inline void from_json(const json& j, EnergyMonotonicityReport::PerQ& e) {
  j.at("q").get_to(e.q);
  j.at("max_violation_per_step").get_to(e.max_violation_per_step);
  j.at("pass").get_to(e.pass);
}

inline void to_json(json& j, const EnergyMonotonicityReport& r) {
  j = json{{"entries", r.entries},
           {"slack_per_step", r.slack_per_step},
           {"direction", r.direction},
           {"pass", r.pass}};
}
inline void from_json(const json& j, EnergyMonotonicityReport& r) {
  j.at("entries").get_to(r.entries);
  j.at("slack_per_step").get_to(r.slack_per_step);
  j.at("direction").get_to(r.direction);
  j.at("pass").get_to(r.pass);
}

inline void to_json(json& j, const CharBoundReport& r) {
  j = json{{"c1", r.c1},
           {"majorant", r.majorant},
           {"c2", r.c2},
           {"c1_ratio", r.c1_ratio},
           {"lemma_max_ratio", r.lemma_max_ratio},
           {"t_last", r.t_last},
           {"pass_c1", r.pass_c1},
           {"pass_lemma", r.pass_lemma},
           {"pass", r.pass}};
}
inline void from_json(const json& j, CharBoundReport& r) {
  j.at("c1").get_to(r.c1);
  j.at("majorant").get_to(r.majorant);
  j.at("c2").get_to(r.c2);
  j.at("c1_ratio").get_to(r.c1_ratio);
  j.at("lemma_max_ratio").get_to(r.lemma_max_ratio);
  j.at("t_last").get_to(r.t_last);
  j.at("pass_c1").get_to(r.pass_c1);
  j.at("pass_lemma").get_to(r.pass_lemma);
  j.at("pass").get_to(r.pass);
}

inline void to_json(json& j, const WeightedBoundReport& r) {
  j = json{{"max_ratio", r.max_ratio},
           {"pairs_checked", r.pairs_checked},
           {"pass", r.pass}};
}
inline void from_json(const json& j, WeightedBoundReport& r) {
  j.at("max_ratio").get_to(r.max_ratio);
  j.at("pairs_checked").get_to(r.pairs_checked);
  j.at("pass").get_to(r.pass);
}

inline void to_json(json& j, const AbsorptionReport::RatioCheck& r) {
  j = json{{"lambda_hi", r.lambda_hi},
           {"lambda_lo", r.lambda_lo},
           {"measured", r.measured},
           {"predicted", r.predicted},
           {"pass", r.pass}};
}
inline void from_json(const json& j, AbsorptionReport::RatioCheck& r) {
  j.at("lambda_hi").get_to(r.lambda_hi);
  j.at("lambda_lo").get_to(r.lambda_lo);
  j.at("measured").get_to(r.measured);
  j.at("predicted").get_to(r.predicted);
  j.at("pass").get_to(r.pass);
}

inline void to_json(json& j, const AbsorptionReport& r) {
  j = json{{"eps_list", r.eps_list},
           {"lambda_list", r.lambda_list},
           {"sup_at_focus", r.sup_at_focus},
           {"sup_at_t", r.sup_at_t},
           {"ratios", r.ratios},
           {"control_mode", r.control_mode},
           {"decreasing_pass", r.decreasing_pass},
           {"pass", r.pass}};
}
inline void from_json(const json& j, AbsorptionReport& r) {
  j.at("eps_list").get_to(r.eps_list);
  j.at("lambda_list").get_to(r.lambda_list);
  j.at("sup_at_focus").get_to(r.sup_at_focus);
  j.at("sup_at_t").get_to(r.sup_at_t);
  j.at("ratios").get_to(r.ratios);
  j.at("control_mode").get_to(r.control_mode);
  j.at("decreasing_pass").get_to(r.decreasing_pass);
  j.at("pass").get_to(r.pass);
}

}  // namespace pulsefocus
