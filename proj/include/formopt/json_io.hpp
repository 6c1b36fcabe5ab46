#pragma once

// JSON encodings of forms, certificates and reports.
//
// Form file: {"n": int, "d": int, "terms": [{"alpha": [int, ...], "c": float}]}
// Terms are written in graded lexicographic order, largest exponent first.
// Non-finite numbers (e.g. lambda2 when n = 1) are written as null.

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "formopt/certify.hpp"
#include "formopt/error.hpp"
#include "formopt/form.hpp"
#include "formopt/grid_oracle.hpp"
#include "formopt/search.hpp"
#include "formopt/spurious.hpp"
#include "formopt/tolerance.hpp"

namespace formopt {

using json = nlohmann::json;

namespace detail {

inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

inline const json& field(const json& j, const char* name, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::MalformedInput, where + ": expected a JSON object");
  auto it = j.find(name);
  if (it == j.end()) throw Error(ErrorCode::MalformedInput, where + ": missing field '" + name + "'");
  return *it;
}

inline int integer_field(const json& j, const char* name, const std::string& where) {
  const json& v = field(j, name, where);
  if (!v.is_number_integer()) throw Error(ErrorCode::MalformedInput, where + ": field '" + name + "' must be an integer");
  return v.get<int>();
}

}  // namespace detail

inline json form_to_json(const Form& f) {
  json terms = json::array();
  for (const auto& [alpha, c] : f.terms()) terms.push_back({{"alpha", alpha}, {"c", c}});
  return {{"n", f.n()}, {"d", f.d()}, {"terms", terms}};
}

inline Form form_from_json(const json& j) {
  const int n = detail::integer_field(j, "n", "form");
  const int d = detail::integer_field(j, "d", "form");
  const json& terms = detail::field(j, "terms", "form");
  if (!terms.is_array()) throw Error(ErrorCode::MalformedInput, "form: field 'terms' must be an array");
  std::vector<Term> parsed;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const std::string where = "form.terms[" + std::to_string(k) + "]";
    const json& alpha = detail::field(terms[k], "alpha", where);
    const json& c = detail::field(terms[k], "c", where);
    if (!alpha.is_array()) throw Error(ErrorCode::MalformedInput, where + ": field 'alpha' must be an array");
    Term t;
    for (const auto& a : alpha) {
      if (!a.is_number_integer()) throw Error(ErrorCode::MalformedInput, where + ": field 'alpha' must hold integers");
      t.alpha.push_back(a.get<int>());
    }
    if (!c.is_number()) throw Error(ErrorCode::MalformedInput, where + ": field 'c' must be a number");
    t.c = c.get<double>();
    parsed.push_back(std::move(t));
  }
  return Form(n, d, parsed);
}

inline Form parse_form(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedInput, std::string("form: invalid JSON: ") + e.what());
  }
  return form_from_json(j);
}

inline Form load_form(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MalformedInput, "cannot open form file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_form(ss.str());
}

inline json to_json(const ToleranceSet& t) {
  return {{"fonc_rel", t.fonc_rel}, {"eig_rel", t.eig_rel}, {"det_rel", t.det_rel}, {"unit_tol", t.unit_tol}};
}

inline json to_json(const Certificate& c) {
  return {{"point", detail::vector_json(c.point.coords())},
          {"f_val", detail::number(c.f_val)},
          {"grad_norm", detail::number(c.grad_norm)},
          {"fonc_residual", detail::number(c.fonc_residual)},
          {"lambda1", detail::number(c.lambda1)},
          {"lambda2", detail::number(c.lambda2)},
          {"tau", detail::number(c.tau)},
          {"det_bordered", detail::number(c.det_bordered)},
          {"multiplier", detail::number(c.multiplier)},
          {"classification", std::string(to_string(c.classification))},
          {"f_near_zero_flag", c.f_near_zero_flag}};
}

inline json to_json(const CriticalPoint& cp) {
  return {{"point", detail::vector_json(cp.point.coords())},
          {"cert", to_json(cp.cert)},
          {"hits", cp.hits},
          {"refined", cp.refined}};
}

inline json to_json(const std::vector<CriticalPoint>& cps) {
  json a = json::array();
  for (const auto& cp : cps) a.push_back(to_json(cp));
  return a;
}

inline json to_json(const SearchStats& s) {
  return {{"starts", s.starts},
          {"newton_starts", s.newton_starts},
          {"descent_starts", s.descent_starts},
          {"failed_starts", s.failed_starts},
          {"unrefined_candidates", s.unrefined_candidates},
          {"no_descent", s.no_descent}};
}

/// Thread count is deliberately left out: it does not affect results.
inline json to_json(const SearchConfig& c) {
  return {{"starts", c.starts},     {"seed", c.seed},           {"max_iters", c.max_iters},
          {"newton_max_iters", c.newton_max_iters},             {"armijo_c", c.armijo_c},
          {"backtrack", c.backtrack}, {"dedup_tol", c.dedup_tol}, {"identify_antipodal", c.identify_antipodal}};
}

/// Fields absent from j keep the values already in cfg.
inline void update_from_json(SearchConfig& cfg, const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::MalformedInput, "search config: expected a JSON object");
  try {
    if (j.contains("starts")) cfg.starts = j.at("starts").get<int>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("max_iters")) cfg.max_iters = j.at("max_iters").get<int>();
    if (j.contains("newton_max_iters")) cfg.newton_max_iters = j.at("newton_max_iters").get<int>();
    if (j.contains("armijo_c")) cfg.armijo_c = j.at("armijo_c").get<double>();
    if (j.contains("backtrack")) cfg.backtrack = j.at("backtrack").get<double>();
    if (j.contains("dedup_tol")) cfg.dedup_tol = j.at("dedup_tol").get<double>();
    if (j.contains("identify_antipodal")) cfg.identify_antipodal = j.at("identify_antipodal").get<bool>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("search config: ") + e.what());
  }
  cfg.validate();
}

inline json to_json(const ValueCluster& c) {
  return {{"value", detail::number(c.value)}, {"members", c.members}, {"width", detail::number(c.width)}};
}

inline json to_json(const SpuriousReport& r) {
  json clusters = json::array();
  for (const auto& c : r.clusters) clusters.push_back(to_json(c));
  return {{"clusters", clusters},
          {"verdict", std::string(to_string(r.verdict))},
          {"negative_verdict", std::string(to_string(r.negative_verdict))},
          {"genericity_witness", r.genericity_witness},
          {"global_min_estimate", detail::number(r.global_min_estimate)},
          {"cluster_eps", detail::number(r.cluster_eps)},
          {"critical_count", r.critical_count},
          {"minima_count", r.minima_count},
          {"degenerate_found", r.degenerate_found},
          {"ambiguous_separation", r.ambiguous_separation}};
}

inline json to_json(const BallSphereReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"index", c.index},
                      {"f_val", detail::number(c.f_val)},
                      {"method", c.sampled ? "ball_sampling" : "scaling_witness"},
                      {"passed", c.passed},
                      {"best_value", detail::number(c.best_value)}});
  }
  return {{"passed", r.passed}, {"checks", checks}};
}

inline json to_json(const OracleResult& r) {
  json ext = json::array();
  for (const auto& e : r.extrema) {
    ext.push_back({{"point", detail::vector_json(e.point.coords())},
                   {"value", detail::number(e.value)},
                   {"is_local_min", e.is_local_min}});
  }
  return {{"resolution", r.resolution}, {"spacing", r.spacing}, {"extrema", ext}};
}

}  // namespace formopt
