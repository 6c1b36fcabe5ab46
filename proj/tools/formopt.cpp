// formopt: certify, enumerate and classify critical points of forms on the
// unit sphere.
//
// Exit codes: 0 success, 2 bad input, 3 unsupported request, 4 internal
// numerical failure.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "formopt/formopt.hpp"

namespace {

using formopt::json;

constexpr const char* kVersion = "0.1.0";
constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitUnsupported = 3;
constexpr int kExitNumeric = 4;

struct Options {
  std::string form_path;
  std::string point;
  std::string out;
  std::string config_path;
  int starts = 0;
  std::uint64_t seed = 0;
  int max_iters = 2000;
  int threads = 0;
  double cluster_eps = 0.0;
  double dedup_tol = 1e-6;
  bool keep_antipodes = false;
  int resolution = 0;
  int gen_n = 2;
  int gen_d = 4;
  std::string scheme = "gaussian";
  bool as_json = false;
  bool pretty = false;
  formopt::ToleranceSet tols;
};

// ---------------------------------------------------------------------------
// Text rendering of a JSON report (12 significant digits).

std::string format_scalar(const json& v) {
  if (v.is_number_float()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v.get<double>());
    return buf;
  }
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "inf";
  return v.dump();
}

bool is_flat(const json& v) {
  if (v.is_object()) return false;
  if (!v.is_array()) return true;
  for (const auto& e : v)
    if (e.is_object() || e.is_array()) return false;
  return true;
}

std::string format_flat(const json& v) {
  if (!v.is_array()) return format_scalar(v);
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_scalar(v[i]);
  return s + "]";
}

void render(const json& j, std::ostream& os, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  if (j.is_object()) {
    for (const auto& [key, val] : j.items()) {
      if (is_flat(val)) {
        os << pad << key << ": " << format_flat(val) << '\n';
      } else {
        os << pad << key << ":\n";
        render(val, os, indent + 2);
      }
    }
  } else if (j.is_array()) {
    for (const auto& e : j) {
      if (is_flat(e)) {
        os << pad << "- " << format_flat(e) << '\n';
      } else {
        os << pad << "-\n";
        render(e, os, indent + 2);
      }
    }
  } else {
    os << pad << format_scalar(j) << '\n';
  }
}

void emit(const json& report, const Options& opt, bool json_default) {
  const bool as_json = opt.pretty ? false : (opt.as_json || json_default);
  std::ostringstream os;
  if (as_json) {
    os << report.dump(2) << '\n';
  } else {
    render(report, os, 0);
  }
  if (opt.out.empty()) {
    std::cout << os.str();
  } else {
    std::ofstream f(opt.out);
    if (!f) throw formopt::Error(formopt::ErrorCode::MalformedInput, "--out: cannot write '" + opt.out + "'");
    f << os.str();
  }
}

// ---------------------------------------------------------------------------
// Inputs.

formopt::Form read_form(const Options& opt) {
  if (opt.form_path.empty()) throw formopt::Error(formopt::ErrorCode::MalformedInput, "--form is required");
  if (opt.form_path == "-") {
    std::string text((std::istreambuf_iterator<char>(std::cin)), std::istreambuf_iterator<char>());
    return formopt::parse_form(text);
  }
  return formopt::load_form(opt.form_path);
}

formopt::UnitPoint read_point(const Options& opt, int n) {
  if (opt.point.empty()) throw formopt::Error(formopt::ErrorCode::MalformedInput, "--point is required");
  std::vector<double> vals;
  std::stringstream ss(opt.point);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(tok, &used));
      while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw formopt::Error(formopt::ErrorCode::MalformedInput, "--point: '" + tok + "' is not a number");
    }
  }
  if (static_cast<int>(vals.size()) != n) {
    throw formopt::Error(formopt::ErrorCode::MalformedInput, "--point: expected " + std::to_string(n) +
                                                                 " coordinates, got " + std::to_string(vals.size()));
  }
  formopt::Vector v = Eigen::Map<const formopt::Vector>(vals.data(), n);
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw formopt::Error(formopt::ErrorCode::MalformedInput, "--point: must be a nonzero finite vector");
  }
  if (std::abs(norm - 1.0) > 1e-9) {
    std::cerr << "warning: --point has norm " << std::setprecision(17) << norm << ", normalizing onto the unit sphere\n";
  }
  return formopt::UnitPoint::normalized(v);
}

formopt::SearchConfig search_config(const Options& opt, const CLI::App& sub) {
  formopt::SearchConfig cfg;
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path);
    if (!in) throw formopt::Error(formopt::ErrorCode::MalformedInput, "--config: cannot open '" + opt.config_path + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw formopt::Error(formopt::ErrorCode::MalformedInput, std::string("--config: invalid JSON: ") + e.what());
    }
    formopt::update_from_json(cfg, j);
  }
  if (sub.count("--starts")) cfg.starts = opt.starts;
  if (sub.count("--max-iters")) cfg.max_iters = opt.max_iters;
  if (sub.count("--threads")) cfg.threads = opt.threads;
  if (sub.count("--dedup-tol")) cfg.dedup_tol = opt.dedup_tol;
  if (sub.count("--keep-antipodes")) cfg.identify_antipodal = false;
  if (sub.count("--seed")) {
    cfg.seed = opt.seed;
  } else if (opt.config_path.empty()) {
    if (const char* env = std::getenv("FORMOPT_SEED")) {
      try {
        std::size_t used = 0;
        cfg.seed = std::stoull(env, &used);
        if (env[used] != '\0') throw std::invalid_argument(env);
      } catch (const std::exception&) {
        throw formopt::Error(formopt::ErrorCode::MalformedInput, "FORMOPT_SEED: not an unsigned integer");
      }
    }
  }
  cfg.tols = opt.tols;
  cfg.validate();
  return cfg;
}

json manifest(const std::string& command, const Options& opt, json form_source,
              const std::optional<formopt::SearchConfig>& cfg = std::nullopt) {
  json m = {{"command", command},
            {"form_source", std::move(form_source)},
            {"tolerances", formopt::to_json(opt.tols)},
            {"output", opt.out.empty() ? "stdout" : opt.out},
            {"version", kVersion}};
  if (cfg) m["search"] = formopt::to_json(*cfg);
  return m;
}

json form_source(const Options& opt) { return {{"path", opt.form_path == "-" ? "stdin" : opt.form_path}}; }

// ---------------------------------------------------------------------------
// Subcommands.

void cmd_eval(const Options& opt) {
  const formopt::Form f = read_form(opt);
  const formopt::UnitPoint x = read_point(opt, f.n());
  const formopt::Vector g = formopt::gradient(f, x.coords());
  const double fx = formopt::eval(f, x.coords());
  const double residual = formopt::fonc_residual(f, x);
  json r = {{"manifest", manifest("eval", opt, form_source(opt))},
            {"point", formopt::detail::vector_json(x.coords())},
            {"f", fx},
            {"gradient", formopt::detail::vector_json(g)},
            {"grad_norm", g.norm()},
            {"d_abs_f", f.d() * std::abs(fx)},
            {"fonc_residual", residual},
            {"fonc", residual <= opt.tols.fonc_tol(g.norm())}};
  emit(r, opt, false);
}

void cmd_certify(const Options& opt) {
  const formopt::Form f = read_form(opt);
  const formopt::UnitPoint x = read_point(opt, f.n());
  json r = formopt::to_json(formopt::certify_point(f, x, opt.tols));
  r["manifest"] = manifest("certify", opt, form_source(opt));
  emit(r, opt, true);
}

void cmd_search(const Options& opt, const CLI::App& sub) {
  const formopt::Form f = read_form(opt);
  const formopt::SearchConfig cfg = search_config(opt, sub);
  const formopt::SearchResult res = formopt::find_critical(f, cfg);
  json r = {{"manifest", manifest("search", opt, form_source(opt), cfg)},
            {"stats", formopt::to_json(res.stats)},
            {"critical_points", formopt::to_json(res.points)}};
  emit(r, opt, true);
  if (res.points.empty()) {
    throw formopt::Error(formopt::ErrorCode::NumericalFailure, "every start failed to reach a critical point");
  }
}

void cmd_analyze(const Options& opt, const CLI::App& sub) {
  const formopt::Form f = read_form(opt);
  const formopt::SearchConfig cfg = search_config(opt, sub);
  const formopt::SearchResult res = formopt::find_critical(f, cfg);
  if (res.points.empty()) {
    throw formopt::Error(formopt::ErrorCode::NumericalFailure, "every start failed to reach a critical point");
  }
  const formopt::SpuriousReport rep = formopt::analyze(f, res.points, opt.cluster_eps);
  const formopt::BallSphereReport ball = formopt::ball_sphere_check(f, res.points, {.seed = cfg.seed});
  json r = formopt::to_json(rep);
  r["search"] = {{"config", formopt::to_json(cfg)}, {"stats", formopt::to_json(res.stats)}};
  r["ball_sphere"] = formopt::to_json(ball);
  r["critical_points"] = formopt::to_json(res.points);
  r["manifest"] = manifest("analyze", opt, form_source(opt), cfg);
  emit(r, opt, true);
}

void cmd_gen(const Options& opt, const CLI::App& sub) {
  std::uint64_t seed = opt.seed;
  if (!sub.count("--seed")) {
    if (const char* env = std::getenv("FORMOPT_SEED")) seed = std::strtoull(env, nullptr, 10);
  }
  const auto scheme = formopt::RandomScheme::parse(opt.scheme);
  const formopt::Form f = formopt::random_form(opt.gen_n, opt.gen_d, seed, scheme);
  json r = formopt::form_to_json(f);
  r["manifest"] = manifest(
      "gen", opt, {{"generator", {{"n", opt.gen_n}, {"d", opt.gen_d}, {"seed", seed}, {"scheme", scheme.to_string()}}}});
  emit(r, opt, true);
}

void cmd_oracle(const Options& opt) {
  const formopt::Form f = read_form(opt);
  json r = formopt::to_json(formopt::grid_oracle(f, opt.resolution));
  r["manifest"] = manifest("oracle", opt, form_source(opt));
  emit(r, opt, true);
}

int exit_code_for(formopt::ErrorCode code) {
  switch (code) {
    case formopt::ErrorCode::UnsupportedDimension: return kExitUnsupported;
    case formopt::ErrorCode::NumericalFailure:
    case formopt::ErrorCode::EmptyInput: return kExitNumeric;
    default: return kExitInput;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"formopt: local optimality of forms on the unit sphere"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options opt;

  auto add_output = [&](CLI::App* s) {
    s->add_flag("--json", opt.as_json, "Emit JSON");
    s->add_flag("--pretty", opt.pretty, "Emit a human-readable rendering of the JSON report");
    s->add_option("--out", opt.out, "Write the report to PATH instead of stdout");
  };
  auto add_form = [&](CLI::App* s) { s->add_option("--form", opt.form_path, "Form JSON file, '-' for stdin")->required(); };
  auto add_tols = [&](CLI::App* s) {
    auto* g = s->add_option_group("Tolerances",
                                  "Relative coefficients: fonc_tol = X(1+|grad f|), eig_tol = X(1+max|H|), "
                                  "det_tol = X(1+max|H|)^n");
    g->add_option("--fonc-tol", opt.tols.fonc_rel, "FONC residual coefficient")->capture_default_str();
    g->add_option("--eig-tol", opt.tols.eig_rel, "Eigenvalue slack coefficient")->capture_default_str();
    g->add_option("--det-tol", opt.tols.det_rel, "Bordered determinant coefficient")->capture_default_str();
  };
  auto add_search = [&](CLI::App* s) {
    s->add_option("--starts", opt.starts, "Number of random starts (default 200 n)");
    s->add_option("--seed", opt.seed, "Seed (falls back to FORMOPT_SEED, then 0)");
    s->add_option("--max-iters", opt.max_iters, "Descent iterations per start")->capture_default_str();
    s->add_option("--threads", opt.threads, "Worker threads (0 = all cores)");
    s->add_option("--dedup-tol", opt.dedup_tol, "Distance below which critical points merge")->capture_default_str();
    s->add_flag("--keep-antipodes", opt.keep_antipodes, "Do not merge x and -x for even degree");
    s->add_option("--config", opt.config_path, "SearchConfig JSON; explicit flags override it");
  };

  auto* eval = app.add_subcommand("eval", "Print f, grad f, |grad f| and d|f| at a point");
  add_form(eval);
  eval->add_option("--point", opt.point, "Comma-separated coordinates")->required();
  add_tols(eval);
  add_output(eval);

  auto* certify = app.add_subcommand("certify", "Certificate of local minimality at a point");
  add_form(certify);
  certify->add_option("--point", opt.point, "Comma-separated coordinates")->required();
  add_tols(certify);
  add_output(certify);

  auto* search = app.add_subcommand("search", "Enumerate and certify critical points");
  add_form(search);
  add_search(search);
  add_tols(search);
  add_output(search);

  auto* analyze = app.add_subcommand("analyze", "Decide whether the form has spurious local minima");
  add_form(analyze);
  add_search(analyze);
  analyze->add_option("--cluster-eps", opt.cluster_eps, "Value clustering gap (default 1e-6 (1+|f*|))");
  add_tols(analyze);
  add_output(analyze);

  auto* gen = app.add_subcommand("gen", "Generate a random form");
  gen->add_option("--n", opt.gen_n, "Number of variables")->capture_default_str();
  gen->add_option("--d", opt.gen_d, "Degree")->capture_default_str();
  gen->add_option("--seed", opt.seed, "Seed (falls back to FORMOPT_SEED, then 0)");
  gen->add_option("--scheme", opt.scheme, "gaussian or sparse:K")->capture_default_str();
  add_output(gen);

  auto* oracle = app.add_subcommand("oracle", "Grid oracle of local extrema (n = 2 or 3)");
  add_form(oracle);
  oracle->add_option("--resolution", opt.resolution, "Grid points (default 2e5 for n=2, 1e6 for n=3)");
  add_output(oracle);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*eval) cmd_eval(opt);
    else if (*certify) cmd_certify(opt);
    else if (*search) cmd_search(opt, *search);
    else if (*analyze) cmd_analyze(opt, *analyze);
    else if (*gen) cmd_gen(opt, *gen);
    else if (*oracle) cmd_oracle(opt);
  } catch (const formopt::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}
