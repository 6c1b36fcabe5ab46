#pragma once

// Decides whether a form has spurious local minima on the sphere from a list
// of certified critical points. The value of f is constant on each real
// component of the critical set, so distinct local-minimum values reveal
// distinct components; here they are found by 1-D single-linkage clustering
// of the certified minimum values.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string_view>
#include <vector>

#include "formopt/certify.hpp"
#include "formopt/error.hpp"
#include "formopt/form.hpp"
#include "formopt/search.hpp"
#include "formopt/tolerance.hpp"

namespace formopt {

enum class Verdict { NoSpurious, Spurious, Inconclusive };

inline constexpr std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::NoSpurious: return "NoSpurious";
    case Verdict::Spurious: return "Spurious";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "Unknown";
}

/// Membership in the set of sphere points passing the second-order test,
/// written with |grad f| in place of d|f|: for f < 0, lambda_2 >= -|grad f|;
/// for f >= 0, lambda_1 >= |grad f|. At first-order points the two forms agree.
inline bool omega_membership(const Form& f, const UnitPoint& x, const ToleranceSet& tols = {}) {
  require_dim(static_cast<std::size_t>(x.dim()), static_cast<std::size_t>(f.n()), "omega_membership");
  if (f.n() == 1) return true;
  const Vector& p = x.coords();
  const double fx = eval(f, p);
  const double gnorm = gradient(f, p).norm();
  const SymMatrix h = hessian(f, p);
  const auto [l1, l2] = lambda_pair(h);
  const double slack = tols.eig_tol(h.max_abs());
  // Same d <= 2 convention as sonc_detail.
  if (fx < 0.0 && f.d() > 2) return l2 >= -gnorm - slack;
  if (fx < 0.0) return l1 >= -gnorm - slack;
  return l1 >= gnorm - slack;
}

struct ValueCluster {
  double value = 0.0;  // smallest member value
  std::vector<int> members;
  double width = 0.0;
};

struct SpuriousReport {
  std::vector<ValueCluster> clusters;
  Verdict verdict = Verdict::Inconclusive;
  Verdict negative_verdict = Verdict::Inconclusive;
  bool genericity_witness = false;
  double global_min_estimate = 0.0;
  double cluster_eps = 0.0;
  int critical_count = 0;
  int minima_count = 0;
  bool degenerate_found = false;
  bool ambiguous_separation = false;
};

inline double default_cluster_eps(double global_min_estimate) {
  return 1e-6 * (1.0 + std::abs(global_min_estimate));
}

namespace detail {

// Ambiguous if two neighbouring clusters are within 3 eps or a chain grew
// wider than eps.
inline bool ambiguous(const std::vector<ValueCluster>& cs, double eps) {
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (cs[i].width > eps) return true;
    if (i > 0) {
      const double prev_top = cs[i - 1].value + cs[i - 1].width;
      if (cs[i].value - prev_top <= 3.0 * eps) return true;
    }
  }
  return false;
}

inline Verdict verdict_for(const std::vector<ValueCluster>& cs, double eps, bool blocked) {
  if (blocked || ambiguous(cs, eps)) return Verdict::Inconclusive;
  return cs.size() <= 1 ? Verdict::NoSpurious : Verdict::Spurious;
}

}  // namespace detail

/// cluster_eps <= 0 selects the default 1e-6 (1 + |global min estimate|).
inline SpuriousReport analyze(const Form& f, const std::vector<CriticalPoint>& criticals, double cluster_eps = 0.0) {
  if (criticals.empty()) throw Error(ErrorCode::EmptyInput, "no critical points to analyze");
  for (const auto& c : criticals) require_dim(static_cast<std::size_t>(c.point.dim()), static_cast<std::size_t>(f.n()), "analyze");

  SpuriousReport rep;
  rep.critical_count = static_cast<int>(criticals.size());
  rep.genericity_witness = true;
  std::vector<int> minima;
  double lowest_any = criticals.front().cert.f_val;
  for (int i = 0; i < static_cast<int>(criticals.size()); ++i) {
    const Certificate& c = criticals[static_cast<std::size_t>(i)].cert;
    lowest_any = std::min(lowest_any, c.f_val);
    const bool fonc_sonc = c.classification == Classification::LocalMin ||
                           c.classification == Classification::StrictLocalMin ||
                           c.classification == Classification::DegenerateSONC;
    if (fonc_sonc && !(std::abs(c.det_bordered) > c.det_tol)) rep.genericity_witness = false;
    if (c.classification == Classification::DegenerateSONC) rep.degenerate_found = true;
    if (is_local_min(c.classification)) minima.push_back(i);
  }
  rep.minima_count = static_cast<int>(minima.size());

  auto value_of = [&](int i) { return criticals[static_cast<std::size_t>(i)].cert.f_val; };
  std::stable_sort(minima.begin(), minima.end(), [&](int a, int b) { return value_of(a) < value_of(b); });
  rep.global_min_estimate = minima.empty() ? lowest_any : value_of(minima.front());
  rep.cluster_eps = cluster_eps > 0.0 ? cluster_eps : default_cluster_eps(rep.global_min_estimate);

  for (int i : minima) {
    if (rep.clusters.empty() || value_of(i) - value_of(rep.clusters.back().members.back()) > rep.cluster_eps) {
      rep.clusters.push_back({value_of(i), {}, 0.0});
    }
    auto& cl = rep.clusters.back();
    cl.members.push_back(i);
    cl.width = value_of(i) - cl.value;
  }
  rep.ambiguous_separation = detail::ambiguous(rep.clusters, rep.cluster_eps);

  // No certified minimum at all means the search missed the global one.
  const bool blocked = minima.empty() || rep.degenerate_found || !rep.genericity_witness;
  rep.verdict = detail::verdict_for(rep.clusters, rep.cluster_eps, blocked);

  std::vector<ValueCluster> negative;
  for (const auto& cl : rep.clusters) {
    const double eig_tol = criticals[static_cast<std::size_t>(cl.members.front())].cert.eig_tol;
    if (cl.value < -eig_tol) negative.push_back(cl);
  }
  rep.negative_verdict =
      detail::verdict_for(negative, rep.cluster_eps, rep.degenerate_found || !rep.genericity_witness);
  return rep;
}

struct BallSphereConfig {
  int samples = 5000;
  double radius = 1e-2;
  double scale = 0.9;  // inward scaling factor for positive minima
  std::uint64_t seed = 0;
};

struct BallPointCheck {
  int index = 0;
  double f_val = 0.0;
  bool sampled = false;    // true: ball sampling; false: scaling witness
  bool passed = false;
  double best_value = 0.0; // lowest sampled value, or f(scale * x)
};

struct BallSphereReport {
  std::vector<BallPointCheck> checks;
  bool passed = true;
};

/// Empirical check that sphere minima with f <= 0 stay minima over the unit
/// ball (sampling B(x, r) intersected with the ball), and that positive sphere
/// minima are not ball minima (f(s x) = s^d f(x) < f(x) for s < 1).
inline BallSphereReport ball_sphere_check(const Form& f, const std::vector<CriticalPoint>& criticals,
                                          const BallSphereConfig& cfg = {}) {
  BallSphereReport rep;
  for (int i = 0; i < static_cast<int>(criticals.size()); ++i) {
    const CriticalPoint& cp = criticals[static_cast<std::size_t>(i)];
    if (!is_local_min(cp.cert.classification)) continue;
    const Vector& x = cp.point.coords();
    const double fx = eval(f, x);
    BallPointCheck chk{.index = i, .f_val = fx};

    if (fx > cp.cert.eig_tol) {
      chk.best_value = eval(f, cfg.scale * x);
      chk.passed = chk.best_value < fx;
    } else {
      chk.sampled = true;
      std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                        static_cast<std::uint32_t>(i)};
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> normal(0.0, 1.0);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const int n = f.n();
      const double slack = 1e-10 * (1.0 + std::abs(fx));
      chk.best_value = fx;
      for (int s = 0; s < cfg.samples; ++s) {
        Vector dir(n);
        for (int k = 0; k < n; ++k) dir[k] = normal(rng);
        const double dn = dir.norm();
        if (dn == 0.0) continue;
        Vector y = x + (cfg.radius * std::pow(unit(rng), 1.0 / n) / dn) * dir;
        // Nearest-point projection onto the closed unit ball; it cannot move
        // y farther from x, which already lies in the ball.
        if (y.norm() > 1.0) y /= y.norm();
        chk.best_value = std::min(chk.best_value, eval(f, y));
      }
      chk.passed = chk.best_value >= fx - slack;
    }
    rep.passed = rep.passed && chk.passed;
    rep.checks.push_back(chk);
  }
  return rep;
}

}  // namespace formopt
