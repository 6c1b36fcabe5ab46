#pragma once

// Sparse homogeneous polynomials ("forms") and their calculus.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "formopt/error.hpp"

namespace formopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Exponent = std::vector<int>;

/// Graded lexicographic order, largest first: x1^d precedes x1^(d-1) x2, etc.
struct GrlexDescending {
  bool operator()(const Exponent& a, const Exponent& b) const {
    const int da = std::accumulate(a.begin(), a.end(), 0);
    const int db = std::accumulate(b.begin(), b.end(), 0);
    if (da != db) return da > db;
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
  }
};

struct Term {
  Exponent alpha;
  double c = 0.0;
};

/// Degree-d homogeneous polynomial in n variables, stored as a map from
/// exponent to nonzero coefficient. Immutable once built.
class Form {
 public:
  using TermMap = std::map<Exponent, double, GrlexDescending>;

  Form(int n, int d) : n_(n), d_(d) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "form dimension n must be >= 1");
    if (d < 1) throw Error(ErrorCode::InvalidArgument, "form degree d must be >= 1");
  }

  /// Duplicate exponents are merged by summation; terms that cancel to zero
  /// are dropped.
  Form(int n, int d, const std::vector<Term>& terms) : Form(n, d) {
    for (const auto& t : terms) {
      if (static_cast<int>(t.alpha.size()) != n) {
        throw Error(ErrorCode::DimensionMismatch,
                    "exponent has length " + std::to_string(t.alpha.size()) + ", expected " +
                        std::to_string(n));
      }
      int total = 0;
      for (int a : t.alpha) {
        if (a < 0) throw Error(ErrorCode::InvalidArgument, "negative exponent");
        total += a;
      }
      if (total != d) {
        throw Error(ErrorCode::FormNotHomogeneous,
                    "term of total degree " + std::to_string(total) + " in a degree-" +
                        std::to_string(d) + " form");
      }
      if (!std::isfinite(t.c)) throw Error(ErrorCode::InvalidArgument, "non-finite coefficient");
      terms_[t.alpha] += t.c;
    }
    std::erase_if(terms_, [](const auto& kv) { return kv.second == 0.0; });
  }

  int n() const noexcept { return n_; }
  int d() const noexcept { return d_; }
  const TermMap& terms() const noexcept { return terms_; }
  std::size_t term_count() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }

  Form scaled(double s) const {
    Form out(n_, d_);
    if (s == 0.0) return out;
    for (const auto& [a, c] : terms_) out.terms_.emplace(a, s * c);
    return out;
  }

  Form operator-() const { return scaled(-1.0); }

  friend bool operator==(const Form& a, const Form& b) {
    return a.n_ == b.n_ && a.d_ == b.d_ && a.terms_ == b.terms_;
  }

 private:
  int n_;
  int d_;
  TermMap terms_;
};

/// A point on the unit sphere. Construction either renormalizes explicitly
/// or checks an already-unit vector against a tolerance.
class UnitPoint {
 public:
  static constexpr double kDefaultUnitTol = 1e-12;

  static UnitPoint normalized(Vector v) {
    const double norm = v.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw Error(ErrorCode::InvalidArgument, "cannot normalize a zero or non-finite vector");
    }
    v /= norm;
    return UnitPoint(std::move(v));
  }

  static UnitPoint checked(Vector v, double unit_tol = kDefaultUnitTol) {
    if (v.size() == 0 || !(std::abs(v.norm() - 1.0) <= unit_tol)) {
      throw Error(ErrorCode::InvalidArgument, "point is not on the unit sphere");
    }
    return UnitPoint(std::move(v));
  }

  const Vector& coords() const noexcept { return coords_; }
  int dim() const noexcept { return static_cast<int>(coords_.size()); }
  double operator[](int i) const { return coords_[i]; }
  UnitPoint antipode() const { return UnitPoint(-coords_); }

 private:
  explicit UnitPoint(Vector v) : coords_(std::move(v)) {}
  Vector coords_;
};

/// Symmetric matrix with packed lower-triangular storage, so (i,j) and (j,i)
/// address the same entry.
class SymMatrix {
 public:
  explicit SymMatrix(int order) : order_(order), packed_(static_cast<std::size_t>(order) * (order + 1) / 2, 0.0) {}

  int order() const noexcept { return order_; }

  double operator()(int i, int j) const { return packed_[index(i, j)]; }
  double& operator()(int i, int j) { return packed_[index(i, j)]; }

  Matrix dense() const {
    Matrix m(order_, order_);
    for (int i = 0; i < order_; ++i)
      for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = (*this)(i, j);
    return m;
  }

  Vector operator*(const Vector& v) const {
    require_dim(static_cast<std::size_t>(v.size()), static_cast<std::size_t>(order_), "SymMatrix * v");
    Vector out = Vector::Zero(order_);
    for (int i = 0; i < order_; ++i)
      for (int j = 0; j < order_; ++j) out[i] += (*this)(i, j) * v[j];
    return out;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : packed_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  std::size_t index(int i, int j) const {
    if (i < j) std::swap(i, j);
    return static_cast<std::size_t>(i) * (i + 1) / 2 + static_cast<std::size_t>(j);
  }

  int order_;
  std::vector<double> packed_;
};

namespace detail {

// powers(i, k) = x_i^k for k = 0..d, with 0^0 = 1.
inline Matrix power_table(const Vector& x, int d) {
  Matrix p(x.size(), d + 1);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    p(i, 0) = 1.0;
    for (int k = 1; k <= d; ++k) p(i, k) = p(i, k - 1) * x[i];
  }
  return p;
}

// Product of x_j^{alpha_j - shift_j} over j, where shift is applied to at
// most two indices (i and k, possibly equal).
inline double monomial_value(const Matrix& pw, const Exponent& alpha, int i = -1, int k = -1) {
  double prod = 1.0;
  for (int j = 0; j < static_cast<int>(alpha.size()); ++j) {
    const int e = alpha[j] - (j == i) - (j == k);
    prod *= pw(j, e);
  }
  return prod;
}

}  // namespace detail

inline double eval(const Form& f, const Vector& x) {
  require_dim(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(f.n()), "eval");
  const Matrix pw = detail::power_table(x, f.d());
  double sum = 0.0;
  for (const auto& [alpha, c] : f.terms()) sum += c * detail::monomial_value(pw, alpha);
  return sum;
}

/// Termwise derivative c*alpha_i*x^(alpha - e_i), evaluated at x.
inline Vector gradient(const Form& f, const Vector& x) {
  require_dim(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(f.n()), "gradient");
  const Matrix pw = detail::power_table(x, f.d());
  Vector g = Vector::Zero(f.n());
  for (const auto& [alpha, c] : f.terms()) {
    for (int i = 0; i < f.n(); ++i) {
      if (alpha[i] == 0) continue;
      g[i] += c * alpha[i] * detail::monomial_value(pw, alpha, i);
    }
  }
  return g;
}

inline SymMatrix hessian(const Form& f, const Vector& x) {
  require_dim(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(f.n()), "hessian");
  const Matrix pw = detail::power_table(x, f.d());
  SymMatrix h(f.n());
  for (const auto& [alpha, c] : f.terms()) {
    for (int i = 0; i < f.n(); ++i) {
      if (alpha[i] == 0) continue;
      if (alpha[i] >= 2) {
        h(i, i) += c * alpha[i] * (alpha[i] - 1) * detail::monomial_value(pw, alpha, i, i);
      }
      for (int k = 0; k < i; ++k) {
        if (alpha[k] == 0) continue;
        h(i, k) += c * alpha[i] * alpha[k] * detail::monomial_value(pw, alpha, i, k);
      }
    }
  }
  return h;
}

/// g(x) = f(x) (1 - d/(d+2) |x|^2). Inhomogeneous, so never stored as a Form.
inline double eval_g(const Form& f, const Vector& x) {
  const double d = f.d();
  return eval(f, x) * (1.0 - d / (d + 2.0) * x.squaredNorm());
}

/// grad g(x) = grad f(x) (1 - d/(d+2)|x|^2) - 2d/(d+2) f(x) x.
inline Vector grad_g(const Form& f, const Vector& x) {
  const double d = f.d();
  const Vector gf = gradient(f, x);
  const double fx = eval(f, x);
  return gf * (1.0 - d / (d + 2.0) * x.squaredNorm()) - (2.0 * d / (d + 2.0)) * fx * x;
}

/// All exponents of total degree d in n variables, in GrlexDescending order.
inline std::vector<Exponent> monomials(int n, int d) {
  std::vector<Exponent> out;
  Exponent alpha(n, 0);
  // Recursive fill: assign alpha[i] from high to low, remainder to the tail.
  auto rec = [&](auto&& self, int i, int remaining) -> void {
    if (i == n - 1) {
      alpha[i] = remaining;
      out.push_back(alpha);
      return;
    }
    for (int a = remaining; a >= 0; --a) {
      alpha[i] = a;
      self(self, i + 1, remaining - a);
    }
  };
  rec(rec, 0, d);
  return out;
}

struct RandomScheme {
  enum class Kind { Gaussian, Sparse };
  Kind kind = Kind::Gaussian;
  int k = 0;  // number of terms for Sparse

  static RandomScheme gaussian() { return {}; }
  static RandomScheme sparse(int k) { return {Kind::Sparse, k}; }

  /// Accepts "gaussian", "sparse:K" or "sparse(K)".
  static RandomScheme parse(const std::string& s) {
    if (s == "gaussian" || s == "gaussian-coefficients") return gaussian();
    if (s.rfind("sparse", 0) == 0 && s.size() > 7) {
      std::string digits = s.substr(7);
      if (s[6] == '(' && !digits.empty() && digits.back() == ')') digits.pop_back();
      else if (s[6] != ':') digits.clear();
      try {
        std::size_t used = 0;
        const int k = std::stoi(digits, &used);
        if (used == digits.size() && k >= 1) return sparse(k);
      } catch (const std::exception&) {
      }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown scheme '" + s + "' (use gaussian or sparse:K)");
  }

  std::string to_string() const {
    return kind == Kind::Gaussian ? "gaussian" : "sparse:" + std::to_string(k);
  }
};

/// Deterministic in (n, d, seed, scheme). Coefficients are standard normal;
/// the sparse scheme picks min(k, #monomials) distinct monomials first.
inline Form random_form(int n, int d, std::uint64_t seed, RandomScheme scheme = RandomScheme::gaussian()) {
  if (n < 1 || d < 1) throw Error(ErrorCode::InvalidArgument, "random_form needs n >= 1 and d >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Exponent> all = monomials(n, d);

  std::vector<Exponent> chosen;
  if (scheme.kind == RandomScheme::Kind::Gaussian) {
    chosen = std::move(all);
  } else {
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(scheme.k), all.size());
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, all.size() - 1);
      std::swap(all[i], all[pick(rng)]);
    }
    all.resize(k);
    std::sort(all.begin(), all.end(), GrlexDescending{});
    chosen = std::move(all);
  }

  std::vector<Term> terms;
  terms.reserve(chosen.size());
  for (auto& alpha : chosen) {
    double c = 0.0;
    while (c == 0.0) c = normal(rng);
    terms.push_back({std::move(alpha), c});
  }
  return Form(n, d, terms);
}

}  // namespace formopt
