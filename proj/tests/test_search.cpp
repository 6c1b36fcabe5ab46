#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "formopt/grid_oracle.hpp"
#include "formopt/search.hpp"
#include "test_support.hpp"

using namespace formopt;
using formopt::testing::indefinite_quartic;
using formopt::testing::quartic_sum;
using formopt::testing::tilted_quartic;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

int count_class(const std::vector<CriticalPoint>& pts, Classification c) {
  return static_cast<int>(std::count_if(pts.begin(), pts.end(), [&](const auto& p) { return p.cert.classification == c; }));
}

// Distance between x and the nearest of {y, -y} when antipodes are identified.
double class_distance(const Vector& x, const Vector& y, bool antipodal) {
  const double direct = (x - y).norm();
  return antipodal ? std::min(direct, (x + y).norm()) : direct;
}

}  // namespace

TEST(Descend, ConvergesToDiagonalMinimum) {
  const DescentResult r = descend(quartic_sum(), UnitPoint::normalized(Vector{{0.6, 0.8}}));
  EXPECT_EQ(r.status, DescentStatus::Converged);
  EXPECT_NEAR(r.point[0], kInvSqrt2, 1e-6);
  EXPECT_NEAR(r.point[1], kInvSqrt2, 1e-6);
  EXPECT_NEAR(eval(quartic_sum(), r.point.coords()), 0.5, 1e-12);
}

TEST(Descend, LeavesMaximumForNegativeMinimum) {
  const DescentResult r = descend(indefinite_quartic(), UnitPoint::normalized(Vector{{0.99, 0.141}}));
  EXPECT_EQ(r.status, DescentStatus::Converged);
  EXPECT_NEAR(r.point[0], 0.0, 1e-6);
  EXPECT_NEAR(r.point[1], 1.0, 1e-6);
  EXPECT_NEAR(eval(indefinite_quartic(), r.point.coords()), -2.0, 1e-12);
}

TEST(Descend, CriticalStartIsUnchanged) {
  const UnitPoint x0 = UnitPoint::normalized(Vector{{1.0, 0.0}});
  const DescentResult r = descend(quartic_sum(), x0);
  EXPECT_EQ(r.status, DescentStatus::Converged);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.point.coords(), x0.coords());
}

TEST(Descend, MonotoneOnRandomForms) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 4;
    const Form f = random_form(n, 3 + trial % 3, 2100 + trial);
    const DescentResult r = descend(f, UnitPoint::normalized(formopt::testing::random_gaussian(n, rng)));
    for (std::size_t k = 1; k < r.accepted_values.size(); ++k) {
      EXPECT_LE(r.accepted_values[k], r.accepted_values[k - 1]);
    }
  }
}

TEST(Descend, ReportsNoDescentWhenStepUnderflows) {
  SearchConfig cfg;
  cfg.min_step = 1e300;  // every trial step is already below the floor
  const DescentResult r = descend(quartic_sum(), UnitPoint::normalized(Vector{{0.6, 0.8}}), cfg);
  EXPECT_EQ(r.status, DescentStatus::NoDescent);
  EXPECT_NEAR(r.point[0], 0.6, 1e-15);
}

TEST(NewtonRefine, SnapsToDiagonal) {
  const NewtonResult r = newton_refine(quartic_sum(), UnitPoint::normalized(Vector{{0.7072, 0.7070}}));
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.point[0], kInvSqrt2, 1e-12);
  EXPECT_NEAR(r.point[1], kInvSqrt2, 1e-12);
  EXPECT_LE(fonc_residual(quartic_sum(), r.point), 1e-12 * 3.0);
}

TEST(NewtonRefine, SnapsToAxis) {
  const NewtonResult r = newton_refine(indefinite_quartic(), UnitPoint::normalized(Vector{{1e-6, 1.0 - 5e-13}}));
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.point[0], 0.0, 1e-12);
  EXPECT_NEAR(r.point[1], 1.0, 1e-12);
}

TEST(NewtonRefine, ExactPointIsFixed) {
  const UnitPoint x = UnitPoint::normalized(Vector{{0.0, 1.0}});
  const NewtonResult r = newton_refine(indefinite_quartic(), x);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.point.coords(), x.coords());
}

TEST(NewtonRefine, SingularJacobianReturnsInput) {
  // Linear form x1 at (0,1): mu = 0 and the Hessian vanishes.
  const Form f(2, 1, {{{1, 0}, 1.0}});
  const UnitPoint x = UnitPoint::normalized(Vector{{0.0, 1.0}});
  const NewtonResult r = newton_refine(f, x);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.status, NewtonStatus::SingularJacobian);
  EXPECT_EQ(r.point.coords(), x.coords());
}

TEST(FindCritical, SumOfFourthPowers) {
  SearchConfig cfg;
  cfg.starts = 64;
  const auto res = find_critical(quartic_sum(), cfg);
  ASSERT_EQ(res.points.size(), 4u);
  EXPECT_EQ(count_class(res.points, Classification::StrictLocalMin), 2);
  EXPECT_EQ(count_class(res.points, Classification::FONCNotSONC), 2);
  for (const auto& p : res.points) {
    if (p.cert.classification == Classification::StrictLocalMin) {
      EXPECT_NEAR(p.cert.f_val, 0.5, 1e-12);
      EXPECT_NEAR(std::abs(p.point[0]), kInvSqrt2, 1e-12);
    } else {
      EXPECT_NEAR(p.cert.f_val, 1.0, 1e-12);
    }
  }
  int hits = 0;
  for (const auto& p : res.points) hits += p.hits;
  EXPECT_EQ(hits, 64 - res.stats.failed_starts);
}

TEST(FindCritical, IndefiniteQuartic) {
  const auto res = find_critical(indefinite_quartic(), {});
  bool min_axis = false, max_axis = false;
  for (const auto& p : res.points) {
    if (std::abs(std::abs(p.point[1]) - 1.0) < 1e-12) {
      min_axis = true;
      EXPECT_EQ(p.cert.classification, Classification::StrictLocalMin);
      EXPECT_NEAR(p.cert.f_val, -2.0, 1e-12);
    }
    if (std::abs(std::abs(p.point[0]) - 1.0) < 1e-12) {
      max_axis = true;
      EXPECT_EQ(p.cert.classification, Classification::FONCNotSONC);
      EXPECT_NEAR(p.cert.f_val, 1.0, 1e-12);
    }
  }
  EXPECT_TRUE(min_axis);
  EXPECT_TRUE(max_axis);
}

TEST(FindCritical, DiagonalQuadratic) {
  const Form f(3, 2, {{{2, 0, 0}, 1.0}, {{0, 2, 0}, 2.0}, {{0, 0, 2}, 3.0}});
  const auto res = find_critical(f, {});
  ASSERT_EQ(res.points.size(), 3u);
  EXPECT_EQ(res.points[0].cert.classification, Classification::StrictLocalMin);
  EXPECT_NEAR(res.points[0].cert.f_val, 1.0, 1e-12);
  EXPECT_EQ(count_class(res.points, Classification::StrictLocalMin), 1);
}

TEST(FindCritical, OddDegreeNeverMergesAntipodes) {
  const Form f = random_form(2, 3, 77);
  const auto res = find_critical(f, {});
  for (std::size_t i = 0; i < res.points.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      EXPECT_GT((res.points[i].point.coords() - res.points[j].point.coords()).norm(), 1e-6);
  // f(-x) = -f(x): each minimum has a maximum opposite it.
  for (const auto& p : res.points) {
    if (!is_local_min(p.cert.classification)) continue;
    const bool opposite = std::any_of(res.points.begin(), res.points.end(), [&](const auto& q) {
      return (q.point.coords() + p.point.coords()).norm() < 1e-9;
    });
    EXPECT_TRUE(opposite);
  }
}

TEST(FindCritical, KeepAntipodesWhenAsked) {
  SearchConfig cfg;
  cfg.identify_antipodal = false;
  EXPECT_EQ(find_critical(quartic_sum(), cfg).points.size(), 8u);
}

TEST(FindCritical, PointsSatisfyBothFirstOrderForms) {
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 2 + trial % 3;
    const Form f = random_form(n, 3 + trial % 3, 2500 + trial);
    const auto res = find_critical(f, {});
    ASSERT_FALSE(res.points.empty());
    for (const auto& p : res.points) {
      EXPECT_LE(p.cert.fonc_residual, p.cert.fonc_tol);
      EXPECT_GE(p.hits, 1);
      const double d = f.d();
      EXPECT_LE(grad_g(f, p.point.coords()).norm(), (2.0 / (d + 2.0)) * p.cert.fonc_tol * (1.0 + 1e-12));
    }
  }
}

TEST(FindCritical, DeterministicAcrossThreadCounts) {
  const Form f = random_form(3, 4, 5);
  SearchConfig one;
  one.seed = 42;
  one.threads = 1;
  SearchConfig many = one;
  many.threads = 8;
  const auto a = find_critical(f, one);
  const auto b = find_critical(f, many);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_EQ(a.points[i].point.coords(), b.points[i].point.coords());
    EXPECT_EQ(a.points[i].hits, b.points[i].hits);
    EXPECT_EQ(a.points[i].cert.classification, b.points[i].cert.classification);
  }
}

TEST(FindCritical, RejectsBadConfig) {
  SearchConfig cfg;
  cfg.dedup_tol = 0.0;
  EXPECT_THROW(find_critical(quartic_sum(), cfg), Error);
  cfg = {};
  cfg.starts = -1;
  EXPECT_THROW(find_critical(quartic_sum(), cfg), Error);
}

// Every certified minimum lies within two grid spacings of a grid minimum and
// every grid minimum has a certified minimum nearby.
TEST(FindCritical, MatchesGridOracleOnCircle) {
  std::vector<Form> forms{quartic_sum(), indefinite_quartic(), tilted_quartic()};
  for (int s = 0; s < 3; ++s) forms.push_back(random_form(2, 4, 3000 + s));
  for (int s = 0; s < 3; ++s) forms.push_back(random_form(2, 3, 3100 + s));
  for (const Form& f : forms) {
    const auto res = find_critical(f, {});
    const OracleResult oracle = grid_oracle(f);
    const bool antipodal = f.d() % 2 == 0;
    const double tol = 2.0 * oracle.spacing;
    for (const auto& p : res.points) {
      if (!is_local_min(p.cert.classification)) continue;
      const bool found = std::any_of(oracle.extrema.begin(), oracle.extrema.end(), [&](const auto& e) {
        return e.is_local_min && class_distance(e.point.coords(), p.point.coords(), antipodal) <= tol;
      });
      EXPECT_TRUE(found);
    }
    for (const auto& e : oracle.minima()) {
      const bool found = std::any_of(res.points.begin(), res.points.end(), [&](const auto& p) {
        return is_local_min(p.cert.classification) &&
               class_distance(e.point.coords(), p.point.coords(), antipodal) <= tol;
      });
      EXPECT_TRUE(found) << "oracle minimum value " << e.value << " missed";
    }
  }
}

TEST(FindCritical, MatchesGridOracleOnTwoSphere) {
  const std::vector<Form> forms{Form(3, 2, {{{2, 0, 0}, 1.0}, {{0, 2, 0}, 2.0}, {{0, 0, 2}, 3.0}}),
                                random_form(3, 4, 3200), random_form(3, 3, 3201)};
  for (const Form& f : forms) {
    const auto res = find_critical(f, {});
    const OracleResult oracle = grid_oracle(f, 200'000);
    const bool antipodal = f.d() % 2 == 0;
    const double tol = 2.0 * oracle.spacing;
    for (const auto& e : oracle.minima()) {
      const bool found = std::any_of(res.points.begin(), res.points.end(), [&](const auto& p) {
        return is_local_min(p.cert.classification) &&
               class_distance(e.point.coords(), p.point.coords(), antipodal) <= tol;
      });
      EXPECT_TRUE(found) << "oracle minimum value " << e.value << " missed";
    }
    for (const auto& p : res.points) {
      if (!is_local_min(p.cert.classification)) continue;
      const bool found = std::any_of(oracle.extrema.begin(), oracle.extrema.end(), [&](const auto& e) {
        return e.is_local_min && class_distance(e.point.coords(), p.point.coords(), antipodal) <= tol;
      });
      EXPECT_TRUE(found);
    }
  }
}
