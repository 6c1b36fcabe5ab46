#pragma once

// Brute-force sampling oracle on S^1 and S^2, independent of the calculus in
// form.hpp apart from plain evaluation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <numbers>
#include <vector>

#include "formopt/error.hpp"
#include "formopt/form.hpp"

namespace formopt {

struct OracleExtremum {
  UnitPoint point;
  double value = 0.0;
  bool is_local_min = true;  // false: a discrete local maximum
};

struct OracleResult {
  std::vector<OracleExtremum> extrema;
  int resolution = 0;
  double spacing = 0.0;  // typical distance between neighbouring grid points

  std::vector<OracleExtremum> minima() const {
    std::vector<OracleExtremum> out;
    std::copy_if(extrema.begin(), extrema.end(), std::back_inserter(out),
                 [](const OracleExtremum& e) { return e.is_local_min; });
    return out;
  }
};

inline int default_oracle_resolution(int n) { return n == 2 ? 200'000 : 1'000'000; }

namespace detail {

// Strict total order on samples so plateaus yield a single extremum.
inline bool sample_less(const std::vector<double>& v, std::size_t a, std::size_t b) {
  return v[a] < v[b] || (v[a] == v[b] && a < b);
}

inline OracleResult circle_oracle(const Form& f, int resolution) {
  const std::size_t count = static_cast<std::size_t>(resolution);
  std::vector<double> values(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
    values[k] = eval(f, Vector{{std::cos(t), std::sin(t)}});
  }
  OracleResult out;
  out.resolution = resolution;
  out.spacing = 2.0 * std::numbers::pi / static_cast<double>(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t prev = (k + count - 1) % count;
    const std::size_t next = (k + 1) % count;
    const bool is_min = sample_less(values, k, prev) && sample_less(values, k, next);
    const bool is_max = sample_less(values, prev, k) && sample_less(values, next, k);
    if (!is_min && !is_max) continue;
    const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
    out.extrema.push_back({UnitPoint::normalized(Vector{{std::cos(t), std::sin(t)}}), values[k], is_min});
  }
  return out;
}

/// Uniform voxel grid over [-1,1]^3 with CSR buckets for k-nearest queries.
class VoxelIndex {
 public:
  VoxelIndex(const std::vector<std::array<double, 3>>& pts, double cell)
      : pts_(pts), cell_(cell), m_(static_cast<int>(std::ceil(2.0 / cell)) + 1) {
    const std::size_t cells = static_cast<std::size_t>(m_) * m_ * m_;
    start_.assign(cells + 1, 0);
    std::vector<std::uint32_t> id(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      id[i] = cell_id(coord(pts[i][0]), coord(pts[i][1]), coord(pts[i][2]));
      ++start_[id[i] + 1];
    }
    for (std::size_t c = 0; c < cells; ++c) start_[c + 1] += start_[c];
    members_.resize(pts.size());
    std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < pts.size(); ++i) members_[fill[id[i]]++] = static_cast<std::uint32_t>(i);
  }

  /// Indices of the k nearest points to pts[i], excluding i itself.
  std::vector<std::uint32_t> nearest(std::size_t i, std::size_t k) const {
    const auto& p = pts_[i];
    const int cx = coord(p[0]), cy = coord(p[1]), cz = coord(p[2]);
    std::vector<std::pair<double, std::uint32_t>> cand;
    for (int ring = 1;; ++ring) {
      cand.clear();
      for (int x = std::max(cx - ring, 0); x <= std::min(cx + ring, m_ - 1); ++x)
        for (int y = std::max(cy - ring, 0); y <= std::min(cy + ring, m_ - 1); ++y)
          for (int z = std::max(cz - ring, 0); z <= std::min(cz + ring, m_ - 1); ++z) {
            const std::uint32_t c = cell_id(x, y, z);
            for (std::uint32_t s = start_[c]; s < start_[c + 1]; ++s) {
              const std::uint32_t j = members_[s];
              if (j == i) continue;
              const auto& q = pts_[j];
              const double dx = p[0] - q[0], dy = p[1] - q[1], dz = p[2] - q[2];
              cand.emplace_back(dx * dx + dy * dy + dz * dz, j);
            }
          }
      if (cand.size() < k && ring < m_) continue;
      const std::size_t kk = std::min(k, cand.size());
      std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(kk), cand.end());
      // The searched cube covers every point within ring * cell of p.
      const double reach = ring * cell_;
      if (kk == k && cand[kk - 1].first <= reach * reach) {
        std::vector<std::uint32_t> out(kk);
        for (std::size_t t = 0; t < kk; ++t) out[t] = cand[t].second;
        return out;
      }
      if (ring >= m_) {
        std::vector<std::uint32_t> out(kk);
        for (std::size_t t = 0; t < kk; ++t) out[t] = cand[t].second;
        return out;
      }
    }
  }

 private:
  int coord(double v) const { return std::clamp(static_cast<int>((v + 1.0) / cell_), 0, m_ - 1); }
  std::uint32_t cell_id(int x, int y, int z) const {
    return static_cast<std::uint32_t>(x + m_ * (y + m_ * z));
  }

  const std::vector<std::array<double, 3>>& pts_;
  double cell_;
  int m_;
  std::vector<std::uint32_t> start_;
  std::vector<std::uint32_t> members_;
};

inline std::vector<std::array<double, 3>> fibonacci_sphere(int count) {
  std::vector<std::array<double, 3>> pts(static_cast<std::size_t>(count));
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    pts[static_cast<std::size_t>(i)] = {r * std::cos(phi), r * std::sin(phi), z};
  }
  return pts;
}

inline OracleResult sphere_oracle(const Form& f, int resolution, std::size_t k) {
  const auto pts = fibonacci_sphere(resolution);
  std::vector<double> values(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) values[i] = eval(f, Vector{{pts[i][0], pts[i][1], pts[i][2]}});

  OracleResult out;
  out.resolution = resolution;
  out.spacing = std::sqrt(4.0 * std::numbers::pi / resolution);
  const VoxelIndex index(pts, 3.0 * out.spacing);

  std::vector<OracleExtremum> raw;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool is_min = true, is_max = true;
    for (std::uint32_t j : index.nearest(i, k)) {
      if (!sample_less(values, i, j)) is_min = false;
      if (!sample_less(values, j, i)) is_max = false;
      if (!is_min && !is_max) break;
    }
    if (!is_min && !is_max) continue;
    raw.push_back({UnitPoint::normalized(Vector{{pts[i][0], pts[i][1], pts[i][2]}}), values[i], is_min});
  }
  // Collapse same-kind extrema closer than two spacings, keeping the extreme one.
  std::sort(raw.begin(), raw.end(), [](const OracleExtremum& a, const OracleExtremum& b) {
    return a.is_local_min != b.is_local_min ? a.is_local_min : (a.is_local_min ? a.value < b.value : a.value > b.value);
  });
  for (const auto& e : raw) {
    const bool dup = std::any_of(out.extrema.begin(), out.extrema.end(), [&](const OracleExtremum& o) {
      return o.is_local_min == e.is_local_min && (o.point.coords() - e.point.coords()).norm() <= 2.0 * out.spacing;
    });
    if (!dup) out.extrema.push_back(e);
  }
  return out;
}

}  // namespace detail

/// Discrete local extrema of f on a dense grid: a uniform angular grid on S^1
/// (neighbours on either side) or a Fibonacci lattice on S^2 (k = 8 nearest
/// neighbours). Positions are accurate to the grid spacing.
inline OracleResult grid_oracle(const Form& f, int resolution = 0) {
  if (f.n() != 2 && f.n() != 3) {
    throw Error(ErrorCode::UnsupportedDimension,
                "grid oracle supports n = 2 or 3, got n = " + std::to_string(f.n()));
  }
  if (resolution == 0) resolution = default_oracle_resolution(f.n());
  if (resolution < 8) throw Error(ErrorCode::InvalidArgument, "oracle resolution must be >= 8");
  return f.n() == 2 ? detail::circle_oracle(f, resolution) : detail::sphere_oracle(f, resolution, 8);
}

}  // namespace formopt
