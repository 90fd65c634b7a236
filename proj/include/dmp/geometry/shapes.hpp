#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dmp/geometry/types.hpp"

namespace dmp::geometry {

enum class ShapeName { sphere, torus, ring, spiral, plane };

inline std::string to_string(ShapeName s) {
  switch (s) {
    case ShapeName::sphere: return "sphere";
    case ShapeName::torus: return "torus";
    case ShapeName::ring: return "ring";
    case ShapeName::spiral: return "spiral";
    case ShapeName::plane: return "plane";
  }
  return "unknown";
}

inline ShapeName parse_shape(std::string_view name) {
  for (ShapeName s : {ShapeName::sphere, ShapeName::torus, ShapeName::ring, ShapeName::spiral,
                      ShapeName::plane}) {
    if (name == to_string(s)) return s;
  }
  throw InvalidArgument("unknown shape '" + std::string(name) +
                        "' (expected sphere, torus, ring, spiral or plane)");
}

/// True for shapes whose natural parameterization is a curve.
inline bool is_curve(ShapeName s) { return s == ShapeName::ring || s == ShapeName::spiral; }

/// Optional overrides; unset fields take per-shape defaults.
struct ShapeParams {
  std::optional<double> radius;        ///< sphere/ring/spiral radius, torus major radius, plane half-width
  std::optional<double> minor_radius;  ///< torus tube radius
  std::optional<std::size_t> resolution;
};

inline const Vec3 kUnitCubeCenter{0.5, 0.5, 0.5};

namespace detail {

inline TriangleMesh icosphere(double radius, std::size_t subdivisions) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleMesh m;
  m.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
             {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (auto& v : m.vertices) v.normalize();
  for (std::size_t s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> mid;
    auto midpoint = [&](std::size_t a, std::size_t b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      m.vertices.push_back((m.vertices[a] + m.vertices[b]).normalized());
      mid.emplace(key, m.vertices.size() - 1);
      return m.vertices.size() - 1;
    };
    std::vector<std::array<std::size_t, 3>> faces;
    faces.reserve(m.faces.size() * 4);
    for (const auto& f : m.faces) {
      const std::size_t a = midpoint(f[0], f[1]), b = midpoint(f[1], f[2]), c = midpoint(f[2], f[0]);
      faces.push_back({f[0], a, c});
      faces.push_back({f[1], b, a});
      faces.push_back({f[2], c, b});
      faces.push_back({a, b, c});
    }
    m.faces = std::move(faces);
  }
  for (auto& v : m.vertices) v = kUnitCubeCenter + radius * v;
  return m;
}

/// (u, v) grid mesh with u periodic when `wrap_u`, v periodic when `wrap_v`.
template <class F>
TriangleMesh param_surface(std::size_t nu, std::size_t nv, bool wrap_u, bool wrap_v, F&& f) {
  TriangleMesh m;
  const std::size_t cu = wrap_u ? nu : nu + 1;
  const std::size_t cv = wrap_v ? nv : nv + 1;
  for (std::size_t i = 0; i < cu; ++i) {
    for (std::size_t j = 0; j < cv; ++j) {
      m.vertices.push_back(f(static_cast<double>(i) / static_cast<double>(nu),
                             static_cast<double>(j) / static_cast<double>(nv)));
    }
  }
  auto id = [&](std::size_t i, std::size_t j) { return (i % cu) * cv + (j % cv); };
  for (std::size_t i = 0; i < nu; ++i) {
    for (std::size_t j = 0; j < nv; ++j) {
      m.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return m;
}

template <class F>
TriangleMesh param_curve(std::size_t n, bool closed, F&& f) {
  TriangleMesh m;
  const std::size_t count = closed ? n : n + 1;
  for (std::size_t i = 0; i < count; ++i) {
    m.vertices.push_back(f(static_cast<double>(i) / static_cast<double>(n)));
  }
  for (std::size_t i = 0; i < n; ++i) m.edges.push_back({i, (i + 1) % count});
  return m;
}

inline double positive(const std::optional<double>& v, double fallback, const char* what) {
  const double x = v.value_or(fallback);
  if (!(x > 0.0) || !std::isfinite(x)) throw InvalidArgument(std::string(what) + " must be positive");
  return x;
}

}  // namespace detail

/// Benchmark shapes centered in the unit cube. Surfaces come back as
/// triangle meshes; the ring (circle) and spiral (helix) as closed/open
/// polylines in `edges`.
inline TriangleMesh procedural_shape(ShapeName name, const ShapeParams& params = {}) {
  constexpr double pi = std::numbers::pi;
  switch (name) {
    case ShapeName::sphere: {
      const double r = detail::positive(params.radius, 0.5, "sphere radius");
      return detail::icosphere(r, params.resolution.value_or(4));
    }
    case ShapeName::torus: {
      const double big = detail::positive(params.radius, 0.35, "torus major radius");
      const double small = detail::positive(params.minor_radius, 0.12, "torus minor radius");
      if (small >= big) throw InvalidArgument("torus minor radius must be below the major radius");
      const std::size_t n = params.resolution.value_or(96);
      return detail::param_surface(n, std::max<std::size_t>(n / 2, 3), true, true,
                                   [&](double u, double v) -> Vec3 {
                                     const double a = 2 * pi * u, b = 2 * pi * v;
                                     const double w = big + small * std::cos(b);
                                     return kUnitCubeCenter +
                                            Vec3(w * std::cos(a), w * std::sin(a), small * std::sin(b));
                                   });
    }
    case ShapeName::plane: {
      const double h = detail::positive(params.radius, 0.4, "plane half-width");
      const std::size_t n = params.resolution.value_or(16);
      return detail::param_surface(n, n, false, false, [&](double u, double v) -> Vec3 {
        return kUnitCubeCenter + Vec3(h * (2 * u - 1), h * (2 * v - 1), 0.0);
      });
    }
    case ShapeName::ring: {
      const double r = detail::positive(params.radius, 0.4, "ring radius");
      return detail::param_curve(params.resolution.value_or(512), true, [&](double u) -> Vec3 {
        return kUnitCubeCenter + Vec3(r * std::cos(2 * pi * u), r * std::sin(2 * pi * u), 0.0);
      });
    }
    case ShapeName::spiral: {
      const double r = detail::positive(params.radius, 0.35, "spiral radius");
      constexpr double turns = 3.0, height = 0.8;
      return detail::param_curve(params.resolution.value_or(768), false, [&](double u) -> Vec3 {
        const double a = 2 * pi * turns * u;
        return kUnitCubeCenter + Vec3(r * std::cos(a), r * std::sin(a), height * (u - 0.5));
      });
    }
  }
  throw InvalidArgument("unknown shape");
}

inline TriangleMesh procedural_shape(std::string_view name, const ShapeParams& params = {}) {
  return procedural_shape(parse_shape(name), params);
}

/// Similarity p' = (p - center) * scale + 0.5.
struct UnitCubeTransform {
  Vec3 center = kUnitCubeCenter;
  double scale = 1.0;
  Vec3 apply(const Vec3& p) const { return (p - center) * scale + kUnitCubeCenter; }
  Vec3 invert(const Vec3& p) const { return (p - kUnitCubeCenter) / scale + center; }
};

/// Transform that centers the bounding box of `points` in the unit cube and
/// scales its longest side to 1.
inline UnitCubeTransform unit_cube_transform(const std::vector<Vec3>& points) {
  if (points.empty()) throw InvalidArgument("cannot normalize an empty point set");
  Vec3 lo = points.front(), hi = points.front();
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double extent = (hi - lo).maxCoeff();
  UnitCubeTransform t;
  t.center = 0.5 * (lo + hi);
  t.scale = extent > 0.0 ? 1.0 / extent : 1.0;
  return t;
}

inline void apply_transform(const UnitCubeTransform& t, std::vector<Vec3>& points) {
  for (auto& p : points) p = t.apply(p);
}

}  // namespace dmp::geometry
