#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dmp/geometry/types.hpp"

namespace dmp::geometry {

namespace mc {

// Corner c of a cell sits at offset (c & 1, (c >> 1) & 1, (c >> 2) & 1).
struct CubeEdge {
  int a, b, axis;
};

inline constexpr std::array<CubeEdge, 12> kEdges{{{0, 1, 0},
                                                  {2, 3, 0},
                                                  {4, 5, 0},
                                                  {6, 7, 0},
                                                  {0, 2, 1},
                                                  {1, 3, 1},
                                                  {4, 6, 1},
                                                  {5, 7, 1},
                                                  {0, 4, 2},
                                                  {1, 5, 2},
                                                  {2, 6, 2},
                                                  {3, 7, 2}}};

// Corners of each cell face, counter-clockwise seen from outside the cell.
inline constexpr std::array<std::array<int, 4>, 6> kFaces{{{0, 4, 6, 2},
                                                          {1, 3, 7, 5},
                                                          {0, 1, 5, 4},
                                                          {2, 6, 7, 3},
                                                          {0, 2, 3, 1},
                                                          {4, 5, 7, 6}}};

constexpr int edge_between(int a, int b) {
  for (int e = 0; e < 12; ++e) {
    if ((kEdges[e].a == a && kEdges[e].b == b) || (kEdges[e].a == b && kEdges[e].b == a)) return e;
  }
  return -1;
}

/// Closed loops of crossed edges for one inside/outside corner pattern
/// (bit c set = corner c below the iso value), ordered so that the loop
/// normal points from the inside region to the outside region.
using Loops = std::vector<std::vector<int>>;

/// Builds the 256-entry loop table. On every face, each run of inside corners
/// is cut off by a segment running from the crossing where the run is entered
/// to the crossing where it is left (walking counter-clockwise from outside).
/// An ambiguous face therefore separates its two inside corners. The rule only
/// looks at the face, so neighboring cells agree and the surface is closed and
/// consistently oriented.
inline std::array<Loops, 256> build_table() {
  std::array<Loops, 256> table;
  for (int config = 0; config < 256; ++config) {
    auto inside = [&](int c) { return ((config >> c) & 1) != 0; };
    std::array<int, 12> next;
    next.fill(-1);
    for (const auto& f : kFaces) {
      int entry = -1;
      // Start the walk on an outside corner so every inside run is complete.
      int s0 = 0;
      while (s0 < 4 && inside(f[s0])) ++s0;
      if (s0 == 4) continue;
      for (int step = 0; step < 4; ++step) {
        const int i = (s0 + step) % 4, j = (i + 1) % 4;
        const int e = edge_between(f[i], f[j]);
        if (!inside(f[i]) && inside(f[j])) entry = e;
        if (inside(f[i]) && !inside(f[j])) next[entry] = e;
      }
    }
    std::array<bool, 12> used{};
    for (int start = 0; start < 12; ++start) {
      if (used[start] || next[start] < 0) continue;
      std::vector<int> loop;
      for (int cur = start; !used[cur]; cur = next[cur]) {
        used[cur] = true;
        loop.push_back(cur);
      }
      table[config].push_back(std::move(loop));
    }
  }
  return table;
}

inline const std::array<Loops, 256>& table() {
  static const std::array<Loops, 256> t = build_table();
  return t;
}

}  // namespace mc

/// Isosurface of `grid` at `iso` with linear interpolation along lattice
/// edges. Nodes with value < iso are inside. Triangles face toward increasing
/// values; vertices on shared lattice edges are shared between cells.
inline TriangleMesh marching_cubes(const ScalarGrid& grid, double iso) {
  grid.validate();
  const auto [nx, ny, nz] = grid.resolution;
  if (nx < 2 || ny < 2 || nz < 2) throw InvalidArgument("marching cubes needs >= 2 nodes per axis");
  for (double v : grid.values) {
    if (!std::isfinite(v)) throw NonFiniteError("scalar grid contains non-finite values");
  }

  TriangleMesh mesh;
  const std::size_t nodes = nx * ny * nz;
  std::array<std::vector<std::int64_t>, 3> edge_vertex;
  for (auto& v : edge_vertex) v.assign(nodes, -1);

  const auto& tab = mc::table();

  for (std::size_t k = 0; k + 1 < nz; ++k) {
    for (std::size_t j = 0; j + 1 < ny; ++j) {
      for (std::size_t i = 0; i + 1 < nx; ++i) {
        std::array<double, 8> val{};
        int config = 0;
        for (int c = 0; c < 8; ++c) {
          val[c] = grid.at(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
          if (val[c] < iso) config |= 1 << c;
        }
        if (config == 0 || config == 255) continue;

        auto vertex = [&](int e) -> std::size_t {
          const auto& ce = mc::kEdges[e];
          const std::size_t li = i + (ce.a & 1), lj = j + ((ce.a >> 1) & 1), lk = k + ((ce.a >> 2) & 1);
          const std::size_t node = grid.index(li, lj, lk);
          auto& slot = edge_vertex[ce.axis][node];
          if (slot < 0) {
            const double t = (iso - val[ce.a]) / (val[ce.b] - val[ce.a]);
            Vec3 p = grid.position(li, lj, lk);
            p[ce.axis] += t * grid.cell[ce.axis];
            slot = static_cast<std::int64_t>(mesh.vertices.size());
            mesh.vertices.push_back(p);
          }
          return static_cast<std::size_t>(slot);
        };

        for (const auto& loop : tab[static_cast<std::size_t>(config)]) {
          std::vector<std::size_t> ids;
          ids.reserve(loop.size());
          for (int e : loop) ids.push_back(vertex(e));
          for (std::size_t t = 1; t + 1 < ids.size(); ++t) {
            const std::array<std::size_t, 3> f{ids[0], ids[t], ids[t + 1]};
            const Vec3& p0 = mesh.vertices[f[0]];
            const Vec3 n = (mesh.vertices[f[1]] - p0).cross(mesh.vertices[f[2]] - p0);
            if (n.norm() > 0.0) mesh.faces.push_back(f);
          }
        }
      }
    }
  }
  return mesh;
}

}  // namespace dmp::geometry
