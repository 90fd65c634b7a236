#pragma once

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dmp/common/fileio.hpp"
#include "dmp/geometry/types.hpp"

namespace dmp::geometry {

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline double parse_double(std::string_view tok, const std::string& where) {
  // from_chars for double is unavailable on older standard libraries.
  std::string s(tok);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw IoError(where + ": cannot parse number '" + s + "'");
  return v;
}

inline long long parse_int(std::string_view tok, const std::string& where) {
  long long v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size()) {
    throw IoError(where + ": cannot parse index '" + std::string(tok) + "'");
  }
  return v;
}

template <class F>
void for_each_line(const std::string& text, F&& f) {
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    f(std::string_view(text).substr(pos, end - pos), line_no);
    pos = end + 1;
  }
}

}  // namespace detail

/// XYZ: `x y z [nx ny nz]` per line; `#` comments and blank lines skipped.
inline PointCloud parse_xyz(const std::string& text, const std::string& name = "xyz") {
  PointCloud cloud;
  std::vector<Vec3> normals;
  std::size_t with_normals = 0;
  detail::for_each_line(text, [&](std::string_view line, std::size_t no) {
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = detail::split_ws(line);
    if (tok.empty()) return;
    const std::string where = name + ":" + std::to_string(no);
    if (tok.size() != 3 && tok.size() != 6) throw IoError(where + ": expected 3 or 6 values");
    Vec3 p;
    for (int c = 0; c < 3; ++c) p[c] = detail::parse_double(tok[static_cast<std::size_t>(c)], where);
    if (!p.allFinite()) throw IoError(where + ": non-finite coordinate");
    cloud.points.push_back(p);
    if (tok.size() == 6) {
      Vec3 n;
      for (int c = 0; c < 3; ++c) n[c] = detail::parse_double(tok[static_cast<std::size_t>(c + 3)], where);
      normals.push_back(n.normalized());
      ++with_normals;
    }
  });
  if (with_normals != 0) {
    if (with_normals != cloud.points.size()) throw IoError(name + ": normals given for only some points");
    cloud.normals = std::move(normals);
  }
  return cloud;
}

inline std::string format_xyz(const PointCloud& cloud) {
  std::string out;
  out.reserve(cloud.size() * 64);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    out += format_double(p.x()) + ' ' + format_double(p.y()) + ' ' + format_double(p.z());
    if (cloud.normals) {
      const Vec3& n = (*cloud.normals)[i];
      out += ' ' + format_double(n.x()) + ' ' + format_double(n.y()) + ' ' + format_double(n.z());
    }
    out += '\n';
  }
  return out;
}

/// OBJ subset: `v`, `f` (polygons fan-triangulated, `i/j/k` forms accepted,
/// negative indices relative) and `l` polylines. Other directives are ignored.
inline TriangleMesh parse_obj(const std::string& text, const std::string& name = "obj") {
  TriangleMesh mesh;
  detail::for_each_line(text, [&](std::string_view line, std::size_t no) {
    const auto tok = detail::split_ws(line);
    if (tok.empty()) return;
    const std::string where = name + ":" + std::to_string(no);
    auto index = [&](std::string_view t) -> std::size_t {
      t = t.substr(0, t.find('/'));
      const long long i = detail::parse_int(t, where);
      const auto n = static_cast<long long>(mesh.vertices.size());
      const long long r = i > 0 ? i - 1 : n + i;
      if (i == 0 || r < 0 || r >= n) throw IoError(where + ": vertex index out of range");
      return static_cast<std::size_t>(r);
    };
    if (tok[0] == "v") {
      if (tok.size() < 4) throw IoError(where + ": vertex needs 3 coordinates");
      Vec3 p;
      for (int c = 0; c < 3; ++c) p[c] = detail::parse_double(tok[static_cast<std::size_t>(c + 1)], where);
      if (!p.allFinite()) throw IoError(where + ": non-finite coordinate");
      mesh.vertices.push_back(p);
    } else if (tok[0] == "f") {
      if (tok.size() < 4) throw IoError(where + ": face needs at least 3 vertices");
      const std::size_t a = index(tok[1]);
      for (std::size_t t = 2; t + 1 < tok.size(); ++t) mesh.faces.push_back({a, index(tok[t]), index(tok[t + 1])});
    } else if (tok[0] == "l") {
      for (std::size_t t = 1; t + 1 < tok.size(); ++t) mesh.edges.push_back({index(tok[t]), index(tok[t + 1])});
    }
  });
  return mesh;
}

inline std::string format_obj(const TriangleMesh& mesh) {
  std::string out;
  out.reserve(mesh.vertices.size() * 60 + mesh.faces.size() * 24);
  for (const auto& v : mesh.vertices) {
    out += "v " + format_double(v.x()) + ' ' + format_double(v.y()) + ' ' + format_double(v.z()) + '\n';
  }
  for (const auto& f : mesh.faces) {
    out += "f " + std::to_string(f[0] + 1) + ' ' + std::to_string(f[1] + 1) + ' ' +
           std::to_string(f[2] + 1) + '\n';
  }
  for (const auto& e : mesh.edges) {
    out += "l " + std::to_string(e[0] + 1) + ' ' + std::to_string(e[1] + 1) + '\n';
  }
  return out;
}

inline PointCloud read_xyz(const std::filesystem::path& path) {
  return parse_xyz(read_file(path), path.string());
}
inline void write_xyz(const std::filesystem::path& path, const PointCloud& cloud) {
  write_file_atomic(path, format_xyz(cloud));
}
inline TriangleMesh read_obj(const std::filesystem::path& path) {
  return parse_obj(read_file(path), path.string());
}
inline void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh) {
  write_file_atomic(path, format_obj(mesh));
}

}  // namespace dmp::geometry
