#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "sommerville/error.hpp"
#include "sommerville/metrics.hpp"
#include "sommerville/params.hpp"
#include "sommerville/tessellation.hpp"

namespace sommerville {

// Text mesh format, version 1. Line oriented; lattice coordinates are
// authoritative and embedded coordinates are written for convenience only.
//
//   sommerville-mesh 1
//   dim <d>
//   params <p_1> ... <p_d>
//   perm <pi_2>;<pi_3>;...          ("-" when d = 1)
//   window <lo_1>:<hi_1>,...
//   vertices <n>
//   v <id> <z_1..z_d> <color> <x_1..x_d>
//   cells <m>
//   c <z_1..z_d> <vertex ids, d+1 of them>
//   end

inline constexpr int kMeshFormatVersion = 1;

struct MeshFile {
  Mesh mesh;
  ParamVector params{std::vector<double>{1.0}};
};

namespace io_detail {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(std::string_view text, std::string_view what) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw Error(ErrorCode::parse_error,
                "bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

inline std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    out.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace io_detail

// ---------------------------------------------------------------------------
// Flag value syntax shared by the mesh header and the CLI

/// "0:2,0:4" -> [0,2) x [0,4)
inline Window parse_window(std::string_view text) {
  Window w;
  for (auto part : io_detail::split(text, ',')) {
    const auto bounds = io_detail::split(part, ':');
    if (bounds.size() != 2) {
      throw Error(ErrorCode::parse_error, "window range '" + std::string(part) + "' is not lo:hi");
    }
    w.ranges.push_back({io_detail::parse_number<Coord>(bounds[0], "window bound"),
                        io_detail::parse_number<Coord>(bounds[1], "window bound")});
  }
  w.validate();
  return w;
}

inline std::string format_window(const Window& w) {
  std::string out;
  for (std::size_t i = 0; i < w.ranges.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(w.ranges[i].lo) + ":" + std::to_string(w.ranges[i].hi);
  }
  return out;
}

/// "0,1;0,1,2" -> (pi_2, pi_3). "-" or "" is the empty vector.
inline PermutationVector parse_permutations(std::string_view text) {
  if (text.empty() || text == "-") return PermutationVector{};
  std::vector<std::vector<int>> perms;
  for (auto level : io_detail::split(text, ';')) {
    std::vector<int> perm;
    for (auto entry : io_detail::split(level, ',')) {
      perm.push_back(io_detail::parse_number<int>(entry, "permutation entry"));
    }
    perms.push_back(std::move(perm));
  }
  return PermutationVector(std::move(perms));
}

inline std::string format_permutations(const PermutationVector& pi) {
  if (pi.entries().empty()) return "-";
  std::string out;
  for (std::size_t k = 0; k < pi.entries().size(); ++k) {
    if (k > 0) out += ';';
    const auto& perm = pi.entries()[k];
    for (std::size_t i = 0; i < perm.size(); ++i) {
      if (i > 0) out += ',';
      out += std::to_string(perm[i]);
    }
  }
  return out;
}

/// "1,0.5" -> (1, 0.5)
inline ParamVector parse_params(std::string_view text) {
  std::vector<double> p;
  for (auto part : io_detail::split(text, ',')) {
    p.push_back(io_detail::parse_number<double>(part, "parameter"));
  }
  return ParamVector(std::move(p));
}

// ---------------------------------------------------------------------------
// Mesh file

inline std::string serialize_mesh(const Mesh& mesh, const ParamVector& p) {
  if (p.dim() != mesh.dim()) {
    throw Error(ErrorCode::dimension_mismatch, "parameter and mesh dimensions differ");
  }
  const int d = mesh.dim();
  std::string out;
  out.reserve(mesh.vertex_count() * 16 * static_cast<std::size_t>(d + 1) +
              mesh.cell_count() * 8 * static_cast<std::size_t>(2 * d + 1));
  out += "sommerville-mesh " + std::to_string(kMeshFormatVersion) + "\n";
  out += "dim " + std::to_string(d) + "\n";
  out += "params";
  for (double v : p.values()) out += " " + io_detail::format_double(v);
  out += "\nperm " + format_permutations(mesh.permutations()) + "\n";
  out += "window " + format_window(mesh.window()) + "\n";
  out += "vertices " + std::to_string(mesh.vertex_count()) + "\n";
  for (VertexId v = 0; v < mesh.vertex_count(); ++v) {
    const auto z = mesh.coords(v);
    out += "v " + std::to_string(v);
    for (Coord c : z) out += " " + std::to_string(c);
    out += " " + std::to_string(mesh.color(v));
    for (int i = 0; i < d; ++i) {
      out += " " + io_detail::format_double(static_cast<double>(z[static_cast<std::size_t>(i)]) *
                                             p[static_cast<std::size_t>(i)]);
    }
    out += '\n';
  }
  out += "cells " + std::to_string(mesh.cell_count()) + "\n";
  for (std::size_t k = 0; k < mesh.cell_count(); ++k) {
    const SimplexCell cell = mesh.cell(k);
    out += "c";
    for (Coord z : cell.index) out += " " + std::to_string(z);
    for (VertexId v : cell.vertex_ids) out += " " + std::to_string(v);
    out += '\n';
  }
  out += "end\n";
  return out;
}

inline MeshFile parse_mesh(std::string_view text) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::vector<std::string_view> {
    if (pos >= text.size()) {
      throw Error(ErrorCode::parse_error, "unexpected end of mesh file after line " +
                                              std::to_string(line_no));
    }
    const std::size_t end = text.find('\n', pos);
    const std::string_view line =
        text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() : end + 1;
    ++line_no;
    return io_detail::tokens(line);
  };
  auto expect = [&](const std::vector<std::string_view>& toks, std::string_view key,
                    std::size_t count) {
    if (toks.empty() || toks[0] != key || (count != 0 && toks.size() != count)) {
      throw Error(ErrorCode::parse_error,
                  "line " + std::to_string(line_no) + ": expected '" + std::string(key) + "'");
    }
  };

  auto toks = next_line();
  expect(toks, "sommerville-mesh", 2);
  if (io_detail::parse_number<int>(toks[1], "format version") != kMeshFormatVersion) {
    throw Error(ErrorCode::parse_error, "unsupported mesh format version");
  }
  toks = next_line();
  expect(toks, "dim", 2);
  const int d = io_detail::parse_number<int>(toks[1], "dimension");
  if (d < 1) throw Error(ErrorCode::parse_error, "dimension must be >= 1");
  const auto du = static_cast<std::size_t>(d);

  toks = next_line();
  expect(toks, "params", du + 1);
  std::vector<double> p;
  for (std::size_t i = 1; i < toks.size(); ++i) {
    p.push_back(io_detail::parse_number<double>(toks[i], "parameter"));
  }
  toks = next_line();
  expect(toks, "perm", 2);
  PermutationVector perms = parse_permutations(toks[1]);
  toks = next_line();
  expect(toks, "window", 2);
  Window window = parse_window(toks[1]);
  if (window.dim() != d || perms.dim() != d) {
    throw Error(ErrorCode::parse_error, "header dimensions disagree");
  }

  MeshFile file{Mesh(d, std::move(window), std::move(perms)), ParamVector(std::move(p))};
  toks = next_line();
  expect(toks, "vertices", 2);
  const auto nv = io_detail::parse_number<std::size_t>(toks[1], "vertex count");
  std::vector<Coord> z(du);
  for (std::size_t v = 0; v < nv; ++v) {
    toks = next_line();
    expect(toks, "v", 2 * du + 3);
    if (io_detail::parse_number<std::size_t>(toks[1], "vertex id") != v) {
      throw Error(ErrorCode::parse_error, "vertex ids must be dense and ascending");
    }
    for (std::size_t i = 0; i < du; ++i) z[i] = io_detail::parse_number<Coord>(toks[2 + i], "coordinate");
    file.mesh.add_vertex(z, io_detail::parse_number<int>(toks[2 + du], "color"));
  }
  toks = next_line();
  expect(toks, "cells", 2);
  const auto nc = io_detail::parse_number<std::size_t>(toks[1], "cell count");
  std::vector<Coord> index(du);
  std::vector<VertexId> ids(du + 1);
  for (std::size_t k = 0; k < nc; ++k) {
    toks = next_line();
    expect(toks, "c", 2 * du + 2);
    for (std::size_t i = 0; i < du; ++i) index[i] = io_detail::parse_number<Coord>(toks[1 + i], "cell index");
    for (std::size_t i = 0; i <= du; ++i) {
      ids[i] = io_detail::parse_number<VertexId>(toks[1 + du + i], "vertex id");
    }
    try {
      file.mesh.add_cell(index, ids);
    } catch (const Error& e) {
      throw Error(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  toks = next_line();
  expect(toks, "end", 1);
  return file;
}

// ---------------------------------------------------------------------------
// VTK legacy ASCII export (triangles and tetrahedra)

inline std::string export_vtk_legacy(const Mesh& mesh, const ParamVector& p) {
  const int d = mesh.dim();
  if (d < 2 || d > 3) {
    throw Error(ErrorCode::unsupported_export,
                "VTK export supports d in {2,3}; use the mesh file format for d = " +
                    std::to_string(d));
  }
  if (p.dim() != d) throw Error(ErrorCode::dimension_mismatch, "parameter dimension differs");

  std::ostringstream out;
  out << "# vtk DataFile Version 3.0\n";
  out << "sommerville tessellation d=" << d << "\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.vertex_count() << " double\n";
  for (VertexId v = 0; v < mesh.vertex_count(); ++v) {
    const auto x = embed(mesh.vertex(v), p);
    out << io_detail::format_double(x[0]) << ' ' << io_detail::format_double(x[1]) << ' '
        << (d == 3 ? io_detail::format_double(x[2]) : std::string("0")) << '\n';
  }
  const std::size_t nc = mesh.cell_count();
  out << "CELLS " << nc << ' ' << nc * static_cast<std::size_t>(d + 2) << '\n';
  for (std::size_t k = 0; k < nc; ++k) {
    out << d + 1;
    for (VertexId v : mesh.cell(k).vertex_ids) out << ' ' << v;
    out << '\n';
  }
  out << "CELL_TYPES " << nc << '\n';
  const int vtk_type = d == 2 ? 5 : 10;  // VTK_TRIANGLE, VTK_TETRA
  for (std::size_t k = 0; k < nc; ++k) out << vtk_type << '\n';
  out << "CELL_DATA " << nc << "\nSCALARS theta double 1\nLOOKUP_TABLE default\n";
  for (std::size_t k = 0; k < nc; ++k) {
    out << io_detail::format_double(theta(mesh.cell(k), mesh, p)) << '\n';
  }
  out << "POINT_DATA " << mesh.vertex_count() << "\nSCALARS color int 1\nLOOKUP_TABLE default\n";
  for (VertexId v = 0; v < mesh.vertex_count(); ++v) out << mesh.color(v) << '\n';
  return out.str();
}

}  // namespace sommerville
