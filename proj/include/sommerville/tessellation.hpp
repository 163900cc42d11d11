#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sommerville/error.hpp"
#include "sommerville/params.hpp"

namespace sommerville {

using VertexId = std::uint32_t;
using Coord = std::int64_t;

/// Nonnegative residue of a modulo m, also for negative a.
constexpr Coord floor_mod(Coord a, Coord m) {
  const Coord r = a % m;
  return r < 0 ? r + m : r;
}

/// Half-open integer interval [lo, hi).
struct Range {
  Coord lo = 0;
  Coord hi = 0;

  Coord length() const noexcept { return hi - lo; }
  bool contains(Coord z) const noexcept { return lo <= z && z < hi; }
  friend bool operator==(const Range&, const Range&) = default;
};

/// Bounds on the construction index at each level (not a spatial box).
/// ranges[i] limits z_{i+1}.
struct Window {
  std::vector<Range> ranges;

  int dim() const noexcept { return static_cast<int>(ranges.size()); }

  std::size_t cell_count() const {
    std::size_t n = 1;
    for (const auto& r : ranges) n *= static_cast<std::size_t>(r.length());
    return n;
  }

  void validate() const {
    if (ranges.empty()) throw Error(ErrorCode::invalid_window, "window has no ranges");
    for (std::size_t i = 0; i < ranges.size(); ++i) {
      if (ranges[i].hi <= ranges[i].lo) {
        throw Error(ErrorCode::invalid_window,
                    "range " + std::to_string(i + 1) + " is empty: [" +
                        std::to_string(ranges[i].lo) + "," + std::to_string(ranges[i].hi) + ")");
      }
    }
  }

  friend bool operator==(const Window&, const Window&) = default;
};

/// [0,2) at level 1 and [0, 2i(i+1)) at level i >= 2: two full color periods
/// per level, enough for every realizable edge class to show up.
inline Window default_census_window(int d) {
  if (d < 1) throw Error(ErrorCode::invalid_dimension, "d must be >= 1");
  Window w;
  w.ranges.push_back({0, 2});
  for (Coord i = 2; i <= d; ++i) w.ranges.push_back({0, 2 * i * (i + 1)});
  return w;
}

struct LatticeVertex {
  VertexId id;
  std::span<const Coord> z;
  int color;
};

/// A d-simplex: d+1 vertex ids ordered by ascending last lattice coordinate,
/// and the construction chain (z_1, ..., z_d) that produced it.
struct SimplexCell {
  std::span<const VertexId> vertex_ids;
  std::span<const Coord> index;
};

/// Purely combinatorial mesh in lattice coordinates. Vertex i has lattice
/// point z (embedded at x_k = z_k * p_k) and a color in {0, ..., d}.
/// Storage is flat; vertex() and cell() hand out views.
class Mesh {
 public:
  Mesh() = default;
  Mesh(int dim, Window window, PermutationVector perms)
      : dim_(dim), window_(std::move(window)), perms_(std::move(perms)) {
    if (dim_ < 1) throw Error(ErrorCode::invalid_dimension, "mesh dimension must be >= 1");
  }

  int dim() const noexcept { return dim_; }
  const Window& window() const noexcept { return window_; }
  const PermutationVector& permutations() const noexcept { return perms_; }

  std::size_t vertex_count() const noexcept { return colors_.size(); }
  std::size_t cell_count() const noexcept {
    return cell_vertices_.size() / static_cast<std::size_t>(dim_ + 1);
  }

  LatticeVertex vertex(VertexId id) const { return {id, coords(id), colors_.at(id)}; }

  std::span<const Coord> coords(VertexId id) const {
    return std::span<const Coord>(coords_).subspan(static_cast<std::size_t>(id) * dim_,
                                                   static_cast<std::size_t>(dim_));
  }

  int color(VertexId id) const { return colors_[id]; }

  SimplexCell cell(std::size_t c) const {
    const auto nv = static_cast<std::size_t>(dim_ + 1);
    const auto ni = static_cast<std::size_t>(dim_);
    return {std::span<const VertexId>(cell_vertices_).subspan(c * nv, nv),
            std::span<const Coord>(cell_index_).subspan(c * ni, ni)};
  }

  VertexId add_vertex(std::span<const Coord> z, int color) {
    if (static_cast<int>(z.size()) != dim_) {
      throw Error(ErrorCode::dimension_mismatch, "vertex has wrong coordinate count");
    }
    if (colors_.size() >= std::numeric_limits<VertexId>::max()) {
      throw Error(ErrorCode::budget_exceeded, "too many vertices");
    }
    coords_.insert(coords_.end(), z.begin(), z.end());
    colors_.push_back(color);
    return static_cast<VertexId>(colors_.size() - 1);
  }

  void add_cell(std::span<const Coord> index, std::span<const VertexId> vertex_ids) {
    if (static_cast<int>(index.size()) != dim_ ||
        static_cast<int>(vertex_ids.size()) != dim_ + 1) {
      throw Error(ErrorCode::dimension_mismatch, "cell has wrong arity");
    }
    for (VertexId v : vertex_ids) {
      if (v >= vertex_count()) throw Error(ErrorCode::invalid_base, "cell references unknown vertex");
    }
    cell_index_.insert(cell_index_.end(), index.begin(), index.end());
    cell_vertices_.insert(cell_vertices_.end(), vertex_ids.begin(), vertex_ids.end());
  }

  void set_color(VertexId id, int color) { colors_.at(id) = color; }

  void reserve(std::size_t vertices, std::size_t cells) {
    coords_.reserve(vertices * static_cast<std::size_t>(dim_));
    colors_.reserve(vertices);
    cell_vertices_.reserve(cells * static_cast<std::size_t>(dim_ + 1));
    cell_index_.reserve(cells * static_cast<std::size_t>(dim_));
  }

  friend bool operator==(const Mesh&, const Mesh&) = default;

 private:
  int dim_ = 0;
  Window window_;
  PermutationVector perms_;
  std::vector<Coord> coords_;
  std::vector<int> colors_;
  std::vector<VertexId> cell_vertices_;
  std::vector<Coord> cell_index_;
};

/// Segments [z, z+1] for z in range; vertex z is colored z mod 2.
inline Mesh build_base_1d(Range range) {
  Window window{{range}};
  window.validate();
  Mesh mesh(1, window, PermutationVector{});
  const auto segments = static_cast<std::size_t>(range.length());
  mesh.reserve(segments + 1, segments);
  for (Coord z = range.lo; z <= range.hi; ++z) {
    const Coord lattice[1] = {z};
    mesh.add_vertex(lattice, static_cast<int>(floor_mod(z, 2)));
  }
  for (Coord z = range.lo; z < range.hi; ++z) {
    const Coord index[1] = {z};
    const auto first = static_cast<VertexId>(z - range.lo);
    const VertexId ids[2] = {first, first + 1};
    mesh.add_cell(index, ids);
  }
  return mesh;
}

/// Lifts a (d-1)-mesh with a proper d-coloring into d-space. Above each base
/// cell the points B_j (height j) sit over the base vertex whose recolored
/// color is j mod d; each run of d+1 consecutive heights {B_z..B_{z+d}},
/// z in z_range, is one d-simplex. New vertices are colored j mod (d+1) and
/// shared between prisms through their lattice coordinate.
inline Mesh lift(const Mesh& base, std::span<const int> pi, Range z_range) {
  const int d = base.dim() + 1;
  PermutationVector::validate(pi, d);
  if (z_range.hi <= z_range.lo) {
    throw Error(ErrorCode::invalid_window, "lift range is empty");
  }

  std::vector<int> recolored(base.vertex_count());
  for (VertexId v = 0; v < base.vertex_count(); ++v) {
    const int c = base.color(v);
    if (c < 0 || c >= d) {
      throw Error(ErrorCode::invalid_base, "base vertex " + std::to_string(v) + " has color " +
                                               std::to_string(c) + " outside {0.." +
                                               std::to_string(d - 1) + "}");
    }
    recolored[v] = pi[static_cast<std::size_t>(c)];
  }

  Window window = base.window();
  window.ranges.push_back(z_range);
  PermutationVector perms = base.permutations();
  perms.push_back(std::vector<int>(pi.begin(), pi.end()));

  Mesh mesh(d, std::move(window), std::move(perms));
  const std::size_t layers = static_cast<std::size_t>(z_range.length());
  mesh.reserve(base.vertex_count() * (layers + static_cast<std::size_t>(d)) / 2 + 16,
               base.cell_count() * layers);

  // Key (base vertex, height) is in bijection with the lifted lattice point,
  // because base vertex ids are unique per base lattice point.
  const auto heights = static_cast<std::uint64_t>(z_range.length() + d);
  std::unordered_map<std::uint64_t, VertexId> lifted;
  lifted.reserve(base.vertex_count() * 4);

  std::vector<VertexId> by_color(static_cast<std::size_t>(d));
  std::vector<Coord> lattice(static_cast<std::size_t>(d));
  std::vector<Coord> index(static_cast<std::size_t>(d));
  std::vector<VertexId> ids(static_cast<std::size_t>(d + 1));

  for (std::size_t k = 0; k < base.cell_count(); ++k) {
    const SimplexCell base_cell = base.cell(k);
    std::fill(by_color.begin(), by_color.end(), std::numeric_limits<VertexId>::max());
    for (VertexId v : base_cell.vertex_ids) {
      auto& slot = by_color[static_cast<std::size_t>(recolored[v])];
      if (slot != std::numeric_limits<VertexId>::max()) {
        throw Error(ErrorCode::invalid_base,
                    "base cell " + std::to_string(k) + " repeats color " +
                        std::to_string(base.color(v)));
      }
      slot = v;
    }
    std::copy(base_cell.index.begin(), base_cell.index.end(), index.begin());

    for (Coord z = z_range.lo; z < z_range.hi; ++z) {
      for (int m = 0; m <= d; ++m) {
        const Coord j = z + m;
        const VertexId below = by_color[static_cast<std::size_t>(floor_mod(j, d))];
        const std::uint64_t key =
            static_cast<std::uint64_t>(below) * heights + static_cast<std::uint64_t>(j - z_range.lo);
        auto [it, inserted] = lifted.try_emplace(key, VertexId{0});
        if (inserted) {
          const auto base_z = base.coords(below);
          std::copy(base_z.begin(), base_z.end(), lattice.begin());
          lattice.back() = j;
          it->second = mesh.add_vertex(lattice, static_cast<int>(floor_mod(j, d + 1)));
        }
        ids[static_cast<std::size_t>(m)] = it->second;
      }
      index.back() = z;
      mesh.add_cell(index, ids);
    }
  }
  return mesh;
}

/// Base segment mesh followed by one lift per level 2..d.
inline Mesh build(int d, const PermutationVector& pi, const Window& window) {
  if (d < 1) throw Error(ErrorCode::invalid_dimension, "d must be >= 1");
  if (window.dim() != d) {
    throw Error(ErrorCode::dimension_mismatch, "window needs " + std::to_string(d) + " ranges");
  }
  if (pi.dim() != d) {
    throw Error(ErrorCode::dimension_mismatch,
                "permutation vector needs entries for levels 2.." + std::to_string(d));
  }
  window.validate();
  Mesh mesh = build_base_1d(window.ranges[0]);
  for (int level = 2; level <= d; ++level) {
    mesh = lift(mesh, pi.level(level), window.ranges[static_cast<std::size_t>(level - 1)]);
  }
  return mesh;
}

/// The facet of `cell` that omits the vertex at height position `omitted`
/// (0 = lowest), sorted by vertex id.
inline std::vector<VertexId> facet_omitting(const SimplexCell& cell, int omitted) {
  std::vector<VertexId> facet;
  facet.reserve(cell.vertex_ids.size() - 1);
  for (std::size_t m = 0; m < cell.vertex_ids.size(); ++m) {
    if (static_cast<int>(m) != omitted) facet.push_back(cell.vertex_ids[m]);
  }
  std::sort(facet.begin(), facet.end());
  return facet;
}

inline std::vector<std::vector<VertexId>> facets(const SimplexCell& cell) {
  std::vector<std::vector<VertexId>> out;
  const int n = static_cast<int>(cell.vertex_ids.size());
  out.reserve(static_cast<std::size_t>(n));
  for (int m = n - 1; m >= 0; --m) out.push_back(facet_omitting(cell, m));
  std::sort(out.begin(), out.end());
  return out;
}

/// True when the neighbor across the facet of cell `c` that omits height
/// position `omitted` lies outside the window, decided from construction
/// indices alone.
///
/// At level L the cell z_L spans heights z_L..z_L+L. Dropping the lowest or
/// highest vertex exposes the prism neighbor z_L + 1 or z_L - 1. Dropping an
/// inner vertex exposes a prism wall, whose neighbor is cell z_L over the base
/// cell across the matching base facet, so the question recurses one level
/// down with the base vertex that carried the dropped height.
inline bool facet_on_window_boundary(const Mesh& mesh, std::size_t c, int omitted) {
  const SimplexCell cell = mesh.cell(c);
  const auto& ranges = mesh.window().ranges;
  int m = omitted;
  for (int level = mesh.dim(); level >= 1; --level) {
    const Coord z = cell.index[static_cast<std::size_t>(level - 1)];
    const Range& range = ranges[static_cast<std::size_t>(level - 1)];
    if (m == 0) return z == range.hi - 1;
    if (m == level) return z == range.lo;
    // Base vertex under height z + m has recolored color (z + m) mod level.
    const auto pi = mesh.permutations().level(level);
    const auto recolored = static_cast<int>(floor_mod(z + m, level));
    const auto base_color = static_cast<Coord>(
        std::find(pi.begin(), pi.end(), recolored) - pi.begin());
    // Base cell vertices at heights z'..z'+level-1 carry colors (z'+i) mod level.
    const Coord base_z = cell.index[static_cast<std::size_t>(level - 2)];
    m = static_cast<int>(floor_mod(base_color - base_z, level));
  }
  return false;
}

}  // namespace sommerville
