#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sommerville/error.hpp"
#include "sommerville/metrics.hpp"
#include "sommerville/params.hpp"
#include "sommerville/tessellation.hpp"

namespace sommerville {

struct FaceToFaceResult {
  bool pass = true;
  std::size_t interior_facets = 0;
  std::size_t boundary_facets = 0;
  std::size_t max_multiplicity = 0;
  std::vector<VertexId> counterexample;  // offending facet, empty on pass
  std::string reason;
};

struct ColoringResult {
  bool pass = true;          // colors in range and distinct across every edge
  bool residue_law = true;   // color == z_d mod (d+1) for every vertex
  std::optional<std::pair<VertexId, VertexId>> counterexample;
};

struct EquivolumeResult {
  bool pass = true;
  std::size_t bad_determinants = 0;  // cells with |det| != d!
  double worst_relative_deviation = 0.0;
};

struct ValidationReport {
  FaceToFaceResult face_to_face;
  ColoringResult coloring;
  EquivolumeResult equivolume;

  bool pass() const {
    return face_to_face.pass && coloring.pass && coloring.residue_law && equivolume.pass;
  }
};

/// Counts every facet (as a sorted vertex-id tuple). A valid window has each
/// facet once or twice, and a facet seen once must be one whose neighbor the
/// construction indices place outside the window.
inline FaceToFaceResult check_face_to_face(const Mesh& mesh) {
  FaceToFaceResult out;
  const auto d = static_cast<std::size_t>(mesh.dim());
  const std::size_t per_cell = d + 1;
  const std::size_t facet_count = mesh.cell_count() * per_cell;

  std::vector<VertexId> keys(facet_count * d);
  for (std::size_t c = 0; c < mesh.cell_count(); ++c) {
    const auto ids = mesh.cell(c).vertex_ids;
    for (std::size_t m = 0; m < per_cell; ++m) {
      VertexId* key = &keys[(c * per_cell + m) * d];
      std::size_t k = 0;
      for (std::size_t i = 0; i < per_cell; ++i) {
        if (i != m) key[k++] = ids[i];
      }
      std::sort(key, key + d);
    }
  }

  std::vector<std::uint32_t> order(facet_count);
  std::iota(order.begin(), order.end(), std::uint32_t{0});
  auto key_of = [&](std::uint32_t f) { return &keys[static_cast<std::size_t>(f) * d]; };
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    const VertexId* ka = key_of(a);
    const VertexId* kb = key_of(b);
    return std::lexicographical_compare(ka, ka + d, kb, kb + d);
  });

  auto fail = [&](std::uint32_t f, std::string reason) {
    if (!out.pass) return;
    out.pass = false;
    out.counterexample.assign(key_of(f), key_of(f) + d);
    out.reason = std::move(reason);
  };

  std::size_t i = 0;
  while (i < facet_count) {
    std::size_t j = i + 1;
    while (j < facet_count && std::equal(key_of(order[i]), key_of(order[i]) + d, key_of(order[j]))) {
      ++j;
    }
    const std::size_t multiplicity = j - i;
    out.max_multiplicity = std::max(out.max_multiplicity, multiplicity);
    if (multiplicity == 1) {
      ++out.boundary_facets;
      const std::uint32_t f = order[i];
      if (!facet_on_window_boundary(mesh, f / per_cell, static_cast<int>(f % per_cell))) {
        fail(f, "facet has one cell but is not on the window boundary");
      }
    } else if (multiplicity == 2) {
      ++out.interior_facets;
      for (std::size_t k = i; k < j; ++k) {
        const std::uint32_t f = order[k];
        if (facet_on_window_boundary(mesh, f / per_cell, static_cast<int>(f % per_cell))) {
          fail(f, "facet on the window boundary is shared by two cells");
        }
      }
    } else {
      fail(order[i], "facet shared by " + std::to_string(multiplicity) + " cells");
    }
    i = j;
  }
  return out;
}

inline ColoringResult check_coloring(const Mesh& mesh) {
  ColoringResult out;
  const int d = mesh.dim();
  for (VertexId v = 0; v < mesh.vertex_count(); ++v) {
    const int c = mesh.color(v);
    if (c < 0 || c > d) {
      out.pass = false;
      if (!out.counterexample) out.counterexample = std::make_pair(v, v);
    }
    if (c != floor_mod(mesh.coords(v).back(), d + 1)) out.residue_law = false;
  }
  for (std::size_t k = 0; k < mesh.cell_count(); ++k) {
    const auto ids = mesh.cell(k).vertex_ids;
    for (std::size_t a = 0; a < ids.size(); ++a) {
      for (std::size_t b = a + 1; b < ids.size(); ++b) {
        if (mesh.color(ids[a]) == mesh.color(ids[b])) {
          out.pass = false;
          if (!out.counterexample) out.counterexample = std::make_pair(ids[a], ids[b]);
        }
      }
    }
  }
  return out;
}

/// Every cell must have |lattice det| = d! exactly, and its embedded
/// floating volume must match prod(p) to 1e-12 relative.
inline EquivolumeResult check_equivolume(const Mesh& mesh, const ParamVector& p,
                                         double tolerance = 1e-12) {
  if (p.dim() != mesh.dim()) {
    throw Error(ErrorCode::dimension_mismatch, "parameter and mesh dimensions differ");
  }
  EquivolumeResult out;
  const std::int64_t expected_det = factorial(mesh.dim());
  const double expected_volume = p.product();
  for (std::size_t k = 0; k < mesh.cell_count(); ++k) {
    const SimplexCell cell = mesh.cell(k);
    const std::int64_t det = lattice_volume_det(cell, mesh);
    if (det != expected_det && det != -expected_det) ++out.bad_determinants;
    const double deviation =
        std::abs(embedded_volume(cell, mesh, p) - expected_volume) / expected_volume;
    out.worst_relative_deviation = std::max(out.worst_relative_deviation, deviation);
  }
  out.pass = out.bad_determinants == 0 && out.worst_relative_deviation <= tolerance;
  return out;
}

inline ValidationReport validate(const Mesh& mesh, const ParamVector& p) {
  return {check_face_to_face(mesh), check_coloring(mesh), check_equivolume(mesh, p)};
}

/// Distinct componentwise-absolute lattice differences over all cell edges,
/// sorted lexicographically.
inline std::vector<EdgeClass> edge_census(const Mesh& mesh) {
  std::set<std::vector<int>> seen;
  const auto d = static_cast<std::size_t>(mesh.dim());
  std::vector<int> w(d);
  for (std::size_t k = 0; k < mesh.cell_count(); ++k) {
    const auto ids = mesh.cell(k).vertex_ids;
    for (std::size_t a = 0; a < ids.size(); ++a) {
      const auto za = mesh.coords(ids[a]);
      for (std::size_t b = a + 1; b < ids.size(); ++b) {
        const auto zb = mesh.coords(ids[b]);
        for (std::size_t i = 0; i < d; ++i) {
          w[i] = static_cast<int>(za[i] > zb[i] ? za[i] - zb[i] : zb[i] - za[i]);
        }
        seen.insert(w);
      }
    }
  }
  std::vector<EdgeClass> out;
  out.reserve(seen.size());
  for (const auto& v : seen) out.emplace_back(v);
  return out;
}

/// Translation- and color-shift-normalized shapes of all cells, sorted. Two
/// meshes with equal signatures consist of the same cells up to translation
/// and a cyclic relabeling of colors.
inline std::vector<std::vector<Coord>> cell_shape_signatures(const Mesh& mesh) {
  const auto d = static_cast<std::size_t>(mesh.dim());
  std::vector<std::vector<Coord>> out;
  out.reserve(mesh.cell_count());
  for (std::size_t k = 0; k < mesh.cell_count(); ++k) {
    const auto ids = mesh.cell(k).vertex_ids;
    const auto origin = mesh.coords(ids[0]);
    const int base_color = mesh.color(ids[0]);
    std::vector<Coord> sig;
    sig.reserve(ids.size() * (d + 1));
    for (VertexId v : ids) {
      const auto z = mesh.coords(v);
      for (std::size_t i = 0; i < d; ++i) sig.push_back(z[i] - origin[i]);
      sig.push_back(floor_mod(mesh.color(v) - base_color, static_cast<Coord>(d + 1)));
    }
    out.push_back(std::move(sig));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Kuhn reference partition

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (den == 0) throw Error(ErrorCode::arithmetic_overflow, "zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    const std::int64_t g = std::gcd(a.den, b.den);
    const std::int64_t lhs = detail::checked_mul(a.num, b.den / g);
    const std::int64_t rhs = detail::checked_mul(b.num, a.den / g);
    return {lhs + rhs, detail::checked_mul(a.den / g, b.den)};
  }

  friend bool operator==(const Rational&, const Rational&) = default;
};

/// S_pi = {0 <= x_pi(1) <= ... <= x_pi(d) <= 1}. permutation holds 0-based
/// axes; vertices[k] has ones on the last k axes of the ordering.
struct KuhnSimplex {
  std::vector<int> permutation;
  std::vector<std::vector<Coord>> vertices;

  int dim() const noexcept { return static_cast<int>(permutation.size()); }

  /// Strict-inequality membership: x lies in the open simplex.
  bool contains_strict(std::span<const double> x) const {
    double prev = 0.0;
    for (int axis : permutation) {
      const double v = x[static_cast<std::size_t>(axis)];
      if (!(v > prev)) return false;
      prev = v;
    }
    return prev < 1.0;
  }

  std::int64_t lattice_det() const {
    const auto n = permutation.size();
    std::vector<std::int64_t> m(n * n);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) m[r * n + c] = vertices[r + 1][c] - vertices[0][c];
    }
    return bareiss_determinant(std::move(m), n);
  }

  Rational volume() const {
    const std::int64_t det = lattice_det();
    return {det < 0 ? -det : det, factorial(dim())};
  }

  double diameter() const {
    double best = 0.0;
    for (std::size_t a = 0; a < vertices.size(); ++a) {
      for (std::size_t b = a + 1; b < vertices.size(); ++b) {
        double sq = 0.0;
        for (std::size_t i = 0; i < vertices[a].size(); ++i) {
          const auto delta = static_cast<double>(vertices[a][i] - vertices[b][i]);
          sq += delta * delta;
        }
        best = std::max(best, sq);
      }
    }
    return std::sqrt(best);
  }

  double theta() const {
    const Rational vol = volume();
    return static_cast<double>(vol.num) / static_cast<double>(vol.den) /
           std::pow(diameter(), dim());
  }
};

inline std::vector<KuhnSimplex> kuhn_partition(int d, int max_dim = 9) {
  if (d < 1) throw Error(ErrorCode::invalid_dimension, "d must be >= 1");
  if (d > max_dim) {
    throw Error(ErrorCode::budget_exceeded,
                std::to_string(d) + "! simplices exceed the cell budget (d <= " +
                    std::to_string(max_dim) + ")");
  }
  std::vector<int> perm(static_cast<std::size_t>(d));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<KuhnSimplex> out;
  out.reserve(static_cast<std::size_t>(factorial(d)));
  do {
    KuhnSimplex s{perm, {}};
    std::vector<Coord> v(static_cast<std::size_t>(d), 0);
    s.vertices.push_back(v);
    for (int k = d - 1; k >= 0; --k) {
      v[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])] = 1;
      s.vertices.push_back(v);
    }
    out.push_back(std::move(s));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

// ---------------------------------------------------------------------------
// Regularity comparison

struct RegularityReport {
  double worst_theta = 0.0;
  std::vector<Coord> worst_cell_index;
  double max_diameter = 0.0;
  double volume = 0.0;
  double kuhn_theta = 0.0;
  double ratio_vs_kuhn = 0.0;
};

inline RegularityReport compare_regularity(const Mesh& mesh, const ParamVector& p) {
  if (mesh.dim() < 2) throw Error(ErrorCode::invalid_dimension, "regularity needs d >= 2");
  if (mesh.cell_count() == 0) throw Error(ErrorCode::invalid_window, "mesh has no cells");
  RegularityReport out;
  out.worst_theta = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < mesh.cell_count(); ++k) {
    const SimplexCell cell = mesh.cell(k);
    const double t = theta(cell, mesh, p);
    out.max_diameter = std::max(out.max_diameter, cell_diameter(cell, mesh, p));
    if (t < out.worst_theta) {
      out.worst_theta = t;
      out.worst_cell_index.assign(cell.index.begin(), cell.index.end());
    }
  }
  out.volume = p.product();
  out.kuhn_theta = kuhn_theta(mesh.dim());
  out.ratio_vs_kuhn = out.worst_theta / out.kuhn_theta;
  return out;
}

}  // namespace sommerville
