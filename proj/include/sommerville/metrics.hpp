#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sommerville/error.hpp"
#include "sommerville/params.hpp"
#include "sommerville/tessellation.hpp"

namespace sommerville {

// ---------------------------------------------------------------------------
// Exact determinants

namespace detail {

template <std::integral Int>
Int checked_mul(Int a, Int b) {
  Int out;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw Error(ErrorCode::arithmetic_overflow, "integer determinant overflowed");
  }
  return out;
}

template <std::integral Int>
Int checked_sub(Int a, Int b) {
  Int out;
  if (__builtin_sub_overflow(a, b, &out)) {
    throw Error(ErrorCode::arithmetic_overflow, "integer determinant overflowed");
  }
  return out;
}

}  // namespace detail

/// Fraction-free (Bareiss) elimination on a row-major n x n matrix. Every
/// intermediate is an exact minor, so the divisions are exact; overflow of
/// Int throws instead of wrapping.
template <std::integral Int>
Int bareiss_determinant(std::vector<Int> m, std::size_t n) {
  if (m.size() != n * n) throw Error(ErrorCode::dimension_mismatch, "matrix is not n x n");
  if (n == 0) return 1;
  auto at = [&](std::size_t r, std::size_t c) -> Int& { return m[r * n + c]; };
  Int sign = 1;
  Int prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (at(k, k) == 0) {
      std::size_t pivot = k + 1;
      while (pivot < n && at(pivot, k) == 0) ++pivot;
      if (pivot == n) return 0;
      for (std::size_t c = 0; c < n; ++c) std::swap(at(k, c), at(pivot, c));
      sign = -sign;
    }
    for (std::size_t r = k + 1; r < n; ++r) {
      for (std::size_t c = k + 1; c < n; ++c) {
        const Int lhs = detail::checked_mul(at(r, c), at(k, k));
        const Int rhs = detail::checked_mul(at(r, k), at(k, c));
        at(r, c) = detail::checked_sub(lhs, rhs) / prev;
      }
      at(r, k) = 0;
    }
    prev = at(k, k);
  }
  return sign * at(n - 1, n - 1);
}

inline std::int64_t factorial(int n) {
  std::int64_t f = 1;
  for (int i = 2; i <= n; ++i) f = detail::checked_mul<std::int64_t>(f, i);
  return f;
}

// ---------------------------------------------------------------------------
// Cell metrics

inline std::vector<double> embed(const LatticeVertex& v, const ParamVector& p) {
  if (v.z.size() != p.values().size()) {
    throw Error(ErrorCode::dimension_mismatch, "vertex and parameter dimensions differ");
  }
  std::vector<double> x(v.z.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(v.z[i]) * p[i];
  return x;
}

/// det of the lattice edge vectors (B_{z+i} - B_z), i = 1..d. Nonzero cells
/// of a valid tessellation give +-d!.
inline std::int64_t lattice_volume_det(const SimplexCell& cell, const Mesh& mesh) {
  const auto n = static_cast<std::size_t>(mesh.dim());
  std::vector<std::int64_t> m(n * n);
  const auto origin = mesh.coords(cell.vertex_ids[0]);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = mesh.coords(cell.vertex_ids[r + 1]);
    for (std::size_t c = 0; c < n; ++c) m[r * n + c] = row[c] - origin[c];
  }
  return bareiss_determinant(std::move(m), n);
}

inline double cell_volume(const SimplexCell& cell, const Mesh& mesh, const ParamVector& p) {
  if (p.dim() != mesh.dim()) {
    throw Error(ErrorCode::dimension_mismatch, "parameter and mesh dimensions differ");
  }
  const std::int64_t det = lattice_volume_det(cell, mesh);
  if (det == 0) throw Error(ErrorCode::degenerate_cell, "cell has zero lattice volume");
  return static_cast<double>(det < 0 ? -det : det) / static_cast<double>(factorial(mesh.dim())) *
         p.product();
}

/// Floating-point volume from the embedded vertices (partial-pivot LU);
/// independent of the lattice determinant.
inline double embedded_volume(const SimplexCell& cell, const Mesh& mesh, const ParamVector& p) {
  const auto n = static_cast<std::size_t>(mesh.dim());
  std::vector<double> m(n * n);
  const auto origin = mesh.coords(cell.vertex_ids[0]);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = mesh.coords(cell.vertex_ids[r + 1]);
    for (std::size_t c = 0; c < n; ++c) {
      m[r * n + c] = static_cast<double>(row[c]) * p[c] - static_cast<double>(origin[c]) * p[c];
    }
  }
  double det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    for (std::size_t r = k + 1; r < n; ++r) {
      if (std::abs(m[r * n + k]) > std::abs(m[pivot * n + k])) pivot = r;
    }
    if (m[pivot * n + k] == 0.0) return 0.0;
    if (pivot != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(m[k * n + c], m[pivot * n + c]);
      det = -det;
    }
    det *= m[k * n + k];
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = m[r * n + k] / m[k * n + k];
      for (std::size_t c = k; c < n; ++c) m[r * n + c] -= f * m[k * n + c];
    }
  }
  double fact = 1.0;
  for (std::size_t i = 2; i <= n; ++i) fact *= static_cast<double>(i);
  return std::abs(det) / fact;
}

inline double cell_diameter(const SimplexCell& cell, const Mesh& mesh, const ParamVector& p) {
  double best = 0.0;
  const auto n = cell.vertex_ids.size();
  for (std::size_t a = 0; a < n; ++a) {
    const auto za = mesh.coords(cell.vertex_ids[a]);
    for (std::size_t b = a + 1; b < n; ++b) {
      const auto zb = mesh.coords(cell.vertex_ids[b]);
      double sq = 0.0;
      for (std::size_t i = 0; i < za.size(); ++i) {
        const double delta = static_cast<double>(za[i] - zb[i]) * p[i];
        sq += delta * delta;
      }
      best = std::max(best, sq);
    }
  }
  return std::sqrt(best);
}

/// Regularity ratio meas(K) / diam(K)^d, defined for d >= 2.
inline double theta(const SimplexCell& cell, const Mesh& mesh, const ParamVector& p) {
  if (mesh.dim() < 2) throw Error(ErrorCode::invalid_dimension, "theta needs d >= 2");
  return cell_volume(cell, mesh, p) / std::pow(cell_diameter(cell, mesh, p), mesh.dim());
}

inline double kuhn_theta(int d) {
  if (d < 1) throw Error(ErrorCode::invalid_dimension, "d must be >= 1");
  return 1.0 / (std::pow(static_cast<double>(d), d / 2.0) * static_cast<double>(factorial(d)));
}

// ---------------------------------------------------------------------------
// Edge classes

/// Per-axis absolute lattice difference of an edge.
struct EdgeClass {
  std::vector<int> w;

  EdgeClass() = default;
  explicit EdgeClass(std::vector<int> values) : w(std::move(values)) {
    if (std::all_of(w.begin(), w.end(), [](int v) { return v == 0; })) {
      throw Error(ErrorCode::invalid_parameter, "edge class must have a nonzero component");
    }
    for (int v : w) {
      if (v < 0) throw Error(ErrorCode::invalid_parameter, "edge class entries are nonnegative");
    }
  }

  int dim() const noexcept { return static_cast<int>(w.size()); }

  /// 1-based index of the first nonzero component.
  int label() const {
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] != 0) return static_cast<int>(i) + 1;
    }
    return 0;
  }

  friend auto operator<=>(const EdgeClass&, const EdgeClass&) = default;
};

/// The d dominating classes: w_k = k, zeros before k, w_j = j - 1 after k.
/// Entry k-1 carries label k.
inline std::vector<EdgeClass> enumerate_W(int d) {
  if (d < 2) throw Error(ErrorCode::invalid_dimension, "W_d needs d >= 2");
  std::vector<EdgeClass> out;
  for (int k = 1; k <= d; ++k) {
    std::vector<int> w(static_cast<std::size_t>(d), 0);
    w[static_cast<std::size_t>(k - 1)] = k;
    for (int j = k + 1; j <= d; ++j) w[static_cast<std::size_t>(j - 1)] = j - 1;
    out.emplace_back(std::move(w));
  }
  return out;
}

/// All candidate classes: w_k = k, zeros before k, w_j in {1..j-1} after k.
/// Sorted lexicographically.
inline std::vector<EdgeClass> enumerate_W_hat(int d) {
  if (d < 2) throw Error(ErrorCode::invalid_dimension, "W_hat needs d >= 2");
  std::vector<EdgeClass> out;
  for (int k = 1; k <= d; ++k) {
    std::vector<int> w(static_cast<std::size_t>(d), 0);
    w[static_cast<std::size_t>(k - 1)] = k;
    for (int j = k + 1; j <= d; ++j) w[static_cast<std::size_t>(j - 1)] = 1;
    // Odometer over the free tail positions k+1..d.
    while (true) {
      out.emplace_back(w);
      int j = d;
      while (j > k && w[static_cast<std::size_t>(j - 1)] == j - 1) {
        w[static_cast<std::size_t>(j - 1)] = 1;
        --j;
      }
      if (j == k) break;
      ++w[static_cast<std::size_t>(j - 1)];
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Length of an edge of class w under parameters p: sqrt(sum w_i^2 p_i^2).
inline double diameter_candidate(std::span<const double> p, const EdgeClass& w) {
  if (p.size() != w.w.size()) {
    throw Error(ErrorCode::dimension_mismatch, "edge class and parameter dimensions differ");
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double term = static_cast<double>(w.w[i]) * p[i];
    sq += term * term;
  }
  return std::sqrt(sq);
}

inline double diameter_candidate(const ParamVector& p, const EdgeClass& w) {
  return diameter_candidate(p.values(), w);
}

struct MaxDiameter {
  double value = 0.0;
  int label = 0;  // k of the maximizing w_k; smallest k on ties
};

/// max_k D_k(p) over the dominating classes. Uses the suffix form
/// D_k^2 = k^2 p_k^2 + sum_{j>k} (j-1)^2 p_j^2, scanning k = d down to 1.
inline MaxDiameter max_diameter_candidate(std::span<const double> p) {
  const int d = static_cast<int>(p.size());
  if (d < 2) throw Error(ErrorCode::invalid_dimension, "W_d needs d >= 2");
  double best_sq = -1.0;
  int best_k = 0;
  double tail = 0.0;
  for (int k = d; k >= 1; --k) {
    const double pk = p[static_cast<std::size_t>(k - 1)];
    const double sq = static_cast<double>(k) * k * pk * pk + tail;
    if (sq >= best_sq) {
      best_sq = sq;
      best_k = k;
    }
    tail += static_cast<double>(k - 1) * (k - 1) * pk * pk;
  }
  return {std::sqrt(best_sq), best_k};
}

inline MaxDiameter max_diameter_candidate(const ParamVector& p) {
  return max_diameter_candidate(p.values());
}

/// D(p) = max_k D_k(p), under its usual name.
inline MaxDiameter D_max(const ParamVector& p) { return max_diameter_candidate(p); }

namespace detail {

inline void require_positive(std::span<const double> p) {
  if (p.size() < 2) throw Error(ErrorCode::invalid_dimension, "objective needs d >= 2");
  for (double v : p) {
    if (!(v > 0.0)) throw Error(ErrorCode::invalid_parameter, "parameters must be > 0");
  }
}

inline double product(std::span<const double> p) {
  double prod = 1.0;
  for (double v : p) prod *= v;
  return prod;
}

}  // namespace detail

/// min over classes of prod(p) / |w|_p^d.
inline double objective_over(std::span<const double> p, std::span<const EdgeClass> classes) {
  detail::require_positive(p);
  const double prod = detail::product(p);
  const int d = static_cast<int>(p.size());
  double best = std::numeric_limits<double>::infinity();
  for (const EdgeClass& w : classes) {
    best = std::min(best, prod / std::pow(diameter_candidate(p, w), d));
  }
  return best;
}

/// Worst-cell regularity bound prod(p) / D(p)^d, D the largest candidate
/// over the dominating classes. Invariant under p -> kappa p.
inline double objective_F(std::span<const double> p) {
  detail::require_positive(p);
  return detail::product(p) /
         std::pow(max_diameter_candidate(p).value, static_cast<double>(p.size()));
}

inline double objective_F(const ParamVector& p) { return objective_F(p.values()); }

/// Same objective evaluated over every candidate class instead of the
/// dominating ones.
inline double objective_F_hat(const ParamVector& p) {
  const auto classes = enumerate_W_hat(p.dim());
  return objective_over(p.values(), classes);
}

}  // namespace sommerville
