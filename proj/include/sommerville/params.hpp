#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sommerville/error.hpp"

namespace sommerville {

/// Shape parameters p = (p_1, ..., p_d). Component i is the metric length of
/// one lattice step along axis i, so every entry is strictly positive.
class ParamVector {
 public:
  explicit ParamVector(std::vector<double> p) : p_(std::move(p)) {
    if (p_.empty()) {
      throw Error(ErrorCode::invalid_dimension, "parameter vector needs d >= 1");
    }
    for (std::size_t i = 0; i < p_.size(); ++i) {
      if (!(p_[i] > 0.0) || !std::isfinite(p_[i])) {
        throw Error(ErrorCode::invalid_parameter,
                    "p_" + std::to_string(i + 1) + " must be finite and > 0");
      }
    }
  }

  int dim() const noexcept { return static_cast<int>(p_.size()); }
  double operator[](std::size_t i) const { return p_[i]; }
  std::span<const double> values() const noexcept { return p_; }

  double product() const {
    double prod = 1.0;
    for (double v : p_) prod *= v;
    return prod;
  }

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<double> p_;
};

/// Recoloring permutations (pi_2, ..., pi_d). The entry for level i is a
/// bijection of {0, ..., i-1}, applied to the colors of the (i-1)-mesh right
/// before it is lifted to level i.
class PermutationVector {
 public:
  PermutationVector() = default;

  explicit PermutationVector(std::vector<std::vector<int>> perms) : perms_(std::move(perms)) {
    for (std::size_t k = 0; k < perms_.size(); ++k) {
      validate(perms_[k], static_cast<int>(k) + 2);
    }
  }

  static PermutationVector identity(int d) {
    if (d < 1) throw Error(ErrorCode::invalid_dimension, "d must be >= 1");
    std::vector<std::vector<int>> perms;
    for (int level = 2; level <= d; ++level) {
      std::vector<int> id(static_cast<std::size_t>(level));
      std::iota(id.begin(), id.end(), 0);
      perms.push_back(std::move(id));
    }
    return PermutationVector(std::move(perms));
  }

  // Checks by sorting the image; throws invalid_permutation on failure.
  static void validate(std::span<const int> perm, int level) {
    if (static_cast<int>(perm.size()) != level) {
      throw Error(ErrorCode::invalid_permutation,
                  "pi_" + std::to_string(level) + " must have " + std::to_string(level) +
                      " entries");
    }
    std::vector<int> image(perm.begin(), perm.end());
    std::sort(image.begin(), image.end());
    for (int i = 0; i < level; ++i) {
      if (image[static_cast<std::size_t>(i)] != i) {
        throw Error(ErrorCode::invalid_permutation,
                    "pi_" + std::to_string(level) + " is not a permutation of {0.." +
                        std::to_string(level - 1) + "}");
      }
    }
  }

  /// Dimension this vector is good for (one entry per level 2..d).
  int dim() const noexcept { return static_cast<int>(perms_.size()) + 1; }

  std::span<const int> level(int i) const { return perms_.at(static_cast<std::size_t>(i - 2)); }

  bool is_identity() const {
    for (const auto& perm : perms_) {
      for (std::size_t i = 0; i < perm.size(); ++i) {
        if (perm[i] != static_cast<int>(i)) return false;
      }
    }
    return true;
  }

  const std::vector<std::vector<int>>& entries() const noexcept { return perms_; }

  void push_back(std::vector<int> perm) {
    validate(perm, dim() + 1);
    perms_.push_back(std::move(perm));
  }

  friend bool operator==(const PermutationVector&, const PermutationVector&) = default;

 private:
  std::vector<std::vector<int>> perms_;
};

/// Shape-optimal parameters, normalized so that p_1 = 1:
/// p_2 = sqrt(1/3), p_j = sqrt(2/3) / (j - 1) for j >= 3.
inline ParamVector optimal_params(int d) {
  if (d < 2) throw Error(ErrorCode::invalid_dimension, "optimal parameters need d >= 2");
  std::vector<double> p(static_cast<std::size_t>(d));
  p[0] = 1.0;
  p[1] = std::sqrt(1.0 / 3.0);
  for (int j = 3; j <= d; ++j) {
    p[static_cast<std::size_t>(j - 1)] = std::sqrt(2.0 / 3.0) / static_cast<double>(j - 1);
  }
  return ParamVector(std::move(p));
}

inline ParamVector scale(const ParamVector& p, double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw Error(ErrorCode::invalid_scale, "kappa must be finite and > 0");
  }
  std::vector<double> out(p.values().begin(), p.values().end());
  for (double& v : out) v *= kappa;
  return ParamVector(std::move(out));
}

/// Denominators of the squared optimal parameters at kappa = 2^(-1/2):
/// 2, 6, 12, 27, 48, ... with a_j = 3 (j - 1)^2 for j >= 3. Each term is
/// recovered from the floating optimum and cross-checked against the integer
/// formula before it is returned.
inline std::vector<std::int64_t> oeis_denominators(int n) {
  if (n < 1) throw Error(ErrorCode::invalid_dimension, "sequence length must be >= 1");
  const ParamVector optimum = optimal_params(std::max(n, 2));
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) {
    const double pj = optimum[static_cast<std::size_t>(j - 1)];
    const double reciprocal = 1.0 / (pj * pj / 2.0);
    const auto rounded = static_cast<std::int64_t>(std::llround(reciprocal));
    const std::int64_t closed = j == 1 ? 2 : j == 2 ? 6 : 3 * std::int64_t{j - 1} * (j - 1);
    const double deviation = std::abs(reciprocal - static_cast<double>(closed));
    if (rounded != closed || deviation > 1e-9 * static_cast<double>(closed)) {
      throw Error(ErrorCode::arithmetic_overflow,
                  "term " + std::to_string(j) + " is not recoverable from the optimum");
    }
    out.push_back(closed);
  }
  return out;
}

}  // namespace sommerville
