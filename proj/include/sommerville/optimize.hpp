#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sommerville/error.hpp"
#include "sommerville/metrics.hpp"
#include "sommerville/params.hpp"

namespace sommerville {

struct OptimizeResult {
  ParamVector p_hat{std::vector<double>{1.0}};  // p_1 fixed to 1
  double F_value = 0.0;
  std::size_t iterations = 0;
  int starts = 0;
  bool converged = false;
};

struct MaximizeOptions {
  int starts = 8;
  double tol = 1e-10;
  std::size_t max_iterations = 200000;  // per start
  std::uint64_t seed = 0x50AA3EF1ull;
};

namespace detail {

inline std::vector<double> with_unit_head(std::span<const double> tail) {
  std::vector<double> p;
  p.reserve(tail.size() + 1);
  p.push_back(1.0);
  p.insert(p.end(), tail.begin(), tail.end());
  return p;
}

// Uniform in [0, 1) from the top 53 bits, so start points are identical
// across standard libraries.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct LocalSearch {
  std::vector<double> x;
  double f = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// Projected pattern search over the free coordinates (p_2..p_d). Polls the
// coordinate directions first, then the pairwise diagonals e_i +- e_j and the
// common scaling direction; the step halves when no poll improves.
inline LocalSearch pattern_search(std::vector<double> x, double tol, std::size_t budget) {
  const std::size_t n = x.size();
  std::vector<std::vector<double>> directions;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> e(n, 0.0);
    e[i] = 1.0;
    directions.push_back(e);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (double s : {1.0, -1.0}) {
        std::vector<double> e(n, 0.0);
        e[i] = 1.0;
        e[j] = s;
        directions.push_back(e);
      }
    }
  }
  if (n > 2) directions.emplace_back(n, 1.0);

  auto evaluate = [](std::span<const double> tail) { return objective_F(with_unit_head(tail)); };

  LocalSearch out;
  for (double& v : x) v = std::max(v, tol);
  out.x = std::move(x);
  out.f = evaluate(out.x);
  double step = 0.5;
  std::vector<double> trial(n);
  while (out.iterations < budget) {
    bool improved = false;
    for (const auto& dir : directions) {
      for (double sign : {1.0, -1.0}) {
        for (std::size_t i = 0; i < n; ++i) {
          trial[i] = std::max(out.x[i] + sign * step * dir[i], tol);
        }
        ++out.iterations;
        const double f = evaluate(trial);
        if (f > out.f) {
          out.f = f;
          out.x = trial;
          improved = true;
          break;
        }
      }
      if (improved) break;
    }
    if (!improved) {
      step *= 0.5;
      if (step < tol) {
        out.converged = true;
        break;
      }
    }
  }
  return out;
}

}  // namespace detail

/// Multistart derivative-free maximization of the worst-cell objective with
/// p_1 = 1. Start points are scattered deterministically in [0.1, 2]^(d-1).
inline OptimizeResult maximize_F(int d, const MaximizeOptions& options = {}) {
  if (d < 2) throw Error(ErrorCode::invalid_dimension, "maximize_F needs d >= 2");
  if (options.starts < 1) throw Error(ErrorCode::invalid_parameter, "starts must be >= 1");
  if (!(options.tol > 0.0)) throw Error(ErrorCode::invalid_parameter, "tol must be > 0");

  std::mt19937_64 rng(options.seed + static_cast<std::uint64_t>(d));
  OptimizeResult best;
  best.F_value = -1.0;
  best.starts = options.starts;
  bool all_converged = true;
  for (int s = 0; s < options.starts; ++s) {
    std::vector<double> start(static_cast<std::size_t>(d - 1));
    for (double& v : start) v = 0.1 + 1.9 * detail::unit_uniform(rng);
    detail::LocalSearch run = detail::pattern_search(std::move(start), options.tol,
                                                     options.max_iterations);
    best.iterations += run.iterations;
    all_converged = all_converged && run.converged;
    if (run.f > best.F_value) {
      best.F_value = run.f;
      best.p_hat = ParamVector(detail::with_unit_head(run.x));
    }
  }
  best.converged = all_converged;
  return best;
}

inline OptimizeResult maximize_F(int d, int starts, double tol) {
  MaximizeOptions options;
  options.starts = starts;
  options.tol = tol;
  return maximize_F(d, options);
}

/// Exhaustive grid over [0.05, 2]^(d-1) (p_1 = 1), then one finer grid over
/// the cell around the best node. Cross-check oracle for maximize_F.
inline ParamVector grid_oracle(int d, int resolution) {
  if (d != 2 && d != 3) throw Error(ErrorCode::invalid_dimension, "grid oracle supports d in {2,3}");
  if (resolution < 100) throw Error(ErrorCode::invalid_parameter, "resolution must be >= 100");

  auto search = [&](double lo2, double hi2, double lo3, double hi3) {
    std::vector<double> best_x;
    double best_f = -1.0;
    const double h2 = (hi2 - lo2) / (resolution - 1);
    const double h3 = (hi3 - lo3) / (resolution - 1);
    const int n3 = d == 3 ? resolution : 1;
    for (int a = 0; a < resolution; ++a) {
      for (int b = 0; b < n3; ++b) {
        std::vector<double> p{1.0, lo2 + a * h2};
        if (d == 3) p.push_back(lo3 + b * h3);
        const double f = objective_F(p);
        if (f > best_f) {
          best_f = f;
          best_x = p;
        }
      }
    }
    return best_x;
  };

  constexpr double lo = 0.05;
  constexpr double hi = 2.0;
  const double h = (hi - lo) / (resolution - 1);
  std::vector<double> coarse = search(lo, hi, lo, hi);
  const double c3 = d == 3 ? coarse[2] : 1.0;
  std::vector<double> fine = search(std::max(coarse[1] - h, 1e-6), coarse[1] + h,
                                    std::max(c3 - h, 1e-6), c3 + h);
  return ParamVector(std::move(fine));
}

// ---------------------------------------------------------------------------
// First-order conditions with D_1 as the diameter

struct KKTReport {
  std::vector<int> active_set;             // j in 2..d with D_j^2 == D_1^2 (relative 1e-9)
  std::vector<double> multipliers;         // mu_2..mu_d, zero when inactive
  std::vector<double> gradient;            // dF_1/dp_j, j = 2..d, closed form
  std::vector<double> fd_gradient;         // central differences, step 1e-6
  double gradient_fd_deviation = 0.0;      // max |closed - fd| / max(|gradient|_inf, 1e-300)
  double stationarity_residual = 0.0;      // max-norm defect of grad F_1 = sum mu_i grad g_i
  double feasibility_violation = 0.0;      // max_j (D_j^2 - D_1^2)^+ relative to D_1^2
  bool multipliers_nonnegative = true;     // every reported mu_j >= -1e-9
  bool stationary = false;                 // residual < 1e-7

  bool satisfied() const {
    return stationary && multipliers_nonnegative && feasibility_violation <= 1e-9;
  }
};

/// F_1(p) = prod_{i>=2} p_i / D_1(p)^d with p_1 = 1.
inline double objective_F1(std::span<const double> p) {
  const int d = static_cast<int>(p.size());
  const EdgeClass w1 = enumerate_W(d).front();
  double prod = 1.0;
  for (std::size_t i = 1; i < p.size(); ++i) prod *= p[i];
  return prod / std::pow(diameter_candidate(p, w1), d);
}

/// Point where the gradient of F_1 vanishes with no active constraint:
/// p_j = D_1 / ((j-1) sqrt(d)), which under p_1 = 1 forces D_1^2 = d and so
/// p_j = 1 / (j-1). Infeasible, since D_2^2 = (d+2)/d D_1^2 there.
inline ParamVector unconstrained_stationary_point(int d) {
  if (d < 2) throw Error(ErrorCode::invalid_dimension, "d must be >= 2");
  std::vector<double> p(static_cast<std::size_t>(d));
  p[0] = 1.0;
  for (int j = 2; j <= d; ++j) p[static_cast<std::size_t>(j - 1)] = 1.0 / (j - 1);
  return ParamVector(std::move(p));
}

inline KKTReport kkt_check(const ParamVector& p) {
  const int d = p.dim();
  if (d < 2) throw Error(ErrorCode::invalid_dimension, "kkt_check needs d >= 2");
  if (p[0] != 1.0) throw Error(ErrorCode::invalid_parameter, "kkt_check expects p_1 = 1");

  const auto W = enumerate_W(d);
  std::vector<double> dsq(static_cast<std::size_t>(d));
  for (int k = 1; k <= d; ++k) {
    const double v = diameter_candidate(p, W[static_cast<std::size_t>(k - 1)]);
    dsq[static_cast<std::size_t>(k - 1)] = v * v;
  }
  const double d1sq = dsq[0];
  const double d1 = std::sqrt(d1sq);

  KKTReport out;
  for (int j = 2; j <= d; ++j) {
    const double gap = dsq[static_cast<std::size_t>(j - 1)] - d1sq;
    if (std::abs(gap) <= 1e-9 * d1sq) out.active_set.push_back(j);
    out.feasibility_violation = std::max(out.feasibility_violation, gap / d1sq);
  }

  // Closed-form gradient of F_1:
  // prod / D_1^{2d} * (D_1^d / p_j - d (j-1)^2 D_1^{d-2} p_j).
  double prod = 1.0;
  for (int i = 2; i <= d; ++i) prod *= p[static_cast<std::size_t>(i - 1)];
  const auto n = static_cast<std::size_t>(d - 1);
  out.gradient.resize(n);
  for (int j = 2; j <= d; ++j) {
    const double pj = p[static_cast<std::size_t>(j - 1)];
    const double jm1 = j - 1;
    out.gradient[static_cast<std::size_t>(j - 2)] =
        prod / std::pow(d1, 2 * d) *
        (std::pow(d1, d) / pj - d * jm1 * jm1 * std::pow(d1, d - 2) * pj);
  }

  constexpr double h = 1e-6;
  out.fd_gradient.resize(n);
  std::vector<double> probe(p.values().begin(), p.values().end());
  double grad_scale = 1e-300;
  for (std::size_t k = 0; k < n; ++k) {
    const double saved = probe[k + 1];
    probe[k + 1] = saved + h;
    const double up = objective_F1(probe);
    probe[k + 1] = saved - h;
    const double down = objective_F1(probe);
    probe[k + 1] = saved;
    out.fd_gradient[k] = (up - down) / (2.0 * h);
    grad_scale = std::max(grad_scale, std::abs(out.gradient[k]));
  }
  for (std::size_t k = 0; k < n; ++k) {
    out.gradient_fd_deviation = std::max(
        out.gradient_fd_deviation, std::abs(out.gradient[k] - out.fd_gradient[k]) / grad_scale);
  }

  // Constraint gradients d/dp_j (D_i^2 - D_1^2) = 2 (w_{i,j}^2 - w_{1,j}^2) p_j.
  const std::size_t m = out.active_set.size();
  Eigen::MatrixXd A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  Eigen::VectorXd g(static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t axis = r + 1;
    g(static_cast<Eigen::Index>(r)) = out.gradient[r];
    for (std::size_t c = 0; c < m; ++c) {
      const EdgeClass& wi = W[static_cast<std::size_t>(out.active_set[c] - 1)];
      const double wij = wi.w[axis];
      const double w1j = W[0].w[axis];
      A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          2.0 * (wij * wij - w1j * w1j) * p[axis];
    }
  }
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  if (m > 0) mu = A.colPivHouseholderQr().solve(g);
  const Eigen::VectorXd defect = g - A * mu;
  out.stationarity_residual = n > 0 ? defect.cwiseAbs().maxCoeff() : 0.0;

  out.multipliers.assign(n, 0.0);
  for (std::size_t c = 0; c < m; ++c) {
    const double value = mu(static_cast<Eigen::Index>(c));
    out.multipliers[static_cast<std::size_t>(out.active_set[c] - 2)] = value;
    if (value < -1e-9) out.multipliers_nonnegative = false;
  }
  out.stationary = out.stationarity_residual < 1e-7;
  return out;
}

/// p' with p'_1 = p_1 and p'_j = p_j / (1 + delta) for j >= 2. When the
/// diameter is some D_k with k >= 2 and D_1 < D_k, this raises F by (1+delta).
inline ParamVector shrink_tail(const ParamVector& p, double delta) {
  std::vector<double> out(p.values().begin(), p.values().end());
  for (std::size_t j = 1; j < out.size(); ++j) out[j] /= (1.0 + delta);
  return ParamVector(std::move(out));
}

/// Candidate maximizer when D_k (k >= 2) is the active diameter, scaled so
/// that D_k = diameter. Entry 0 (p_1) is left at 1 and is not constrained.
inline std::vector<double> active_k_candidate(int d, int k, double diameter) {
  if (k < 2 || k > d) throw Error(ErrorCode::invalid_parameter, "k must be in 2..d");
  std::vector<double> p(static_cast<std::size_t>(d), 1.0);
  const double dk = static_cast<double>(d) * k;
  for (int j = 2; j <= d; ++j) {
    double value;
    if (j < k) {
      value = std::sqrt(2.0) * diameter / ((j - 1) * std::sqrt(dk)) *
              std::sqrt((2.0 * k - 1.0) / (k - 1.0));
    } else if (j == k) {
      value = diameter / std::sqrt(dk);
    } else {
      value = diameter / ((j - 1) * std::sqrt(static_cast<double>(d)));
    }
    p[static_cast<std::size_t>(j - 1)] = value;
  }
  return p;
}

namespace detail {

inline std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

struct OptimumCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct OptimumVerification {
  int d = 0;
  std::vector<OptimumCheck> checks;
  OptimizeResult search;

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const OptimumCheck& c) { return c.pass; });
  }
};

/// Re-derives the optimum numerically: diameter value, which constraint is
/// active, agreement of the numerical maximizer, the active-k formula at k = 2,
/// and the infeasibility of every k >= 3 alternative.
inline OptimumVerification verify_optimum(int d, const MaximizeOptions& options = {}) {
  if (d < 2) throw Error(ErrorCode::invalid_dimension, "verify_optimum needs d >= 2");
  OptimumVerification out;
  out.d = d;
  const ParamVector star = optimal_params(d);
  const auto W = enumerate_W(d);
  auto check = [&](std::string name, bool pass, std::string detail) {
    out.checks.push_back({std::move(name), pass, std::move(detail)});
  };

  const MaxDiameter dmax = max_diameter_candidate(star);
  const double dsq = dmax.value * dmax.value;
  check("diameter_squared", std::abs(dsq - 2.0 * d / 3.0) <= 1e-12,
        "D^2 = " + detail::short_number(dsq) + ", expected 2d/3 = " + detail::short_number(2.0 * d / 3.0));

  const double d1 = diameter_candidate(star, W[0]);
  const double d2 = diameter_candidate(star, W[1]);
  bool inactive_strict = true;
  for (int j = 3; j <= d; ++j) {
    inactive_strict = inactive_strict && diameter_candidate(star, W[static_cast<std::size_t>(j - 1)]) < d1;
  }
  check("active_constraint",
        std::abs(d1 * d1 - d2 * d2) <= 1e-9 * d1 * d1 && inactive_strict,
        "D_1 = D_2 active, D_j < D_1 for j >= 3");
  if (d == 2) {
    const double p2 = star[1];
    check("explicit_d2_equality", std::abs(1.0 + p2 * p2 - 4.0 * p2 * p2) <= 1e-12,
          "1 + p_2^2 = 4 p_2^2");
  }

  out.search = maximize_F(d, options);
  double worst = 0.0;
  for (int i = 0; i < d; ++i) {
    worst = std::max(worst, std::abs(out.search.p_hat[static_cast<std::size_t>(i)] -
                                     star[static_cast<std::size_t>(i)]));
  }
  check("numerical_maximizer", worst <= 1e-4,
        "max |p_hat - p*| = " + detail::short_number(worst));

  const auto k2 = active_k_candidate(d, 2, dmax.value);
  double formula_gap = 0.0;
  for (int j = 2; j <= d; ++j) {
    formula_gap = std::max(formula_gap, std::abs(k2[static_cast<std::size_t>(j - 1)] -
                                                  star[static_cast<std::size_t>(j - 1)]));
  }
  check("active_k2_formula", formula_gap <= 1e-12,
        "max deviation " + detail::short_number(formula_gap));

  // For k >= 3 the reduced inequality (2k^2 + 9k - 5) / (k(k-1)) < 0 would be
  // needed; also confirm directly that D_2 > D_k at every such candidate.
  bool no_other_k = true;
  for (int k = 3; k <= d; ++k) {
    const double reduced = (2.0 * k * k + 9.0 * k - 5.0) / (k * (k - 1.0));
    const auto candidate = active_k_candidate(d, k, 1.0);
    const double dk = diameter_candidate(candidate, W[static_cast<std::size_t>(k - 1)]);
    const double d2k = diameter_candidate(candidate, W[1]);
    if (reduced < 0.0 || std::abs(dk - 1.0) > 1e-12 || !(d2k > dk)) no_other_k = false;
  }
  check("no_active_k_ge_3", no_other_k, "every k in 3..d violates D_2 <= D_k");
  return out;
}

}  // namespace sommerville
