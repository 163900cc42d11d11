// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sommerville/sommerville.hpp"

using namespace sommerville;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream note;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) note << "first failure: ";
      else note << "; ";
      note << what;
      pass = false;
    }
  }
};

const PermutationVector& non_identity(int d) {
  static const std::vector<PermutationVector> table{
      PermutationVector({{1, 0}}),
      PermutationVector({{1, 0}, {2, 0, 1}}),
      PermutationVector({{0, 1}, {0, 1, 2}, {1, 0, 2, 3}}),
      PermutationVector({{1, 0}, {1, 2, 0}, {3, 1, 2, 0}, {4, 0, 3, 1, 2}}),
  };
  return table.at(static_cast<std::size_t>(d - 2));
}

// Meshes for criteria 1-3 are built once: identity and one recolored pi on
// the default window, d = 2..5.
struct Built {
  int d;
  bool identity;
  Mesh mesh;
};

std::vector<Built>& meshes() {
  static std::vector<Built> all = [] {
    std::vector<Built> out;
    for (int d = 2; d <= 5; ++d) {
      out.push_back({d, true, build(d, PermutationVector::identity(d), default_census_window(d))});
      out.push_back({d, false, build(d, non_identity(d), default_census_window(d))});
    }
    return out;
  }();
  return all;
}

std::string label(const Built& b) {
  return "d=" + std::to_string(b.d) + (b.identity ? " identity" : " recolored");
}

void equivolume(Outcome& o) {
  std::size_t cells = 0;
  double worst = 0.0;
  for (const Built& b : meshes()) {
    if (!b.identity) continue;
    const ParamVector p = optimal_params(b.d);
    const std::int64_t expected = factorial(b.d);
    for (std::size_t c = 0; c < b.mesh.cell_count(); ++c) {
      const SimplexCell cell = b.mesh.cell(c);
      const std::int64_t det = lattice_volume_det(cell, b.mesh);
      o.require(std::abs(det) == expected, label(b) + " cell " + std::to_string(c) + " det");
      const double rel = std::abs(embedded_volume(cell, b.mesh, p) - p.product()) / p.product();
      worst = std::max(worst, rel);
      ++cells;
    }
  }
  o.require(worst <= 1e-12, "volume deviation");
  o.note << (o.pass ? "" : "; ") << cells << " cells, |det| = d!, worst relative volume deviation "
         << worst;
}

void face_to_face(Outcome& o) {
  for (const Built& b : meshes()) {
    const FaceToFaceResult r = check_face_to_face(b.mesh);
    o.require(r.pass && r.max_multiplicity <= 2, label(b) + ": " + r.reason);
  }
  o.note << (o.pass ? "" : "; ") << meshes().size() << " meshes, multiplicity in {1,2}, "
         << "singletons only on the window boundary";
}

void coloring(Outcome& o) {
  for (const Built& b : meshes()) {
    const ColoringResult r = check_coloring(b.mesh);
    o.require(r.pass, label(b) + " improper coloring");
    o.require(r.residue_law, label(b) + " residue law");
  }
  o.note << (o.pass ? "" : "; ") << "proper (d+1)-coloring and color = z_d mod (d+1) on "
         << meshes().size() << " meshes";
}

void census(Outcome& o) {
  const auto c2 = edge_census(build(2, PermutationVector::identity(2), default_census_window(2)));
  o.require(c2 == std::vector<EdgeClass>{EdgeClass({0, 2}), EdgeClass({1, 1})}, "d=2 census");
  const auto c3 = edge_census(build(3, PermutationVector::identity(3), default_census_window(3)));
  o.require(c3 == enumerate_W_hat(3) && c3.size() == 5, "d=3 census");
  const auto c4 = edge_census(build(4, PermutationVector::identity(4), default_census_window(4)));
  const EdgeClass probe({1, 1, 2, 3});
  const auto hat4 = enumerate_W_hat(4);
  o.require(!std::binary_search(c4.begin(), c4.end(), probe), "(1,1,2,3) realized at d=4");
  o.require(std::binary_search(hat4.begin(), hat4.end(), probe), "(1,1,2,3) not a candidate");
  o.note << (o.pass ? "" : "; ") << "d=2: 2 classes, d=3: " << c3.size()
         << " classes = candidates, d=4 identity: " << c4.size()
         << " classes without (1,1,2,3) (candidates: " << hat4.size() << ")";
}

void optimum(Outcome& o) {
  double worst_search = 0.0;
  for (int d = 2; d <= 5; ++d) {
    const OptimizeResult r = maximize_F(d);
    const ParamVector star = optimal_params(d);
    for (int i = 0; i < d; ++i) {
      const auto k = static_cast<std::size_t>(i);
      worst_search = std::max(worst_search, std::abs(r.p_hat[k] - star[k]));
    }
  }
  o.require(worst_search <= 1e-4, "maximize_F deviation");
  double worst_grid = 0.0;
  for (int d = 2; d <= 3; ++d) {
    const ParamVector g = grid_oracle(d, d == 2 ? 2000 : 400);
    const ParamVector star = optimal_params(d);
    for (int i = 0; i < d; ++i) {
      const auto k = static_cast<std::size_t>(i);
      worst_grid = std::max(worst_grid, std::abs(g[k] - star[k]));
    }
  }
  o.require(worst_grid <= 5e-3, "grid oracle deviation");
  double worst_dsq = 0.0;
  double worst_f = 0.0;
  for (int d = 2; d <= 6; ++d) {
    const ParamVector star = optimal_params(d);
    const double dmax = max_diameter_candidate(star).value;
    worst_dsq = std::max(worst_dsq, std::abs(dmax * dmax - 2.0 * d / 3.0));
    const double closed =
        std::sqrt(3.0) / 2.0 * d / (std::pow(d, d / 2.0) * static_cast<double>(factorial(d)));
    worst_f = std::max(worst_f, std::abs(objective_F(star) - closed) / closed);
  }
  o.require(worst_dsq <= 1e-12, "D(p*)^2 != 2d/3");
  o.require(worst_f <= 1e-12, "F(p*) closed form");
  o.note << (o.pass ? "" : "; ") << "search " << worst_search << ", grid " << worst_grid
         << ", |D^2 - 2d/3| " << worst_dsq << ", F(p*) rel " << worst_f;
}

void kkt(Outcome& o) {
  double worst_residual = 0.0;
  double min_mu = 1e300;
  for (int d = 3; d <= 5; ++d) {
    const ParamVector star = optimal_params(d);
    const KKTReport r = kkt_check(star);
    o.require(r.active_set == std::vector<int>{2}, "active set at d=" + std::to_string(d));
    o.require(r.multipliers.at(0) > 0.0, "mu_2 <= 0 at d=" + std::to_string(d));
    o.require(r.stationarity_residual < 1e-7, "residual at d=" + std::to_string(d));
    const auto W = enumerate_W(d);
    const double d1 = diameter_candidate(star, W[0]);
    for (int j = 3; j <= d; ++j) {
      o.require(diameter_candidate(star, W[static_cast<std::size_t>(j - 1)]) < d1,
                "D_" + std::to_string(j) + " not below D_1 at d=" + std::to_string(d));
    }
    worst_residual = std::max(worst_residual, r.stationarity_residual);
    min_mu = std::min(min_mu, r.multipliers[0]);
  }
  const double p2 = optimal_params(2)[1];
  const double gap = std::abs(1.0 + p2 * p2 - 4.0 * p2 * p2);
  o.require(gap <= 1e-12, "d=2 equality");
  o.note << (o.pass ? "" : "; ") << "active {2}, min mu_2 " << min_mu << ", max residual "
         << worst_residual << ", d=2 |1 + p2^2 - 4 p2^2| " << gap;
}

void kuhn(Outcome& o) {
  for (int d = 1; d <= 6; ++d) {
    const auto parts = kuhn_partition(d);
    o.require(parts.size() == static_cast<std::size_t>(factorial(d)), "Kuhn count");
    Rational total;
    for (const KuhnSimplex& s : parts) {
      total = total + s.volume();
      if (d >= 2) {
        o.require(std::abs(s.theta() - kuhn_theta(d)) <= 1e-12 * kuhn_theta(d), "Kuhn theta");
        const double closed = 1.0 / (std::pow(d, d / 2.0) * static_cast<double>(factorial(d)));
        o.require(std::abs(kuhn_theta(d) - closed) <= 1e-12 * closed, "Kuhn closed form");
      }
    }
    o.require(total == Rational(1, 1), "Kuhn volumes do not sum to 1 at d=" + std::to_string(d));
  }
  std::ostringstream ratios;
  for (int d = 2; d <= 4; ++d) {
    const Mesh m = build(d, PermutationVector::identity(d), default_census_window(d));
    const RegularityReport r = compare_regularity(m, optimal_params(d));
    const double bound = std::sqrt(3.0) / 2.0 * d;
    o.require(r.ratio_vs_kuhn >= bound - 1e-9, "ratio below bound at d=" + std::to_string(d));
    if (d == 2) o.require(std::abs(r.ratio_vs_kuhn - std::sqrt(3.0)) <= 1e-12, "d=2 equality");
    ratios << " d=" << d << ": " << r.ratio_vs_kuhn << " >= " << bound;
  }
  o.note << (o.pass ? "" : "; ") << "exact volume sums 1 for d<=6; ratios" << ratios.str();
}

void sequence(Outcome& o) {
  const std::vector<std::int64_t> expected{2, 6, 12, 27, 48, 75, 108, 147, 192, 243, 300};
  const auto terms = oeis_denominators(11);
  o.require(terms == expected, "terms differ");
  for (std::size_t i = 0; i < terms.size(); ++i) o.note << (i ? ", " : "") << terms[i];
}

void properties(Outcome& o) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> kappa(0.01, 100.0);
  double worst_scale = 0.0;
  double worst_hat = 0.0;
  for (int d = 2; d <= 6; ++d) {
    for (int t = 0; t < 100; ++t) {
      const ParamVector p(oracle::random_params(rng, d));
      const double f = objective_F(p);
      worst_scale = std::max(worst_scale, std::abs(objective_F(scale(p, kappa(rng))) - f) / f);
    }
    for (int t = 0; t < 1000; ++t) {
      const ParamVector p(oracle::random_params(rng, d));
      const double f = objective_F(p);
      worst_hat = std::max(worst_hat, std::abs(objective_F_hat(p) - f) / f);
    }
  }
  o.require(worst_scale <= 1e-12, "0-homogeneity");
  o.require(worst_hat <= 1e-12, "dominating vs candidate classes");

  int improved = 0;
  for (int d = 3; d <= 4; ++d) {
    int here = 0;
    while (here < 20) {
      auto raw = oracle::random_params(rng, d, 0.1, 2.0);
      raw[0] = 1.0;
      const ParamVector p(raw);
      const double d1 = diameter_candidate(p, enumerate_W(d).front());
      if (max_diameter_candidate(p).label < 2 || d1 > 0.9 * max_diameter_candidate(p).value) continue;
      const double delta = 1e-3;
      const double ratio = objective_F(shrink_tail(p, delta)) / objective_F(p);
      o.require(std::abs(ratio - (1.0 + delta)) <= 1e-12, "rescaling ratio");
      ++here;
      ++improved;
    }
  }

  int round_trips = 0;
  for (int t = 0; t < 20; ++t) {
    const int d = 1 + t % 4;
    PermutationVector pi;
    for (int level = 2; level <= d; ++level) {
      std::vector<int> perm(static_cast<std::size_t>(level));
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      pi.push_back(perm);
    }
    Window w;
    for (int i = 0; i < d; ++i) w.ranges.push_back({-t, 3 - t + i});
    const Mesh m = build(d, pi, w);
    const ParamVector p(oracle::random_params(rng, d, 1e-3, 1e3));
    const MeshFile back = parse_mesh(serialize_mesh(m, p));
    o.require(back.mesh == m && back.params == p, "round trip");
    ++round_trips;
  }
  o.note << (o.pass ? "" : "; ") << "homogeneity " << worst_scale << ", W vs W_hat " << worst_hat
         << ", rescaling " << improved << " points, " << round_trips << " exact round trips";
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
      {"equivolume", equivolume},   {"face-to-face", face_to_face}, {"coloring", coloring},
      {"edge census", census},      {"optimal parameters", optimum}, {"KKT", kkt},
      {"Kuhn comparison", kuhn},    {"sequence", sequence},          {"property suites", properties},
  };
  int failed = 0;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    o.note.precision(3);
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.note.str().c_str());
    std::fflush(stdout);
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d/%zu criteria passed in %.1f s\n", static_cast<int>(criteria.size()) - failed,
              criteria.size(), secs);
  return failed == 0 ? 0 : 1;
}
