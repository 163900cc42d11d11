#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "sommerville/sommerville.hpp"

using namespace sommerville;

namespace {

const PermutationVector& scrambled(int d) {
  static const std::vector<PermutationVector> table{
      PermutationVector({{1, 0}}),
      PermutationVector({{1, 0}, {2, 0, 1}}),
      PermutationVector({{0, 1}, {0, 1, 2}, {1, 0, 2, 3}}),
      PermutationVector({{1, 0}, {1, 2, 0}, {3, 1, 2, 0}, {4, 0, 3, 1, 2}}),
  };
  return table.at(static_cast<std::size_t>(d - 2));
}

Mesh with_duplicate(const Mesh& m, std::size_t c, int copies) {
  Mesh out = m;
  const SimplexCell cell = m.cell(c);
  const std::vector<Coord> index(cell.index.begin(), cell.index.end());
  const std::vector<VertexId> ids(cell.vertex_ids.begin(), cell.vertex_ids.end());
  for (int i = 0; i < copies; ++i) out.add_cell(index, ids);
  return out;
}

}  // namespace

TEST(Validate, DefaultWindowsIdentity) {
  for (int d = 2; d <= 4; ++d) {
    const Mesh m = build(d, PermutationVector::identity(d), default_census_window(d));
    const ValidationReport r = validate(m, optimal_params(d));
    EXPECT_TRUE(r.pass()) << "d=" << d << " " << r.face_to_face.reason;
    EXPECT_EQ(r.face_to_face.max_multiplicity, 2u);
    EXPECT_EQ(r.equivolume.bad_determinants, 0u);
    EXPECT_LT(r.equivolume.worst_relative_deviation, 1e-12);
  }
}

TEST(Validate, DefaultWindowsScrambledPermutations) {
  for (int d = 2; d <= 4; ++d) {
    const Mesh m = build(d, scrambled(d), default_census_window(d));
    std::mt19937_64 rng(static_cast<unsigned>(d));
    const ValidationReport r = validate(m, ParamVector(oracle::random_params(rng, d)));
    EXPECT_TRUE(r.pass()) << "d=" << d << " " << r.face_to_face.reason;
  }
}

TEST(FaceToFace, CountsMatchLatticeOracle) {
  for (int d = 2; d <= 4; ++d) {
    const Mesh m = build(d, scrambled(d), Window{[d] {
                           std::vector<Range> r{{-1, 2}};
                           for (int i = 2; i <= d; ++i) r.push_back({-2, 3 * i});
                           return r;
                         }()});
    std::size_t singles = 0;
    std::size_t doubles = 0;
    for (const auto& [facet, count] : oracle::facet_census(m)) {
      ASSERT_LE(count, 2);
      (count == 1 ? singles : doubles) += 1;
    }
    const FaceToFaceResult r = check_face_to_face(m);
    EXPECT_TRUE(r.pass) << r.reason;
    EXPECT_EQ(r.boundary_facets, singles);
    EXPECT_EQ(r.interior_facets, doubles);
  }
}

TEST(FaceToFace, DuplicatedCellFails) {
  const Mesh m = build(3, PermutationVector::identity(3), default_census_window(3));
  // an interior cell: all of its facets are shared, so a copy triples them
  std::size_t interior = m.cell_count();
  for (std::size_t c = 0; c < m.cell_count() && interior == m.cell_count(); ++c) {
    bool all_shared = true;
    for (int k = 0; k <= 3; ++k) all_shared = all_shared && !facet_on_window_boundary(m, c, k);
    if (all_shared) interior = c;
  }
  ASSERT_LT(interior, m.cell_count());
  const FaceToFaceResult once = check_face_to_face(with_duplicate(m, interior, 1));
  EXPECT_FALSE(once.pass);
  EXPECT_EQ(once.max_multiplicity, 3u);
  EXPECT_EQ(once.counterexample.size(), 3u);
  const FaceToFaceResult twice = check_face_to_face(with_duplicate(m, interior, 2));
  EXPECT_FALSE(twice.pass);
  EXPECT_EQ(twice.max_multiplicity, 4u);
}

TEST(FaceToFace, MissingCellFails) {
  const Mesh full = build(2, PermutationVector::identity(2), default_census_window(2));
  Mesh holed(2, full.window(), full.permutations());
  for (VertexId v = 0; v < full.vertex_count(); ++v) holed.add_vertex(full.coords(v), full.color(v));
  // drop one interior cell: its neighbors' shared facets become unpaired
  for (std::size_t c = 0; c < full.cell_count(); ++c) {
    if (c == 5) continue;
    holed.add_cell(full.cell(c).index, full.cell(c).vertex_ids);
  }
  EXPECT_FALSE(check_face_to_face(holed).pass);
}

TEST(Coloring, ProperAndResidueLaw) {
  for (int d = 2; d <= 4; ++d) {
    const Mesh m = build(d, scrambled(d), default_census_window(d));
    const ColoringResult r = check_coloring(m);
    EXPECT_TRUE(r.pass);
    EXPECT_TRUE(r.residue_law);
    for (VertexId v = 0; v < m.vertex_count(); ++v) {
      EXPECT_EQ(m.color(v), floor_mod(m.coords(v).back(), static_cast<Coord>(d + 1)));
    }
  }
}

TEST(Coloring, RecoloredVertexFails) {
  Mesh m = build(3, PermutationVector::identity(3), default_census_window(3));
  const SimplexCell c = m.cell(0);
  const VertexId a = c.vertex_ids[0];
  const VertexId b = c.vertex_ids[1];
  m.set_color(a, m.color(b));
  const ColoringResult r = check_coloring(m);
  EXPECT_FALSE(r.pass);
  ASSERT_TRUE(r.counterexample.has_value());
  EXPECT_EQ(m.color(r.counterexample->first), m.color(r.counterexample->second));
}

TEST(Equivolume, AllCellsHaveFactorialDeterminant) {
  for (int d = 2; d <= 4; ++d) {
    const Mesh m = build(d, scrambled(d), default_census_window(d));
    std::set<std::int64_t> dets;
    for (std::size_t c = 0; c < m.cell_count(); ++c) {
      if (d <= 3 || c % 11 == 0) dets.insert(std::abs(oracle::cell_det(m, c)));
    }
    EXPECT_EQ(dets, (std::set<std::int64_t>{factorial(d)}));
    EXPECT_TRUE(check_equivolume(m, optimal_params(d)).pass);
  }
}

TEST(Census, SmallDimensions) {
  const auto c2 = edge_census(build(2, PermutationVector::identity(2), default_census_window(2)));
  EXPECT_EQ(c2, (std::vector<EdgeClass>{EdgeClass({0, 2}), EdgeClass({1, 1})}));
  const auto c3 = edge_census(build(3, PermutationVector::identity(3), default_census_window(3)));
  EXPECT_EQ(c3, enumerate_W_hat(3));
}

TEST(Census, FourDimensionalIdentity) {
  const auto c4 = edge_census(build(4, PermutationVector::identity(4), default_census_window(4)));
  EXPECT_EQ(c4.size(), 9u);
  EXPECT_FALSE(std::binary_search(c4.begin(), c4.end(), EdgeClass({1, 1, 2, 3})));
  // each 3D class lifts only to a last component t or 4 - t, plus the pure
  // vertical edge
  std::vector<EdgeClass> by_hand;
  for (const auto& w : {std::vector<int>{0, 0, 0, 4}, {0, 0, 3, 1}, {0, 0, 3, 3}, {0, 2, 1, 1},
                        {0, 2, 1, 3}, {0, 2, 2, 2}, {1, 1, 1, 1}, {1, 1, 1, 3}, {1, 1, 2, 2}}) {
    by_hand.emplace_back(w);
  }
  EXPECT_EQ(c4, by_hand);
}

TEST(Census, DependsOnPermutation) {
  const auto c4 = edge_census(build(4, scrambled(4), default_census_window(4)));
  EXPECT_EQ(c4.size(), 14u);
  EXPECT_TRUE(std::binary_search(c4.begin(), c4.end(), EdgeClass({1, 1, 2, 3})));
}

TEST(Census, SubsetOfCandidates) {
  for (int d = 2; d <= 6; ++d) {
    Window w = default_census_window(d);
    if (d == 6) w = Window{{{0, 2}, {0, 3}, {0, 6}, {0, 10}, {0, 15}, {0, 14}}};
    const auto census = edge_census(build(d, PermutationVector::identity(d), w));
    const auto hat = enumerate_W_hat(d);
    EXPECT_TRUE(std::includes(hat.begin(), hat.end(), census.begin(), census.end())) << d;
    for (const EdgeClass& c : census) {
      EXPECT_EQ(c.w[static_cast<std::size_t>(c.label() - 1)], c.label());
    }
  }
}

TEST(Census, UnionOverPermutationsCoversCandidates) {
  const Window w{{{0, 2}, {0, 6}, {0, 12}, {0, 20}}};
  std::set<EdgeClass> all;
  std::vector<int> p3{0, 1, 2};
  do {
    std::vector<int> p4{0, 1, 2, 3};
    do {
      const PermutationVector pi({{0, 1}, p3, p4});
      for (const EdgeClass& c : edge_census(build(4, pi, w))) all.insert(c);
    } while (std::next_permutation(p4.begin(), p4.end()));
  } while (std::next_permutation(p3.begin(), p3.end()));
  const auto hat = enumerate_W_hat(4);
  EXPECT_EQ(std::vector<EdgeClass>(all.begin(), all.end()), hat);
}

TEST(Kuhn, PartitionOfTheCube) {
  for (int d = 1; d <= 6; ++d) {
    const auto parts = kuhn_partition(d);
    ASSERT_EQ(parts.size(), static_cast<std::size_t>(factorial(d)));
    Rational total;
    for (const KuhnSimplex& s : parts) {
      EXPECT_EQ(std::abs(s.lattice_det()), 1);
      total = total + s.volume();
    }
    EXPECT_EQ(total, Rational(1, 1)) << d;
  }
  try {
    kuhn_partition(10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::budget_exceeded);
  }
}

TEST(Kuhn, ThetaMatchesClosedForm) {
  for (int d = 2; d <= 6; ++d) {
    for (const KuhnSimplex& s : kuhn_partition(d)) {
      EXPECT_NEAR(s.diameter(), std::sqrt(static_cast<double>(d)), 1e-15);
      EXPECT_NEAR(s.theta(), kuhn_theta(d), 1e-15);
    }
  }
}

TEST(Kuhn, RandomPointsLieInExactlyOneSimplex) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int d = 2; d <= 4; ++d) {
    const auto parts = kuhn_partition(d);
    for (int trial = 0; trial < 10000; ++trial) {
      std::vector<double> x(static_cast<std::size_t>(d));
      for (double& v : x) v = u(rng);
      int hits = 0;
      int oracle_hits = 0;
      for (const KuhnSimplex& s : parts) {
        hits += s.contains_strict(x) ? 1 : 0;
        std::vector<std::vector<double>> verts;
        for (const auto& v : s.vertices) verts.emplace_back(v.begin(), v.end());
        oracle_hits += oracle::strictly_inside(verts, x) ? 1 : 0;
      }
      EXPECT_EQ(hits, 1);
      EXPECT_EQ(oracle_hits, 1);
    }
  }
}

TEST(Regularity, EqualityInTwoAndThreeDimensions) {
  for (int d = 2; d <= 3; ++d) {
    const Mesh m = build(d, PermutationVector::identity(d), default_census_window(d));
    const RegularityReport r = compare_regularity(m, optimal_params(d));
    EXPECT_NEAR(r.worst_theta, objective_F(optimal_params(d)), 1e-14);
    EXPECT_NEAR(r.max_diameter * r.max_diameter, 2.0 * d / 3.0, 1e-13);
  }
  const Mesh m2 = build(2, PermutationVector::identity(2), default_census_window(2));
  EXPECT_NEAR(compare_regularity(m2, optimal_params(2)).ratio_vs_kuhn, std::sqrt(3.0), 1e-14);
}

TEST(Regularity, WorstCellRealizesTheBound) {
  // every edge is dominated by some candidate, so no cell is worse than F(p);
  // up to d = 3 the identity mesh realizes every candidate and the largest
  // diameter is attained
  std::mt19937_64 rng(7);
  for (int d = 2; d <= 4; ++d) {
    const Mesh m = build(d, PermutationVector::identity(d), default_census_window(d));
    for (int trial = 0; trial < 5; ++trial) {
      const ParamVector p(oracle::random_params(rng, d));
      const RegularityReport r = compare_regularity(m, p);
      const double dmax = max_diameter_candidate(p).value;
      EXPECT_LE(r.max_diameter, dmax * (1.0 + 1e-12));
      if (d <= 3) {
        EXPECT_NEAR(r.max_diameter, dmax, 1e-12 * dmax);
      }
      EXPECT_GE(r.worst_theta, objective_F(p) * (1.0 - 1e-12));
      EXPECT_NEAR(r.volume, p.product(), 1e-15 * p.product());
    }
  }
}

TEST(Regularity, OptimalMeshBeatsKuhn) {
  for (int d = 2; d <= 4; ++d) {
    const Mesh m = build(d, PermutationVector::identity(d), default_census_window(d));
    const RegularityReport r = compare_regularity(m, optimal_params(d));
    EXPECT_GT(r.ratio_vs_kuhn, 1.0);
    EXPECT_EQ(r.worst_cell_index.size(), static_cast<std::size_t>(d));
  }
}
