#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <tuple>
#include <vector>

#include "panelfield/geometry.hpp"
#include "support/reference.hpp"

namespace pf = panelfield;
using pf::Vec3;

namespace {

Vec3 to_vec(const pf::EvalPoint& p) { return {p.X, p.Y, p.Z}; }

pf::Frame random_frame(pf::testing::Rng& rng) {
  const Eigen::Quaterniond q(rng.uniform(-1, 1), rng.uniform(-1, 1),
                             rng.uniform(-1, 1), rng.uniform(-1, 1));
  const Eigen::Matrix3d r = q.normalized().toRotationMatrix();
  return pf::Frame::from_axes(
      {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)}, r.col(0),
      r.col(1));
}

void expect_round_trip(const pf::Frame& f, pf::testing::Rng& rng) {
  for (int i = 0; i < 1000; ++i) {
    const Vec3 g(rng.uniform(-10, 10), rng.uniform(-10, 10),
                 rng.uniform(-10, 10));
    const Vec3 back = pf::to_global(f, pf::to_local(f, g));
    EXPECT_LT((back - g).norm(), 1e-13);
  }
}

// Integer key for a point on a lattice of spacing 1e-12.
using Key = std::array<long long, 3>;
Key key(const Vec3& v) {
  return {std::llround(v.x() * 1e12), std::llround(v.y() * 1e12),
          std::llround(v.z() * 1e12)};
}

}  // namespace

TEST(Frame, RoundTripIdentity) {
  pf::testing::Rng rng(1);
  expect_round_trip(pf::Frame::identity(), rng);
}

TEST(Frame, RoundTripQuarterTurn) {
  pf::testing::Rng rng(2);
  const auto f =
      pf::Frame::from_axes({1, 2, 3}, Vec3::UnitY(), -Vec3::UnitX());
  EXPECT_TRUE(f.orthonormal());
  expect_round_trip(f, rng);
  const auto l = pf::to_local(f, {1, 3, 3});
  EXPECT_NEAR(l.X, 1.0, 1e-15);
  EXPECT_NEAR(l.Y, 0.0, 1e-15);
  EXPECT_NEAR(l.Z, 0.0, 1e-15);
}

TEST(Frame, RoundTripRandomRotations) {
  pf::testing::Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto f = random_frame(rng);
    EXPECT_TRUE(f.orthonormal(1e-14));
    expect_round_trip(f, rng);
  }
}

TEST(Frame, RejectsNonOrthonormalAxes) {
  EXPECT_THROW(pf::Frame::from_axes(Vec3::Zero(), Vec3::UnitX(),
                                    Vec3(1, 1, 0).normalized()),
               pf::InvalidGeometry);
  EXPECT_THROW(pf::Frame::from_axes(Vec3::Zero(), 2 * Vec3::UnitX(),
                                    Vec3::UnitY()),
               pf::InvalidGeometry);
}

TEST(Grading, UniformBreaks) {
  const auto b = pf::graded_breaks(4, pf::GradingSpec::uniform());
  const std::vector<double> want{-0.5, -0.25, 0.0, 0.25, 0.5};
  ASSERT_EQ(b.size(), want.size());
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_NEAR(b[i], want[i], 1e-16);
}

TEST(Grading, RatioOfCentreToEdgeCell) {
  for (int n : {3, 8, 9, 24, 64}) {
    for (double r : {2.0, 4.0, 16.0}) {
      const auto b = pf::graded_breaks(n, pf::GradingSpec::geometric(r));
      const double edge = b[1] - b[0];
      const double centre = b[n / 2 + 1] - b[n / 2];
      EXPECT_NEAR(centre / edge, r, 1e-12 * r) << n << ' ' << r;
      EXPECT_EQ(b.front(), -0.5);
      EXPECT_EQ(b.back(), 0.5);
    }
  }
}

TEST(Grading, WidthsIncreaseTowardCentreAndAreSymmetric) {
  for (int n : {2, 5, 8, 33}) {
    const auto b = pf::graded_breaks(n, pf::GradingSpec::geometric(4));
    for (int i = 0; i <= n; ++i) EXPECT_EQ(b[i], -b[n - i]);
    for (int i = 0; i + 1 < (n + 1) / 2; ++i) {
      EXPECT_LT(b[i + 1] - b[i], b[i + 2] - b[i + 1] + 1e-15) << n << ' ' << i;
    }
  }
}

TEST(Grading, InvalidRatios) {
  EXPECT_THROW(pf::GradingSpec::geometric(0.5), pf::InvalidGrading);
  EXPECT_THROW(pf::GradingSpec::geometric(NAN), pf::InvalidGrading);
  EXPECT_THROW(pf::GradingSpec::geometric(INFINITY), pf::InvalidGrading);
  EXPECT_EQ(pf::GradingSpec::geometric(1.0).mode, pf::GradingMode::Uniform);
  pf::GradingSpec inconsistent{pf::GradingMode::Uniform, 3.0};
  EXPECT_THROW(pf::graded_breaks(4, inconsistent), pf::InvalidGrading);
  EXPECT_THROW(pf::graded_breaks(0, pf::GradingSpec::uniform()),
               pf::InvalidGeometry);
}

TEST(Plate, SinglePanel) {
  const auto m = pf::mesh_plate(1, 1, pf::GradingSpec::uniform());
  ASSERT_EQ(m.size(), 1u);
  const auto& p = m.panels[0];
  EXPECT_EQ(p.area, 1.0);
  EXPECT_EQ(p.extent.x1, -0.5);
  EXPECT_EQ(p.extent.z2, 0.5);
  EXPECT_EQ(p.collocation(), Vec3::Zero());
  EXPECT_EQ(p.frame.normal(), Vec3::UnitY());
}

TEST(Plate, UniformTenByTen) {
  const auto m = pf::mesh_plate(10, 10, pf::GradingSpec::uniform());
  ASSERT_EQ(m.size(), 100u);
  EXPECT_NEAR(m.total_area(), 1.0, 1e-15);
  for (const auto& p : m.panels) {
    EXPECT_NEAR(p.area, 0.01, 1e-16);
    EXPECT_DOUBLE_EQ(p.collocation().y(), 0.0);
  }
  // Row-major: x index outer.
  EXPECT_NEAR(m.panels[1].collocation().z() - m.panels[0].collocation().z(),
              0.1, 1e-15);
  EXPECT_NEAR(m.panels[10].collocation().x() - m.panels[0].collocation().x(),
              0.1, 1e-15);
}

TEST(Plate, GradedEdgeCellsAreSmaller) {
  const auto m = pf::mesh_plate(8, 8, pf::GradingSpec::geometric(4));
  EXPECT_NEAR(m.total_area(), 1.0, 1e-14);
  const auto& corner = m.panels.front();
  const auto& centre = m.panels[3 * 8 + 3];
  EXPECT_NEAR(centre.extent.width() / corner.extent.width(), 4.0, 1e-12);
  EXPECT_NEAR(centre.area / corner.area, 16.0, 1e-11);
}

TEST(Cube, SinglePanelPerFace) {
  const auto m = pf::mesh_cube(1, pf::GradingSpec::uniform());
  ASSERT_EQ(m.size(), 6u);
  EXPECT_EQ(m.total_area(), 6.0);
  for (std::size_t f = 0; f < 6; ++f) {
    const auto& p = m.panels[f];
    EXPECT_TRUE(p.frame.orthonormal());
    EXPECT_LT((p.collocation() - 0.5 * pf::cube_faces()[f].normal).norm(),
              1e-16);
  }
}

TEST(Cube, FourPerSide) {
  const auto m = pf::mesh_cube(4, pf::GradingSpec::uniform());
  ASSERT_EQ(m.size(), 96u);
  EXPECT_NEAR(m.total_area(), 6.0, 1e-14);
}

TEST(Cube, GradedSmallestCellAtCorner) {
  const int n = 16;
  const auto m = pf::mesh_cube(n, pf::GradingSpec::geometric(4));
  ASSERT_EQ(m.size(), 1536u);
  EXPECT_NEAR(m.total_area(), 6.0, 1e-13);
  const auto smallest = std::min_element(
      m.panels.begin(), m.panels.end(),
      [](const auto& a, const auto& b) { return a.area < b.area; });
  EXPECT_NEAR(smallest->collocation().cwiseAbs().minCoeff(), 0.5, 0.05);
  EXPECT_NEAR(m.panels.front().area, smallest->area, 1e-16);
  for (const auto& p : m.panels) {
    EXPECT_GE(p.area, smallest->area - 1e-16);
  }
}

TEST(Cube, NormalsPointOutward) {
  const auto m = pf::mesh_cube(6, pf::GradingSpec::geometric(3));
  for (const auto& p : m.panels) {
    EXPECT_TRUE(p.frame.orthonormal());
    EXPECT_GT(p.frame.normal().dot(p.collocation()), 0.49);
    // Every corner lies on the face plane, inside the cube.
    for (const Vec3& c : p.corners()) {
      EXPECT_NEAR(c.dot(p.frame.normal()), 0.5, 1e-15);
      EXPECT_LE(c.cwiseAbs().maxCoeff(), 0.5 + 1e-15);
    }
  }
}

TEST(Cube, WatertightEdges) {
  // Every cell edge is shared by exactly two panels: interior edges within a
  // face, boundary edges across the two faces meeting at a cube edge.
  for (int n : {1, 3, 8}) {
    const auto m = pf::mesh_cube(n, pf::GradingSpec::geometric(4));
    std::map<std::pair<Key, Key>, int> edges;
    for (const auto& p : m.panels) {
      const auto c = p.corners();
      for (int e = 0; e < 4; ++e) {
        Key a = key(c[e]), b = key(c[(e + 1) % 4]);
        if (b < a) std::swap(a, b);
        ++edges[{a, b}];
      }
    }
    for (const auto& [edge, count] : edges) EXPECT_EQ(count, 2) << n;
    EXPECT_EQ(edges.size(), static_cast<std::size_t>(12 * n * n));
  }
}

TEST(Mesh, JsonExport) {
  const auto m = pf::mesh_cube(2, pf::GradingSpec::geometric(2));
  const auto j = pf::mesh_to_json(m);
  EXPECT_EQ(j["shape"], "cube");
  EXPECT_EQ(j["grading"]["mode"], "geometric");
  EXPECT_EQ(j["grading"]["ratio"], 2.0);
  ASSERT_EQ(j["panels"].size(), 24u);
  const auto& p0 = j["panels"][0];
  EXPECT_EQ(p0["corners"].size(), 4u);
  EXPECT_EQ(p0["area"].get<double>(), m.panels[0].area);
  const Vec3 c(p0["collocation"][0].get<double>(),
               p0["collocation"][1].get<double>(),
               p0["collocation"][2].get<double>());
  EXPECT_EQ(c, m.panels[0].collocation());
}

TEST(Mesh, LocalCoordinatesOfOwnCollocationPoint) {
  const auto m = pf::mesh_cube(5, pf::GradingSpec::geometric(4));
  for (const auto& p : m.panels) {
    const auto l = pf::to_local(p.frame, p.collocation());
    EXPECT_NEAR(to_vec(l).norm(), 0.0, 1e-15);
  }
}
