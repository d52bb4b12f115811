#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "polymixed/polymesh.hpp"
#include "polymixed/quadrature.hpp"

using namespace polymixed;

namespace {

double total_measure(const PolytopalMesh& m) {
  double s = 0.0;
  for (Index c = 0; c < m.num_cells(); ++c) s += m.cell_measure(c);
  return s;
}

Index boundary_faces(const PolytopalMesh& m) {
  Index n = 0;
  for (const auto& f : m.faces) n += f.boundary;
  return n;
}

bool is_parallelogram(const PolytopalMesh& m, Index c) {
  const auto& v = m.cells[c];
  if (v.size() != 4) return false;
  const Vec3 d = m.vertices[v[0]] + m.vertices[v[2]] - m.vertices[v[1]] - m.vertices[v[3]];
  return d.norm() < 1e-12;
}

// A quadrilateral with one pair of parallel sides.
bool is_trapezoid(const PolytopalMesh& m, Index c) {
  const auto& v = m.cells[c];
  auto edge = [&](int i) { return Vec3(m.vertices[v[(i + 1) % 4]] - m.vertices[v[i]]); };
  auto parallel = [](const Vec3& a, const Vec3& b) { return std::abs(a.cross(b).z()) < 1e-12 * a.norm() * b.norm(); };
  return parallel(edge(0), edge(2)) || parallel(edge(1), edge(3));
}

PolytopalMesh single_cell(std::vector<Vec3> pts) {
  PolytopalMesh m;
  m.dim = 2;
  m.vertices = std::move(pts);
  std::vector<Index> ids(m.vertices.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<Index>(i);
  m.cells = {ids};
  m.build_faces();
  return m;
}

}  // namespace

TEST(QuadGrid, CountsAndArea) {
  for (int level = 1; level <= 5; ++level) {
    const PolytopalMesh m = make_quad_grid(level);
    const Index n = Index{1} << (level - 1);
    EXPECT_EQ(m.num_cells(), n * n);
    EXPECT_EQ(m.num_vertices(), (n + 1) * (n + 1));
    EXPECT_EQ(static_cast<Index>(m.faces.size()), 2 * n * (n + 1));
    EXPECT_EQ(boundary_faces(m), 4 * n);
    EXPECT_NEAR(total_measure(m), 1.0, 1e-13);
    // Euler characteristic of a disk
    EXPECT_EQ(m.num_vertices() - static_cast<Index>(m.faces.size()) + m.num_cells(), 1);
  }
  EXPECT_EQ(make_quad_grid(1).num_vertices(), 4);
}

TEST(QuadGrid, NonParallelogramTrapezoidsWithHalvingDiameter) {
  for (int level = 2; level <= 5; ++level) {
    const PolytopalMesh m = make_quad_grid(level);
    for (Index c = 0; c < m.num_cells(); ++c) {
      EXPECT_FALSE(is_parallelogram(m, c)) << "level " << level << " cell " << c;
      EXPECT_TRUE(is_trapezoid(m, c));
      EXPECT_GT(m.cell_measure(c), 0.0);
    }
    if (level > 2) {
      const PolytopalMesh coarse = make_quad_grid(level - 1);
      EXPECT_NEAR(coarse.cell_diameter(0) / m.cell_diameter(0), 2.0, 1e-12);
    }
  }
}

TEST(QuadGrid, CellsAreCongruent) {
  const PolytopalMesh m = make_quad_grid(3);
  auto signature = [&](Index c) {
    std::multiset<long> s;
    const auto& v = m.cells[c];
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = i + 1; j < v.size(); ++j) s.insert(std::lround(1e9 * (m.vertices[v[i]] - m.vertices[v[j]]).norm()));
    return s;
  };
  for (Index c = 1; c < m.num_cells(); ++c) EXPECT_EQ(signature(c), signature(0));
}

TEST(QuadhexGrid, CountsAreaAndHexagons) {
  for (int level = 1; level <= 4; ++level) {
    const PolytopalMesh m = make_quadhex_grid(level);
    const Index macros = Index{1} << (2 * (level - 1));
    EXPECT_EQ(m.num_cells(), 7 * macros);
    EXPECT_NEAR(total_measure(m), 1.0, 1e-13);
    Index hex = 0;
    for (const auto& c : m.cells) hex += c.size() == 6;
    EXPECT_EQ(hex, macros);
    EXPECT_EQ(m.num_vertices() - static_cast<Index>(m.faces.size()) + m.num_cells(), 1);
  }
}

TEST(WedgeGrid, CountsAndVolume) {
  for (int level = 1; level <= 4; ++level) {
    const PolytopalMesh m = make_wedge_grid(level);
    const Index n = Index{1} << (level - 1);
    EXPECT_EQ(m.num_cells(), 2 * n * n * n);
    EXPECT_EQ(m.num_vertices(), (n + 1) * (n + 1) * (n + 1));
    EXPECT_NEAR(total_measure(m), 1.0, 1e-13);
    for (Index c = 0; c < m.num_cells(); ++c) EXPECT_NEAR(m.cell_measure(c), 0.5 / (n * n * n), 1e-14);
    // triangles on z = 0, 1 and rectangles on the four sides
    EXPECT_EQ(boundary_faces(m), 2 * 2 * n * n + 4 * n * n);
  }
}

TEST(Subdivision, CountsChainAndMeasure) {
  struct Case {
    GridFamily family;
    int level;
  };
  for (const Case& cs : {Case{GridFamily::quad, 3}, Case{GridFamily::quadhex, 2}, Case{GridFamily::wedge, 2}}) {
    const PolytopalMesh m = make_grid(cs.family, cs.level);
    const auto subs = subdivide_all(m);
    ASSERT_EQ(static_cast<Index>(subs.size()), m.num_cells());
    for (const auto& s : subs) {
      const std::size_t nv = m.cells[s.cell].size();
      const int expected = m.dim == 2 ? static_cast<int>(nv) - 2 : 3;
      EXPECT_EQ(s.size(), expected);
      EXPECT_EQ(static_cast<int>(s.internal_faces.size()), expected - 1);
      EXPECT_TRUE(chain_order_valid(s));
      double meas = 0.0;
      for (const auto& t : s.simplices) meas += t.measure;
      EXPECT_NEAR(meas, m.cell_measure(s.cell), 1e-14);
      double bmeas = 0.0;
      for (const auto& p : s.boundary_pieces) {
        EXPECT_NEAR(p.normal.norm(), 1.0, 1e-14);
        bmeas += p.measure;
      }
      double perimeter = 0.0;
      for (Index f : m.cell_faces[s.cell]) {
        const auto& fv = m.faces[f].vertices;
        if (m.dim == 2) {
          perimeter += (m.vertices[fv[0]] - m.vertices[fv[1]]).norm();
        } else {
          for (std::size_t i = 1; i + 1 < fv.size(); ++i) {
            const std::array<Vec3, 3> t{m.vertices[fv[0]], m.vertices[fv[i]], m.vertices[fv[i + 1]]};
            perimeter += simplex_measure(t);
          }
        }
      }
      EXPECT_NEAR(bmeas, perimeter, 1e-13);
    }
    EXPECT_NO_THROW(check_face_compatibility(m, subs));
  }
}

TEST(Subdivision, OutwardBoundaryNormals) {
  const PolytopalMesh m = make_wedge_grid(2);
  for (const auto& s : subdivide_all(m)) {
    const Vec3 c = m.cell_center(s.cell);
    for (const auto& p : s.boundary_pieces) EXPECT_GT(p.normal.dot(p.points[0] - c), 0.0);
  }
}

TEST(Subdivision, RejectsNonConvexCell) {
  const PolytopalMesh m = single_cell({Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(1, 0.3, 0), Vec3(1, 2, 0)});
  EXPECT_THROW(subdivide_cell(m, 0), NonConvexCell);
}

TEST(Topology, FaceSharedByThreeCellsIsRejected) {
  PolytopalMesh m;
  m.dim = 2;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, -1, 0), Vec3(1, 1, 0)};
  m.cells = {{0, 1, 2}, {0, 3, 1}, {0, 1, 4}};
  EXPECT_THROW(m.build_faces(), TopologyError);
}

TEST(MeshIO, RoundTripAllFamilies) {
  for (auto family : {GridFamily::quad, GridFamily::quadhex, GridFamily::wedge}) {
    const PolytopalMesh m = make_grid(family, 2);
    std::stringstream ss;
    mesh_write(m, ss);
    const PolytopalMesh r = mesh_read(ss);
    EXPECT_TRUE(r == m) << to_string(family);
    EXPECT_EQ(r.faces.size(), m.faces.size());
  }
}

TEST(MeshIO, ParseErrorsCarryLineNumbers) {
  std::istringstream bad("polymesh 2 3 1\n0 0\n1 0\n0 x\ncell 3 0 1 2\n");
  try {
    mesh_read(bad);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
  std::istringstream header("mesh 2 3 1\n");
  EXPECT_THROW(mesh_read(header), ParseError);
  std::istringstream range("polymesh 2 3 1\n0 0\n1 0\n0 1\ncell 3 0 1 7\n");
  EXPECT_THROW(mesh_read(range), ParseError);
}

TEST(MeshIO, MissingBoundaryFaceIsTopologyError) {
  std::istringstream in("polymesh 2 3 1\n0 0\n1 0\n0 1\ncell 3 0 1 2\nbface 0 1\nbface 1 2\n");
  EXPECT_THROW(mesh_read(in), TopologyError);
}

TEST(GridFamily, NamesRoundTrip) {
  for (auto family : {GridFamily::quad, GridFamily::quadhex, GridFamily::wedge})
    EXPECT_EQ(parse_grid_family(to_string(family)), family);
  EXPECT_THROW(parse_grid_family("hexahedral"), Error);
  EXPECT_THROW(make_quad_grid(0), Error);
}
