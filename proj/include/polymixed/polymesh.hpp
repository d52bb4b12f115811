#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "polymixed/common.hpp"

namespace polymixed {

inline constexpr double kGeomTol = 1e-12;
inline constexpr Index kNoCell = -1;

/// Edge (2D) or planar polygon (3D) between at most two cells.
struct Face {
  std::vector<Index> vertices;  // polygon order as seen from cells[0]
  std::array<Index, 2> cells{kNoCell, kNoCell};
  bool boundary = false;
};

/// Partition of the unit square or cube into polygons or polyhedra.
///
/// 2D cells list their vertices counterclockwise. 3D cells are tetrahedra
/// (4 vertices) or triangular prisms (a0 a1 a2 b0 b1 b2, with b_i above
/// a_i).
struct PolytopalMesh {
  int dim = 2;
  int level = 1;
  std::vector<Vec3> vertices;
  std::vector<std::vector<Index>> cells;
  std::vector<Face> faces;
  /// Face ids of each cell.
  std::vector<std::vector<Index>> cell_faces;

  Index num_cells() const { return static_cast<Index>(cells.size()); }
  Index num_vertices() const { return static_cast<Index>(vertices.size()); }

  /// Derives `faces` and `cell_faces` from `cells`. Faces with a single
  /// incident cell are tagged boundary. Throws TopologyError for faces with
  /// more than two incident cells.
  void build_faces();

  /// Polygon vertex lists of a cell's faces (local topology only).
  std::vector<std::vector<Index>> local_faces(Index cell) const;

  double cell_measure(Index cell) const;
  double cell_diameter(Index cell) const;
  Vec3 cell_center(Index cell) const;

  bool operator==(const PolytopalMesh& other) const;
};

/// 4^(level-1) right trapezoids, congruent up to rigid motions, on a
/// logically square grid with (N+1)^2 vertices, N = 2^(level-1). Level 1 is
/// the unit square itself; every finer level consists of non-parallelograms.
PolytopalMesh make_quad_grid(int level);

/// 7 * 4^(level-1) cells: per macro square one convex hexagon surrounded by
/// six convex quadrilaterals.
PolytopalMesh make_quadhex_grid(int level);

/// N^3 boxes, N = 2^(level-1), each cut by the plane x + y = const into two
/// triangular prisms extruded along z.
PolytopalMesh make_wedge_grid(int level);

enum class GridFamily { quad, quadhex, wedge };
PolytopalMesh make_grid(GridFamily family, int level);
std::string to_string(GridFamily family);
GridFamily parse_grid_family(const std::string& name);

/// Sub-simplex face of a subdivided cell: 2 (2D) or 3 (3D) global vertex
/// ids in ascending order with matching coordinates.
struct FacePiece {
  std::array<Index, 3> vertices{};
  std::array<Vec3, 3> points{};
  int count = 0;
  Vec3 normal = Vec3::Zero();
  double measure = 0.0;
  /// Owning simplex (boundary pieces) or the earlier simplex in chain order
  /// (internal faces); `normal` points away from it.
  int simplex = -1;
  /// Later simplex for internal faces, -1 otherwise.
  int neighbor = -1;
  /// Polytope face the piece lies on (boundary pieces only).
  Index polytope_face = -1;

  std::span<const Vec3> coords() const { return {points.data(), static_cast<std::size_t>(count)}; }
  std::vector<Index> key() const { return {vertices.begin(), vertices.begin() + count}; }
};

struct Simplex {
  std::array<Index, 4> vertices{};
  std::array<Vec3, 4> points{};
  int count = 0;
  double measure = 0.0;

  std::span<const Vec3> coords() const { return {points.data(), static_cast<std::size_t>(count)}; }
};

/// Simplex decomposition of one cell with no added vertices.
///
/// `simplices` are stored in chain order: every simplex after the first
/// meets the union of its predecessors in exactly one internal face.
/// `chain_order[i]` is the construction index of the i-th chain simplex.
struct CellSubdivision {
  Index cell = -1;
  int dim = 2;
  std::vector<Simplex> simplices;
  std::vector<FacePiece> internal_faces;
  std::vector<FacePiece> boundary_pieces;
  std::vector<int> chain_order;
  double measure = 0.0;

  int size() const { return static_cast<int>(simplices.size()); }
  std::vector<Vec3> cell_points() const;
};

/// 2D: fan from the lowest-index vertex. 3D prism: three tetrahedra cut
/// along the quadrilateral-face diagonals through each face's lowest-index
/// vertex. Throws NonConvexCell if a fan triangle is not positively oriented.
CellSubdivision subdivide_cell(const PolytopalMesh& mesh, Index cell);

std::vector<CellSubdivision> subdivide_all(const PolytopalMesh& mesh);

/// Peels the chain: each simplex after the first shares exactly one face
/// with its predecessors, and there are size()-1 internal faces.
bool chain_order_valid(const CellSubdivision& sub);

/// Throws FaceMismatch if the two cells of any interior polytope face
/// induce different triangulations on it.
void check_face_compatibility(const PolytopalMesh& mesh, const std::vector<CellSubdivision>& subs);

/// Text format: `polymesh <dim> <nv> <nc>`, nv coordinate lines, nc lines
/// `cell <m> v1 ... vm`, then `bface v1 ... vj` per boundary face.
void mesh_write(const PolytopalMesh& mesh, std::ostream& out);
void mesh_write(const PolytopalMesh& mesh, const std::filesystem::path& path);
PolytopalMesh mesh_read(std::istream& in);
PolytopalMesh mesh_read(const std::filesystem::path& path);

}  // namespace polymixed
