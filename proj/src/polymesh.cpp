#include "polymixed/polymesh.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "polymixed/quadrature.hpp"

namespace polymixed {

namespace {

std::vector<Index> sorted_key(std::vector<Index> v) {
  std::sort(v.begin(), v.end());
  return v;
}

void check_level(int level, int max_level, const char* who) {
  if (level < 1 || level > max_level) {
    throw Error(std::string(who) + ": level must lie in [1, " + std::to_string(max_level) + "]");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// PolytopalMesh

std::vector<std::vector<Index>> PolytopalMesh::local_faces(Index cell) const {
  const auto& v = cells[cell];
  std::vector<std::vector<Index>> out;
  if (dim == 2) {
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back({v[i], v[(i + 1) % v.size()]});
    return out;
  }
  if (v.size() == 4) {
    out = {{v[0], v[2], v[1]}, {v[0], v[1], v[3]}, {v[0], v[3], v[2]}, {v[1], v[2], v[3]}};
  } else if (v.size() == 6) {
    out = {{v[0], v[2], v[1]},
           {v[3], v[4], v[5]},
           {v[0], v[1], v[4], v[3]},
           {v[1], v[2], v[5], v[4]},
           {v[2], v[0], v[3], v[5]}};
  } else {
    throw TopologyError("3D cell " + std::to_string(cell) + " with " + std::to_string(v.size()) +
                        " vertices is neither a tetrahedron nor a prism");
  }
  return out;
}

void PolytopalMesh::build_faces() {
  faces.clear();
  cell_faces.assign(cells.size(), {});
  std::map<std::vector<Index>, Index> lookup;
  for (Index c = 0; c < num_cells(); ++c) {
    for (auto& fv : local_faces(c)) {
      auto key = sorted_key(fv);
      auto it = lookup.find(key);
      if (it == lookup.end()) {
        Face f;
        f.vertices = std::move(fv);
        f.cells = {c, kNoCell};
        lookup.emplace(std::move(key), static_cast<Index>(faces.size()));
        cell_faces[c].push_back(static_cast<Index>(faces.size()));
        faces.push_back(std::move(f));
      } else {
        Face& f = faces[it->second];
        if (f.cells[1] != kNoCell) {
          throw TopologyError("face shared by more than two cells (cell " + std::to_string(c) + ")");
        }
        f.cells[1] = c;
        cell_faces[c].push_back(it->second);
      }
    }
  }
  for (auto& f : faces) f.boundary = (f.cells[1] == kNoCell);
}

double PolytopalMesh::cell_measure(Index cell) const {
  const auto& v = cells[cell];
  if (dim == 2) {
    double a = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Vec3& p = vertices[v[i]];
      const Vec3& q = vertices[v[(i + 1) % v.size()]];
      a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * a;
  }
  auto tet = [&](Index a, Index b, Index c, Index d) {
    const std::array<Vec3, 4> p{vertices[a], vertices[b], vertices[c], vertices[d]};
    return simplex_measure(p);
  };
  if (v.size() == 4) return tet(v[0], v[1], v[2], v[3]);
  return tet(v[0], v[1], v[2], v[3]) + tet(v[1], v[2], v[3], v[4]) + tet(v[2], v[3], v[4], v[5]);
}

double PolytopalMesh::cell_diameter(Index cell) const {
  const auto& v = cells[cell];
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) d = std::max(d, (vertices[v[i]] - vertices[v[j]]).norm());
  return d;
}

Vec3 PolytopalMesh::cell_center(Index cell) const {
  Vec3 c = Vec3::Zero();
  for (Index v : cells[cell]) c += vertices[v];
  return c / static_cast<double>(cells[cell].size());
}

bool PolytopalMesh::operator==(const PolytopalMesh& other) const {
  if (dim != other.dim || vertices != other.vertices || cells != other.cells) return false;
  auto bset = [](const PolytopalMesh& m) {
    std::set<std::vector<Index>> s;
    for (const auto& f : m.faces)
      if (f.boundary) s.insert(sorted_key(f.vertices));
    return s;
  };
  return bset(*this) == bset(other);
}

// ---------------------------------------------------------------------------
// Generators

PolytopalMesh make_quad_grid(int level) {
  check_level(level, 12, "make_quad_grid");
  const Index n = Index{1} << (level - 1);
  const double shift = n == 1 ? 0.0 : 1.0 / (4.0 * n);
  PolytopalMesh m;
  m.dim = 2;
  m.level = level;
  m.vertices.reserve((n + 1) * (n + 1));
  for (Index j = 0; j <= n; ++j)
    for (Index i = 0; i <= n; ++i) {
      double y = static_cast<double>(j) / n;
      // odd rows form a zigzag, so no cell is a parallelogram
      if (j % 2 == 1) y += (i % 2 == 0) ? -shift : shift;
      m.vertices.emplace_back(static_cast<double>(i) / n, y, 0.0);
    }
  auto id = [n](Index i, Index j) { return i + (n + 1) * j; };
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) m.cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
  m.build_faces();
  return m;
}

PolytopalMesh make_quadhex_grid(int level) {
  check_level(level, 12, "make_quadhex_grid");
  const Index n = Index{1} << (level - 1);
  PolytopalMesh m;
  m.dim = 2;
  m.level = level;
  // macro-cell vertices in units of 1/8
  enum : int { c00, c80, c88, c08, r84, l04, h1, h2, h3, h4, h5, h6 };
  static constexpr std::array<std::array<int, 2>, 12> local = {
      {{0, 0}, {8, 0}, {8, 8}, {0, 8}, {8, 4}, {0, 4}, {2, 2}, {6, 2}, {7, 4}, {6, 6}, {2, 6}, {1, 4}}};
  static const std::vector<std::vector<int>> pattern = {
      {h1, h2, h3, h4, h5, h6}, {c00, c80, h2, h1}, {h5, h4, c88, c08}, {c80, r84, h3, h2},
      {r84, c88, h4, h3},       {c00, h1, h6, l04}, {l04, h6, h5, c08}};
  std::map<std::pair<Index, Index>, Index> lookup;
  const double unit = 1.0 / (8.0 * n);
  auto vertex = [&](Index gx, Index gy) {
    auto [it, inserted] = lookup.try_emplace({gx, gy}, m.num_vertices());
    if (inserted) m.vertices.emplace_back(gx * unit, gy * unit, 0.0);
    return it->second;
  };
  for (Index J = 0; J < n; ++J)
    for (Index I = 0; I < n; ++I)
      for (const auto& cell : pattern) {
        std::vector<Index> ids;
        for (int lv : cell) ids.push_back(vertex(8 * I + local[lv][0], 8 * J + local[lv][1]));
        m.cells.push_back(std::move(ids));
      }
  m.build_faces();
  return m;
}

PolytopalMesh make_wedge_grid(int level) {
  check_level(level, 8, "make_wedge_grid");
  const Index n = Index{1} << (level - 1);
  PolytopalMesh m;
  m.dim = 3;
  m.level = level;
  for (Index k = 0; k <= n; ++k)
    for (Index j = 0; j <= n; ++j)
      for (Index i = 0; i <= n; ++i)
        m.vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n, static_cast<double>(k) / n);
  auto id = [n](Index i, Index j, Index k) { return i + (n + 1) * (j + (n + 1) * k); };
  for (Index k = 0; k < n; ++k)
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) {
        const Index p00 = id(i, j, k), p10 = id(i + 1, j, k), p01 = id(i, j + 1, k), p11 = id(i + 1, j + 1, k);
        const Index up = id(0, 0, 1);
        m.cells.push_back({p00, p10, p01, p00 + up, p10 + up, p01 + up});
        m.cells.push_back({p10, p11, p01, p10 + up, p11 + up, p01 + up});
      }
  m.build_faces();
  return m;
}

PolytopalMesh make_grid(GridFamily family, int level) {
  switch (family) {
    case GridFamily::quad: return make_quad_grid(level);
    case GridFamily::quadhex: return make_quadhex_grid(level);
    case GridFamily::wedge: return make_wedge_grid(level);
  }
  throw Error("make_grid: unknown family");
}

std::string to_string(GridFamily family) {
  switch (family) {
    case GridFamily::quad: return "quad";
    case GridFamily::quadhex: return "quadhex";
    case GridFamily::wedge: return "wedge";
  }
  return "?";
}

GridFamily parse_grid_family(const std::string& name) {
  if (name == "quad") return GridFamily::quad;
  if (name == "quadhex") return GridFamily::quadhex;
  if (name == "wedge") return GridFamily::wedge;
  throw Error("unknown grid family '" + name + "'");
}

// ---------------------------------------------------------------------------
// Subdivision

std::vector<Vec3> CellSubdivision::cell_points() const {
  std::vector<Vec3> pts;
  for (const auto& s : simplices) pts.insert(pts.end(), s.points.begin(), s.points.begin() + s.count);
  return pts;
}

namespace {

Vec3 piece_normal(const FacePiece& f, const Vec3& opposite) {
  Vec3 n;
  if (f.count == 2) {
    const Vec3 t = f.points[1] - f.points[0];
    n = Vec3(t.y(), -t.x(), 0.0);
  } else {
    n = (f.points[1] - f.points[0]).cross(f.points[2] - f.points[0]);
  }
  n.normalize();
  if (n.dot(f.points[0] - opposite) < 0.0) n = -n;
  return n;
}

// Orders simplices breadth-first from the lowest-numbered leaf of the
// adjacency tree and fills in the face pieces.
CellSubdivision finish_subdivision(const PolytopalMesh& mesh, Index cell, std::vector<std::array<Index, 4>> simp) {
  const int nv = mesh.dim + 1;
  const int ns = static_cast<int>(simp.size());

  auto faces_of = [nv](const std::array<Index, 4>& s) {
    std::vector<std::vector<Index>> out;
    for (int skip = 0; skip < nv; ++skip) {
      std::vector<Index> f;
      for (int a = 0; a < nv; ++a)
        if (a != skip) f.push_back(s[a]);
      std::sort(f.begin(), f.end());
      out.push_back(std::move(f));
    }
    return out;
  };

  std::map<std::vector<Index>, std::vector<int>> owners;
  for (int s = 0; s < ns; ++s)
    for (auto& f : faces_of(simp[s])) owners[f].push_back(s);

  std::vector<std::vector<int>> adj(ns);
  for (const auto& [key, who] : owners)
    if (who.size() == 2) {
      adj[who[0]].push_back(who[1]);
      adj[who[1]].push_back(who[0]);
    }
  int start = 0;
  for (int s = 0; s < ns; ++s)
    if (adj[s].size() <= 1) {
      start = s;
      break;
    }
  std::vector<int> order{start};
  std::vector<bool> seen(ns, false);
  seen[start] = true;
  for (std::size_t head = 0; head < order.size(); ++head) {
    auto next = adj[order[head]];
    std::sort(next.begin(), next.end());
    for (int t : next)
      if (!seen[t]) {
        seen[t] = true;
        order.push_back(t);
      }
  }
  if (static_cast<int>(order.size()) != ns) throw TopologyError("subdivision is not connected");

  CellSubdivision sub;
  sub.cell = cell;
  sub.dim = mesh.dim;
  sub.chain_order = order;
  std::vector<int> position(ns);
  for (int i = 0; i < ns; ++i) position[order[i]] = i;
  for (int i = 0; i < ns; ++i) {
    Simplex s;
    s.count = nv;
    s.vertices = simp[order[i]];
    for (int a = 0; a < nv; ++a) s.points[a] = mesh.vertices[s.vertices[a]];
    s.measure = simplex_measure(s.coords());
    sub.measure += s.measure;
    sub.simplices.push_back(s);
  }

  auto make_piece = [&](const std::vector<Index>& key) {
    FacePiece f;
    f.count = static_cast<int>(key.size());
    for (int a = 0; a < f.count; ++a) {
      f.vertices[a] = key[a];
      f.points[a] = mesh.vertices[key[a]];
    }
    f.measure = simplex_measure(f.coords());
    return f;
  };
  auto opposite = [&](int s, const FacePiece& f) {
    const auto& sx = sub.simplices[s];
    for (int a = 0; a < nv; ++a)
      if (std::find(f.vertices.begin(), f.vertices.begin() + f.count, sx.vertices[a]) == f.vertices.begin() + f.count)
        return sx.points[a];
    throw TopologyError("face piece does not belong to its simplex");
  };

  const auto cell_faces = mesh.local_faces(cell);
  for (int i = 0; i < ns; ++i) {
    for (auto& key : faces_of(sub.simplices[i].vertices)) {
      const auto& who = owners[key];
      if (who.size() == 2) {
        const int a = position[who[0]], b = position[who[1]];
        if (std::max(a, b) != i) continue;  // record once, when the later simplex is reached
        FacePiece f = make_piece(key);
        f.simplex = std::min(a, b);
        f.neighbor = i;
        f.normal = piece_normal(f, opposite(f.simplex, f));
        sub.internal_faces.push_back(f);
      } else {
        FacePiece f = make_piece(key);
        f.simplex = i;
        f.normal = piece_normal(f, opposite(i, f));
        for (std::size_t lf = 0; lf < cell_faces.size(); ++lf) {
          const auto& fv = cell_faces[lf];
          bool inside = true;
          for (int a = 0; a < f.count; ++a) inside &= std::find(fv.begin(), fv.end(), f.vertices[a]) != fv.end();
          if (inside) {
            f.polytope_face = mesh.cell_faces.empty() ? -1 : mesh.cell_faces[cell][lf];
            break;
          }
        }
        sub.boundary_pieces.push_back(f);
      }
    }
  }
  return sub;
}

}  // namespace

CellSubdivision subdivide_cell(const PolytopalMesh& mesh, Index cell) {
  const auto& v = mesh.cells[cell];
  std::vector<std::array<Index, 4>> simp;
  if (mesh.dim == 2) {
    const std::size_t m = v.size();
    if (m < 3) throw NonConvexCell("cell " + std::to_string(cell) + " has fewer than 3 vertices");
    const std::size_t r = std::min_element(v.begin(), v.end()) - v.begin();
    std::vector<Index> w(m);
    for (std::size_t i = 0; i < m; ++i) w[i] = v[(r + i) % m];
    const double scale = mesh.cell_diameter(cell);
    for (std::size_t i = 0; i < m; ++i) {
      const Vec3 e1 = mesh.vertices[w[(i + 1) % m]] - mesh.vertices[w[i]];
      const Vec3 e2 = mesh.vertices[w[(i + 2) % m]] - mesh.vertices[w[(i + 1) % m]];
      if (e1.x() * e2.y() - e1.y() * e2.x() <= kGeomTol * scale * scale) {
        throw NonConvexCell("cell " + std::to_string(cell) + " is not strictly convex");
      }
    }
    for (std::size_t i = 1; i + 1 < m; ++i) simp.push_back({w[0], w[i], w[i + 1], 0});
  } else if (v.size() == 4) {
    simp.push_back({v[0], v[1], v[2], v[3]});
  } else if (v.size() == 6) {
    const std::size_t p = std::min_element(v.begin(), v.end()) - v.begin();
    std::array<Index, 3> a, b;
    const std::size_t base = p < 3 ? 0 : 3, other = p < 3 ? 3 : 0, r = p % 3;
    for (std::size_t i = 0; i < 3; ++i) {
      a[i] = v[base + (r + i) % 3];
      b[i] = v[other + (r + i) % 3];
    }
    simp.push_back({a[0], b[0], b[1], b[2]});
    const Index lowest = std::min({a[1], a[2], b[1], b[2]});
    if (lowest == a[1] || lowest == b[2]) {
      simp.push_back({a[0], a[1], b[2], b[1]});
      simp.push_back({a[0], a[1], a[2], b[2]});
    } else {
      simp.push_back({a[0], a[1], a[2], b[1]});
      simp.push_back({a[0], b[1], a[2], b[2]});
    }
  } else {
    throw NonConvexCell("cell " + std::to_string(cell) + ": unsupported polyhedron");
  }

  auto sub = finish_subdivision(mesh, cell, std::move(simp));
  const double scale = mesh.cell_diameter(cell);
  for (const auto& s : sub.simplices) {
    if (s.measure <= kGeomTol * std::pow(scale, mesh.dim)) {
      throw NonConvexCell("cell " + std::to_string(cell) + ": degenerate simplex in subdivision");
    }
  }
  return sub;
}

std::vector<CellSubdivision> subdivide_all(const PolytopalMesh& mesh) {
  std::vector<CellSubdivision> subs(mesh.num_cells());
  for (Index c = 0; c < mesh.num_cells(); ++c) subs[c] = subdivide_cell(mesh, c);
  return subs;
}

bool chain_order_valid(const CellSubdivision& sub) {
  const int n = sub.size();
  if (static_cast<int>(sub.internal_faces.size()) != n - 1) return false;
  std::vector<int> attach(n, 0);
  for (const auto& f : sub.internal_faces) {
    if (f.simplex < 0 || f.neighbor <= f.simplex || f.neighbor >= n) return false;
    ++attach[f.neighbor];
  }
  if (attach[0] != 0) return false;
  for (int i = 1; i < n; ++i)
    if (attach[i] != 1) return false;
  return true;
}

void check_face_compatibility(const PolytopalMesh& mesh, const std::vector<CellSubdivision>& subs) {
  std::vector<std::set<std::vector<Index>>> induced(mesh.faces.size());
  std::vector<std::set<std::vector<Index>>> induced_other(mesh.faces.size());
  for (const auto& sub : subs)
    for (const auto& p : sub.boundary_pieces) {
      if (p.polytope_face < 0) throw FaceMismatch("cell " + std::to_string(sub.cell) + ": piece off the cell boundary");
      const auto& f = mesh.faces[p.polytope_face];
      (f.cells[0] == sub.cell ? induced : induced_other)[p.polytope_face].insert(p.key());
    }
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    if (mesh.faces[f].boundary) continue;
    if (induced[f] != induced_other[f]) {
      throw FaceMismatch("face " + std::to_string(f) + ": cells " + std::to_string(mesh.faces[f].cells[0]) + " and " +
                         std::to_string(mesh.faces[f].cells[1]) + " induce different triangulations");
    }
  }
}

// ---------------------------------------------------------------------------
// Text I/O

void mesh_write(const PolytopalMesh& mesh, std::ostream& out) {
  out << "polymesh " << mesh.dim << ' ' << mesh.num_vertices() << ' ' << mesh.num_cells() << '\n';
  out << std::setprecision(17);
  for (const auto& p : mesh.vertices) {
    for (int c = 0; c < mesh.dim; ++c) out << (c ? " " : "") << p[c];
    out << '\n';
  }
  for (const auto& c : mesh.cells) {
    out << "cell " << c.size();
    for (Index v : c) out << ' ' << v;
    out << '\n';
  }
  for (const auto& f : mesh.faces) {
    if (!f.boundary) continue;
    out << "bface";
    for (Index v : f.vertices) out << ' ' << v;
    out << '\n';
  }
}

void mesh_write(const PolytopalMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  mesh_write(mesh, out);
}

PolytopalMesh mesh_read(std::istream& in) {
  PolytopalMesh m;
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };

  if (!next_line()) throw ParseError(lineno, "empty input");
  Index nv = 0, nc = 0;
  {
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag >> m.dim >> nv >> nc) || tag != "polymesh") throw ParseError(lineno, "expected 'polymesh <dim> <nv> <nc>'");
    if (m.dim != 2 && m.dim != 3) throw ParseError(lineno, "dimension must be 2 or 3");
    if (nv < 0 || nc < 0) throw ParseError(lineno, "negative count");
  }
  for (Index i = 0; i < nv; ++i) {
    if (!next_line()) throw ParseError(lineno, "unexpected end of file in vertex block");
    std::istringstream ss(line);
    Vec3 p = Vec3::Zero();
    for (int c = 0; c < m.dim; ++c)
      if (!(ss >> p[c])) throw ParseError(lineno, "malformed coordinate");
    std::string extra;
    if (ss >> extra) throw ParseError(lineno, "trailing token '" + extra + "'");
    m.vertices.push_back(p);
  }
  auto read_ids = [&](std::istringstream& ss, std::vector<Index>& ids) {
    Index v;
    while (ss >> v) {
      if (v < 0 || v >= nv) throw ParseError(lineno, "vertex id " + std::to_string(v) + " out of range");
      ids.push_back(v);
    }
    if (!ss.eof()) throw ParseError(lineno, "malformed vertex id");
  };
  for (Index i = 0; i < nc; ++i) {
    if (!next_line()) throw ParseError(lineno, "unexpected end of file in cell block");
    std::istringstream ss(line);
    std::string tag;
    std::size_t count = 0;
    if (!(ss >> tag >> count) || tag != "cell") throw ParseError(lineno, "expected 'cell <m> v1 ... vm'");
    std::vector<Index> ids;
    read_ids(ss, ids);
    if (ids.size() != count) throw ParseError(lineno, "cell vertex count mismatch");
    if (m.dim == 3 && count != 4 && count != 6) throw ParseError(lineno, "3D cells must have 4 or 6 vertices");
    if (m.dim == 2 && count < 3) throw ParseError(lineno, "2D cells need at least 3 vertices");
    m.cells.push_back(std::move(ids));
  }
  std::set<std::vector<Index>> bfaces;
  std::vector<std::size_t> bface_lines;
  while (next_line()) {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag != "bface") throw ParseError(lineno, "expected 'bface v1 ... vj'");
    std::vector<Index> ids;
    read_ids(ss, ids);
    if (ids.size() < static_cast<std::size_t>(m.dim)) throw ParseError(lineno, "boundary face too small");
    bfaces.insert(sorted_key(ids));
  }

  m.build_faces();
  std::set<std::vector<Index>> single;
  for (const auto& f : m.faces) {
    if (!f.boundary) continue;
    auto key = sorted_key(f.vertices);
    if (!bfaces.count(key)) {
      throw TopologyError("face of cell " + std::to_string(f.cells[0]) + " has one incident cell and no boundary tag");
    }
    single.insert(std::move(key));
  }
  for (const auto& b : bfaces)
    if (!single.count(b)) throw TopologyError("bface entry does not match a boundary face of the mesh");
  return m;
}

PolytopalMesh mesh_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return mesh_read(in);
}

}  // namespace polymixed
