#include "polymixed/assembly.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <cmath>
#include <exception>
#include <numbers>

#include "polymixed/projection.hpp"

namespace polymixed {

namespace {

template <class F>
void for_each_point(std::span<const Vec3> verts, double measure, const QuadRule& rule, F&& fn) {
  double fact = 1.0;
  for (int i = 2; i < static_cast<int>(verts.size()); ++i) fact *= i;
  const double jac = measure * fact;
  for (std::size_t q = 0; q < rule.size(); ++q) fn(map_barycentric(verts, rule.points[q]), rule.weights[q] * jac);
}

}  // namespace

Index GlobalDofMap::pressure_size(Index cell) const {
  const Index end = cell + 1 < static_cast<Index>(pressure_offset.size()) ? pressure_offset[cell + 1] : num_pressure;
  return end - pressure_offset[cell];
}

GlobalDofMap build_dof_map(const PolytopalMesh& mesh, const std::vector<LocalVelocitySpace>& spaces) {
  GlobalDofMap map;
  if (spaces.empty()) return map;
  map.dim = spaces.front().dim;
  map.k = spaces.front().k;
  const auto nft = static_cast<Index>(dim_pk(map.dim - 1, map.k));
  const auto npk = static_cast<Index>(dim_pk(map.dim, map.k));

  std::map<std::vector<Index>, std::vector<Index>> owners;
  for (const auto& sp : spaces)
    for (const auto& p : sp.sub.boundary_pieces) owners[p.key()].push_back(sp.cell);
  for (const auto& [key, cells] : owners) {
    if (cells.size() > 2) throw FaceMismatch("face piece shared by more than two cells");
    if (cells.size() == 1) {
      bool on_boundary = false;
      for (const auto& p : spaces[cells[0]].sub.boundary_pieces)
        if (p.key() == key) on_boundary = mesh.faces[p.polytope_face].boundary;
      if (!on_boundary) throw FaceMismatch("cell " + std::to_string(cells[0]) + ": unmatched interior face piece");
    } else {
      ++map.num_interior_face_pieces;
    }
    map.face_offset[key] = map.num_face_pieces * nft;
    ++map.num_face_pieces;
  }
  map.num_face_dofs = map.num_face_pieces * nft;

  Index next = map.num_face_dofs;
  map.velocity.resize(spaces.size());
  map.sign.resize(spaces.size());
  map.pressure_offset.resize(spaces.size());
  for (std::size_t c = 0; c < spaces.size(); ++c) {
    const auto& sp = spaces[c];
    const int nb = sp.num_basis();
    map.velocity[c].resize(nb);
    map.sign[c].assign(nb, 1.0);
    for (int j = 0; j < nb; ++j) {
      const auto& row = sp.rows[j];
      if (row.kind == DofKind::boundary_moment) {
        const auto& piece = sp.sub.boundary_pieces[row.where];
        const auto& cells = owners[piece.key()];
        map.velocity[c][j] = map.face_offset[piece.key()] + row.test;
        if (cells.size() == 2 && sp.cell != std::min(cells[0], cells[1])) map.sign[c][j] = -1.0;
      } else {
        map.velocity[c][j] = next++;
      }
    }
    map.pressure_offset[c] = static_cast<Index>(c) * npk;
  }
  map.num_velocity = next;
  map.num_pressure = static_cast<Index>(spaces.size()) * npk;
  return map;
}

Vec3 ManufacturedCase::q(const Vec3& x) const {
  Eigen::Vector3d gu = grad_u(x);
  if (dim == 2) {
    const Eigen::Vector2d r = a.topLeftCorner<2, 2>().ldlt().solve(gu.head<2>());
    return {-r[0], -r[1], 0.0};
  }
  return -a.ldlt().solve(gu);
}

double ManufacturedCase::f(const Vec3& x) const {
  const Eigen::Matrix3d h = hess_u(x);
  if (dim == 2) return -(a.topLeftCorner<2, 2>().inverse() * h.topLeftCorner<2, 2>()).trace();
  return -(a.inverse() * h).trace();
}

ManufacturedCase manufactured_case(const std::string& name, int dim) {
  using std::numbers::pi;
  ManufacturedCase mc;
  mc.name = name;
  mc.dim = dim;
  if (dim != 2 && dim != 3) throw DimensionMismatch("case dimension must be 2 or 3");
  if (name == "trig2d") {
    if (dim != 2) throw DimensionMismatch("trig2d is two-dimensional");
    mc.u = [](const Vec3& x) { return std::sin(pi * x[0]) * std::sin(pi * x[1]); };
    mc.grad_u = [](const Vec3& x) {
      return Vec3(pi * std::cos(pi * x[0]) * std::sin(pi * x[1]), pi * std::sin(pi * x[0]) * std::cos(pi * x[1]), 0.0);
    };
    mc.hess_u = [](const Vec3& x) {
      const double sx = std::sin(pi * x[0]), sy = std::sin(pi * x[1]);
      const double cx = std::cos(pi * x[0]), cy = std::cos(pi * x[1]);
      Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
      h(0, 0) = -pi * pi * sx * sy;
      h(1, 1) = -pi * pi * sx * sy;
      h(0, 1) = h(1, 0) = pi * pi * cx * cy;
      return h;
    };
  } else if (name == "poly3d") {
    if (dim != 3) throw DimensionMismatch("poly3d is three-dimensional");
    mc.u = [](const Vec3& x) {
      const double X = x[0] - x[0] * x[0], Y = x[1] - x[1] * x[1], Z = x[2] - x[2] * x[2];
      return 256.0 * X * X * Y * Z;
    };
    mc.grad_u = [](const Vec3& x) {
      const double X = x[0] - x[0] * x[0], Y = x[1] - x[1] * x[1], Z = x[2] - x[2] * x[2];
      const double dX = 1 - 2 * x[0], dY = 1 - 2 * x[1], dZ = 1 - 2 * x[2];
      return Vec3(256.0 * 2 * X * dX * Y * Z, 256.0 * X * X * dY * Z, 256.0 * X * X * Y * dZ);
    };
    mc.hess_u = [](const Vec3& x) {
      const double X = x[0] - x[0] * x[0], Y = x[1] - x[1] * x[1], Z = x[2] - x[2] * x[2];
      const double dX = 1 - 2 * x[0], dY = 1 - 2 * x[1], dZ = 1 - 2 * x[2];
      Eigen::Matrix3d h;
      h(0, 0) = 256.0 * 2 * (dX * dX - 2 * X) * Y * Z;
      h(1, 1) = -256.0 * 2 * X * X * Z;
      h(2, 2) = -256.0 * 2 * X * X * Y;
      h(0, 1) = h(1, 0) = 256.0 * 2 * X * dX * dY * Z;
      h(0, 2) = h(2, 0) = 256.0 * 2 * X * dX * Y * dZ;
      h(1, 2) = h(2, 1) = 256.0 * X * X * dY * dZ;
      return h;
    };
  } else if (name == "constant") {
    mc.u = [](const Vec3&) { return 1.5; };
    mc.grad_u = [](const Vec3&) { return Vec3::Zero().eval(); };
    mc.hess_u = [](const Vec3&) { return Eigen::Matrix3d::Zero().eval(); };
  } else if (name == "linear") {
    const Vec3 grad = dim == 2 ? Vec3(1.0, -2.0, 0.0) : Vec3(1.0, -2.0, 0.5);
    mc.u = [grad](const Vec3& x) { return 1.0 + grad.dot(x); };
    mc.grad_u = [grad](const Vec3&) { return grad; };
    mc.hess_u = [](const Vec3&) { return Eigen::Matrix3d::Zero().eval(); };
  } else {
    throw UnknownCase("unknown case '" + name + "'");
  }
  return mc;
}

LocalBlocks local_blocks(const PolytopalMesh& mesh, const LocalVelocitySpace& space, const ManufacturedCase& mc) {
  const int nb = space.num_basis();
  const ScaledPolynomialBasis pk = cell_pk_basis(space);
  const auto np = static_cast<Index>(pk.size());
  LocalBlocks b;
  b.mass = Eigen::MatrixXd::Zero(nb, nb);
  b.div = Eigen::MatrixXd::Zero(np, nb);
  b.divdiv = Eigen::MatrixXd::Zero(nb, nb);
  b.pmass = Eigen::MatrixXd::Zero(np, np);
  b.g = Eigen::VectorXd::Zero(nb);
  b.f = Eigen::VectorXd::Zero(np);

  const QuadRule& poly = simplex_rule(space.dim, space.quad_degree);
  const QuadRule& data = simplex_rule(space.dim, kDataQuadDegree);
  const Eigen::Matrix3d a = mc.a;
  Eigen::Matrix<double, 3, Eigen::Dynamic> vals;
  Eigen::VectorXd div, p(np);
  for (int i = 0; i < space.sub.size(); ++i) {
    const auto& s = space.sub.simplices[i];
    for_each_point(s.coords(), s.measure, poly, [&](const Vec3& x, double w) {
      space.basis_values(i, x, vals, div);
      pk.eval(x, std::span<double>(p.data(), np));
      b.mass.noalias() += w * vals.transpose() * a * vals;
      b.div.noalias() += w * p * div.transpose();
      b.divdiv.noalias() += w * div * div.transpose();
      b.pmass.noalias() += w * p * p.transpose();
    });
    for_each_point(s.coords(), s.measure, data, [&](const Vec3& x, double w) {
      pk.eval(x, std::span<double>(p.data(), np));
      b.f += w * mc.f(x) * p;
    });
  }
  const QuadRule& face = simplex_rule(space.dim - 1, kDataQuadDegree);
  for (const auto& piece : space.sub.boundary_pieces) {
    if (!mesh.faces[piece.polytope_face].boundary) continue;
    for_each_point(piece.coords(), piece.measure, face, [&](const Vec3& x, double w) {
      space.basis_values(piece.simplex, x, vals, div);
      b.g += w * mc.g(x) * (vals.transpose() * piece.normal);
    });
  }
  return b;
}

namespace {

MixedSystem gather(const std::vector<LocalBlocks>& blocks, const GlobalDofMap& dofs) {
  MixedSystem sys;
  sys.num_velocity = dofs.num_velocity;
  sys.num_pressure = dofs.num_pressure;
  const Index n = dofs.num_unknowns();
  sys.rhs = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Triplet<double>> trip;
  std::size_t nnz = 0;
  for (const auto& b : blocks) nnz += b.mass.size() + 2 * b.div.size();
  trip.reserve(nnz);
  for (std::size_t c = 0; c < blocks.size(); ++c) {
    const auto& b = blocks[c];
    const auto& gi = dofs.velocity[c];
    const auto& sg = dofs.sign[c];
    const Index p0 = dofs.num_velocity + dofs.pressure_offset[c];
    for (Index j = 0; j < b.mass.cols(); ++j) {
      for (Index i = 0; i < b.mass.rows(); ++i) trip.emplace_back(gi[i], gi[j], sg[i] * sg[j] * b.mass(i, j));
      for (Index m = 0; m < b.div.rows(); ++m) {
        trip.emplace_back(p0 + m, gi[j], sg[j] * b.div(m, j));
        trip.emplace_back(gi[j], p0 + m, sg[j] * b.div(m, j));
      }
      sys.rhs[gi[j]] += sg[j] * b.g[j];
    }
    sys.rhs.segment(p0, b.f.size()) += b.f;
  }
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  return sys;
}

}  // namespace

MixedSystem assemble(const PolytopalMesh& mesh, const std::vector<LocalVelocitySpace>& spaces,
                     const GlobalDofMap& dofs, const ManufacturedCase& mc) {
  std::vector<LocalBlocks> blocks(spaces.size());
  std::vector<std::exception_ptr> errors(spaces.size());
  const auto n = static_cast<std::int64_t>(spaces.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t c = 0; c < n; ++c) {
    try {
      blocks[c] = local_blocks(mesh, spaces[c], mc);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return gather(blocks, dofs);
}

MixedSystem assemble_serial(const PolytopalMesh& mesh, const std::vector<LocalVelocitySpace>& spaces,
                            const GlobalDofMap& dofs, const ManufacturedCase& mc) {
  std::vector<LocalBlocks> blocks;
  blocks.reserve(spaces.size());
  for (const auto& sp : spaces) blocks.push_back(local_blocks(mesh, sp, mc));
  return gather(blocks, dofs);
}

MixedSolution solve(const MixedSystem& system) {
  const Index n = system.matrix.rows();
  const double bnorm = system.rhs.norm();
  Eigen::VectorXd x;
  if (bnorm == 0.0) {
    x = Eigen::VectorXd::Zero(n);
  } else if (n < kDenseSolveLimit) {
    const Eigen::MatrixXd dense(system.matrix);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(dense);
    x = lu.solve(system.rhs);
    x += lu.solve(system.rhs - system.matrix * x);
  } else {
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(system.matrix);
    lu.factorize(system.matrix);
    if (lu.info() != Eigen::Success) throw SolveFailure("sparse LU: " + lu.lastErrorMessage());
    x = lu.solve(system.rhs);
    x += lu.solve(system.rhs - system.matrix * x);
  }
  MixedSolution sol;
  sol.residual = bnorm == 0.0 ? 0.0 : (system.matrix * x - system.rhs).norm() / bnorm;
  if (!std::isfinite(sol.residual) || sol.residual > kSolveTolerance)
    throw SolveFailure("relative residual " + std::to_string(sol.residual));
  sol.q = x.head(system.num_velocity);
  sol.u = -x.tail(system.num_pressure);
  return sol;
}

Eigen::VectorXd cell_velocity(const LocalVelocitySpace& space, const GlobalDofMap& dofs, const Eigen::VectorXd& q) {
  const auto& gi = dofs.velocity[space.cell];
  const auto& sg = dofs.sign[space.cell];
  Eigen::VectorXd local(static_cast<Index>(gi.size()));
  for (std::size_t j = 0; j < gi.size(); ++j) local[j] = sg[j] * q[gi[j]];
  return space.combine(local);
}

Eigen::VectorXd cell_pressure(const GlobalDofMap& dofs, Index cell, const Eigen::VectorXd& u) {
  return u.segment(dofs.pressure_offset[cell], dofs.pressure_size(cell));
}

double inf_sup_constant(const PolytopalMesh& mesh, const std::vector<LocalVelocitySpace>& spaces,
                        const GlobalDofMap& dofs) {
  const ManufacturedCase mc = manufactured_case("constant", mesh.dim);
  const Index nv = dofs.num_velocity, np = dofs.num_pressure;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(nv, nv), b = Eigen::MatrixXd::Zero(np, nv);
  Eigen::MatrixXd pmass = Eigen::MatrixXd::Zero(np, np);
  for (std::size_t c = 0; c < spaces.size(); ++c) {
    const LocalBlocks lb = local_blocks(mesh, spaces[c], mc);
    const auto& gi = dofs.velocity[c];
    const auto& sg = dofs.sign[c];
    const Index p0 = dofs.pressure_offset[c];
    for (Index j = 0; j < lb.mass.cols(); ++j) {
      for (Index i = 0; i < lb.mass.rows(); ++i)
        gram(gi[i], gi[j]) += sg[i] * sg[j] * (lb.mass(i, j) + lb.divdiv(i, j));
      for (Index m = 0; m < lb.div.rows(); ++m) b(p0 + m, gi[j]) += sg[j] * lb.div(m, j);
    }
    pmass.block(p0, p0, lb.pmass.rows(), lb.pmass.cols()) = lb.pmass;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw SingularMassMatrix("velocity Gram matrix");
  const Eigen::MatrixXd schur = b * llt.solve(b.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (schur + schur.transpose()), pmass);
  if (eig.info() != Eigen::Success) throw SolveFailure("inf-sup eigenproblem");
  return std::sqrt(std::max(0.0, eig.eigenvalues().minCoeff()));
}

}  // namespace polymixed
