#pragma once

#include <Eigen/Sparse>
#include <map>
#include <string>
#include <vector>

#include "polymixed/localspace.hpp"

namespace polymixed {

/// Global numbering of velocity and pressure unknowns.
///
/// Face-piece moment blocks come first, ordered by sorted vertex key, then
/// the interior blocks of each cell, then dim P_k pressure unknowns per cell.
/// A face block is oriented by the lower-numbered incident cell; the other
/// cell sees it with sign -1.
struct GlobalDofMap {
  int dim = 2;
  int k = 0;
  Index num_face_pieces = 0;
  Index num_interior_face_pieces = 0;
  Index num_face_dofs = 0;
  Index num_velocity = 0;
  Index num_pressure = 0;
  /// Per cell, per local basis column: global velocity index and sign.
  std::vector<std::vector<Index>> velocity;
  std::vector<std::vector<double>> sign;
  /// First pressure unknown of each cell, counted from 0 within the pressure block.
  std::vector<Index> pressure_offset;
  std::map<std::vector<Index>, Index> face_offset;

  Index num_unknowns() const { return num_velocity + num_pressure; }
  Index pressure_size(Index cell) const;
};

/// Throws FaceMismatch if a face piece is shared by more than two cells or
/// a cell's boundary piece appears on an interior polytope face unmatched.
GlobalDofMap build_dof_map(const PolytopalMesh& mesh, const std::vector<LocalVelocitySpace>& spaces);

/// Exact data for a q + grad u = 0, div q = f, u = -g on the boundary.
struct ManufacturedCase {
  std::string name;
  int dim = 2;
  Eigen::Matrix3d a = Eigen::Matrix3d::Identity();
  ScalarField u;
  VectorField grad_u;
  std::function<Eigen::Matrix3d(const Vec3&)> hess_u;

  Vec3 q(const Vec3& x) const;
  /// div q = -tr(a^{-1} hess u) for constant a.
  double f(const Vec3& x) const;
  double g(const Vec3& x) const { return -u(x); }
};

/// "trig2d", "poly3d", "constant" or "linear"; throws UnknownCase.
ManufacturedCase manufactured_case(const std::string& name, int dim);

/// [[M, B^T], [B, 0]] acting on (q, -u), right-hand side [G; F].
struct MixedSystem {
  Index num_velocity = 0;
  Index num_pressure = 0;
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
};

/// Per-cell blocks before the global gather.
struct LocalBlocks {
  Eigen::MatrixXd mass;
  Eigen::MatrixXd div;  // pressure x velocity
  Eigen::MatrixXd divdiv;
  Eigen::MatrixXd pmass;
  Eigen::VectorXd g;
  Eigen::VectorXd f;
};

LocalBlocks local_blocks(const PolytopalMesh& mesh, const LocalVelocitySpace& space, const ManufacturedCase& mc);

/// Cell blocks computed in parallel, gathered in cell order.
MixedSystem assemble(const PolytopalMesh& mesh, const std::vector<LocalVelocitySpace>& spaces,
                     const GlobalDofMap& dofs, const ManufacturedCase& mc);
MixedSystem assemble_serial(const PolytopalMesh& mesh, const std::vector<LocalVelocitySpace>& spaces,
                            const GlobalDofMap& dofs, const ManufacturedCase& mc);

struct MixedSolution {
  Eigen::VectorXd q;
  Eigen::VectorXd u;
  double residual = 0.0;
};

inline constexpr Index kDenseSolveLimit = 2000;
inline constexpr double kSolveTolerance = 1e-10;

/// Dense LU below kDenseSolveLimit unknowns, sparse LU above. Throws
/// SolveFailure when the factorization fails or the relative residual
/// exceeds kSolveTolerance.
MixedSolution solve(const MixedSystem& system);

/// Local velocity coefficients (RT pieces) of a global velocity vector.
Eigen::VectorXd cell_velocity(const LocalVelocitySpace& space, const GlobalDofMap& dofs, const Eigen::VectorXd& q);
/// Local P_k coefficients of a global pressure vector.
Eigen::VectorXd cell_pressure(const GlobalDofMap& dofs, Index cell, const Eigen::VectorXd& u);

/// Square root of the smallest generalized eigenvalue of
/// B (M + D)^{-1} B^T against the pressure mass matrix (dense).
double inf_sup_constant(const PolytopalMesh& mesh, const std::vector<LocalVelocitySpace>& spaces,
                        const GlobalDofMap& dofs);

}  // namespace polymixed
