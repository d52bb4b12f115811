#pragma once

#include <functional>
#include <vector>

#include "polymixed/polymesh.hpp"
#include "polymixed/polynomial.hpp"
#include "polymixed/quadrature.hpp"

namespace polymixed {

/// Quadrature degree for products of discrete polynomials: 2k+3 unless the
/// POLYMIXED_QUAD_DEGREE environment variable overrides it.
int default_quad_degree(int k);

/// Quadrature degree for integrals involving non-polynomial data
/// (right-hand sides, interpolation moments, L2 projections).
inline constexpr int kDataQuadDegree = kMaxQuadDegree;

inline constexpr double kFrameMargin = 1e-3;

/// Right-handed orthonormal frame (n3 unused in 2D).
struct Frame {
  Vec3 n1 = Vec3::UnitX();
  Vec3 n2 = Vec3::UnitY();
  Vec3 n3 = Vec3::UnitZ();
  /// min over internal faces of |n1 . n_F|
  double margin = 1.0;
};

/// Picks n1 from a fixed candidate list (coordinate axes first) to maximise
/// the smallest |n1 . n_F| over internal faces. Throws FrameNotFound when the
/// best candidate stays below kFrameMargin.
Frame choose_frame(const CellSubdivision& sub);

/// RT_k on one simplex in scaled monomials xi = (x - c) / s:
/// [P_k]^d followed by xi * (homogeneous degree-k monomials).
class RaviartThomasPiece {
 public:
  RaviartThomasPiece() = default;
  RaviartThomasPiece(int dim, int k);

  int dim() const { return dim_; }
  int order() const { return k_; }
  int size() const { return size_; }

  /// values: 3 x size; div: divergence with respect to xi.
  void eval(const Vec3& xi, Eigen::Matrix<double, 3, Eigen::Dynamic>& values, Eigen::VectorXd& div) const;

 private:
  int dim_ = 2;
  int k_ = 0;
  int size_ = 0;
  MonomialSet pk_;
  MonomialSet hom_;
};

/// Row families of the DOF system, in assembly order.
enum class DofKind { boundary_moment, n1_moment, n2_moment, n3_moment, jump_moment, divergence_match };

struct DofDescriptor {
  DofKind kind;
  /// boundary piece, simplex, or internal-face index depending on kind
  int where;
  int test;
};

using PiecewiseVectorField = std::function<Vec3(int simplex, const Vec3& x)>;
using VectorField = std::function<Vec3(const Vec3& x)>;
using ScalarField = std::function<double(const Vec3& x)>;

/// The composite space on one cell: piecewise RT_k with one-piece divergence
/// and normal continuity across internal faces.
///
/// Coefficient vectors concatenate one RT_k block per simplex (chain order).
/// `basis` holds the dual basis to the boundary-moment and frame-moment rows;
/// its columns are the local velocity DOFs.
struct LocalVelocitySpace {
  Index cell = -1;
  int dim = 2;
  int k = 0;
  int quad_degree = 3;
  CellSubdivision sub;
  AffineScaling scaling;
  Frame frame;
  RaviartThomasPiece rt;
  std::vector<DofDescriptor> rows;
  Eigen::MatrixXd dof_matrix;
  /// Maps P_{k-1} monomials to test functions orthonormal in the averaged
  /// L2 product: entry 0 on the whole cell, entry i + 1 on simplex i.
  std::vector<Eigen::MatrixXd> test_transform;

  bool factored = false;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  double rcond = 0.0;
  Eigen::MatrixXd basis;

  int piece_size() const { return rt.size(); }
  int num_coeffs() const { return sub.size() * rt.size(); }
  /// Rows of kinds boundary_moment .. n3_moment (= dim of the space).
  int num_basis() const;

  Vec3 value(const Eigen::VectorXd& coeffs, int simplex, const Vec3& x) const;
  /// Physical divergence.
  double divergence(const Eigen::VectorXd& coeffs, int simplex, const Vec3& x) const;

  /// Full-length right-hand side: DOF functionals of `v` on the defining
  /// rows, zeros on the jump and divergence-matching rows.
  Eigen::VectorXd dof_values(const PiecewiseVectorField& v, int degree = kDataQuadDegree) const;
  /// Coefficients of the interpolant of `v`.
  Eigen::VectorXd interpolate(const VectorField& v, int degree = kDataQuadDegree) const;
  /// Coefficients of sum_j dofs[j] * basis_j.
  Eigen::VectorXd combine(const Eigen::VectorXd& dofs) const { return basis * dofs; }

  /// Values (3 x num_basis) and physical divergences of all basis members.
  void basis_values(int simplex, const Vec3& x, Eigen::Matrix<double, 3, Eigen::Dynamic>& values,
                    Eigen::VectorXd& div) const;
};

/// Size of the square DOF system on n simplices: n(k+1)(k+3) in 2D,
/// n(k+1)(k+2)(k+4)/2 in 3D.
std::size_t local_dimension_count(int dim, int k, int n_simplices);

LocalVelocitySpace build_dof_matrix(const CellSubdivision& sub, int k, const Frame& frame,
                                    int quad_degree);

/// LU with partial pivoting, dual basis and reciprocal condition number.
/// Throws SingularDofMatrix when a pivot falls below 1e-13 of the matrix scale.
void factorize(LocalVelocitySpace& space);

LocalVelocitySpace make_local_space(const CellSubdivision& sub, int k);

/// One space per cell, OpenMP-parallel over cells.
std::vector<LocalVelocitySpace> build_local_spaces(const std::vector<CellSubdivision>& subs, int k);
/// Serial reference of build_local_spaces.
std::vector<LocalVelocitySpace> build_local_spaces_serial(const std::vector<CellSubdivision>& subs, int k);

}  // namespace polymixed
