#pragma once

#include <vector>

#include "polymixed/localspace.hpp"

namespace polymixed {

/// Per-cell piecewise RT_k coefficients of the interpolant.
struct ProjectedVelocity {
  std::vector<Eigen::VectorXd> coeffs;
};

/// Per-cell P_k coefficients of the elementwise L2 projection.
struct ProjectedScalar {
  std::vector<ScaledPolynomialBasis> bases;
  std::vector<Eigen::VectorXd> coeffs;

  double value(Index cell, const Vec3& x) const { return bases[cell].eval(x).dot(coeffs[cell]); }
};

/// Cell-by-cell interpolation through the factored DOF systems.
ProjectedVelocity project_velocity(const VectorField& v, const std::vector<LocalVelocitySpace>& spaces);
ProjectedVelocity project_velocity_serial(const VectorField& v, const std::vector<LocalVelocitySpace>& spaces);

/// P_k basis of a cell, scaled like its velocity space.
ScaledPolynomialBasis cell_pk_basis(const LocalVelocitySpace& space);

/// Mass matrix of `basis` over the simplices of a cell (Cholesky-ready).
Eigen::MatrixXd cell_mass_matrix(const CellSubdivision& sub, const ScaledPolynomialBasis& basis, int degree);

/// Elementwise L2 projection onto P_k; throws SingularMassMatrix.
ProjectedScalar project_scalar(const ScalarField& w, const std::vector<LocalVelocitySpace>& spaces);
ProjectedScalar project_scalar(const ScalarField& w, const std::vector<CellSubdivision>& subs, int k);

/// max over the P_k basis p of |(div(v - Pi v), p)_T| divided by
/// ||p||_T (||div v||_T + ||v||_T / s), s the cell scale.
double commuting_defect(const VectorField& v, const ScalarField& div_v, const LocalVelocitySpace& space);

/// Largest normal-moment jump of a broken field across inter-cell face
/// pieces, relative to the largest moment magnitude (0 for a zero field).
double interelement_jump(const std::vector<LocalVelocitySpace>& spaces, const std::vector<Eigen::VectorXd>& coeffs);

}  // namespace polymixed
