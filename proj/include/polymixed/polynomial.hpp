#pragma once

#include <array>
#include <span>
#include <vector>

#include "polymixed/common.hpp"

namespace polymixed {

/// dim P_k in `dim` variables; zero for k < 0.
std::size_t dim_pk(int dim, int k);

/// dim of homogeneous polynomials of degree k in `dim` variables.
std::size_t dim_homogeneous(int dim, int k);

/// Monomials x^a y^b z^c, ordered by total degree, then lexicographically.
class MonomialSet {
 public:
  MonomialSet() = default;
  /// All monomials with total degree <= degree (empty if degree < 0).
  MonomialSet(int dim, int degree);
  /// Monomials with total degree == degree.
  static MonomialSet homogeneous(int dim, int degree);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  std::size_t size() const { return exps_.size(); }
  const std::vector<std::array<int, 3>>& exponents() const { return exps_; }

  void eval(const Vec3& x, std::span<double> out) const;
  /// Partial derivative with respect to coordinate `axis`.
  void eval_partial(const Vec3& x, int axis, std::span<double> out) const;

 private:
  void powers(const Vec3& x, std::array<std::array<double, 16>, 3>& pw) const;

  int dim_ = 0;
  int degree_ = -1;
  std::vector<std::array<int, 3>> exps_;
};

/// Affine change of variables xi = (x - center) / scale.
struct AffineScaling {
  Vec3 center = Vec3::Zero();
  double scale = 1.0;

  Vec3 to_local(const Vec3& x) const { return (x - center) / scale; }
};

/// Centered at the bounding-box midpoint, scaled by the half-width of the
/// bounding box (largest extent over the first `dim` coordinates).
AffineScaling bounding_box_scaling(std::span<const Vec3> points, int dim);

/// P_k on a cell or simplex in scaled monomials.
class ScaledPolynomialBasis {
 public:
  ScaledPolynomialBasis() = default;
  ScaledPolynomialBasis(int dim, int k, AffineScaling scaling) : monomials_(dim, k), scaling_(scaling) {}

  std::size_t size() const { return monomials_.size(); }
  int dim() const { return monomials_.dim(); }
  int degree() const { return monomials_.degree(); }
  const AffineScaling& scaling() const { return scaling_; }

  void eval(const Vec3& x, std::span<double> out) const { monomials_.eval(scaling_.to_local(x), out); }
  Eigen::VectorXd eval(const Vec3& x) const;
  /// Physical gradient, one column per basis member (3 x size).
  Eigen::Matrix<double, 3, Eigen::Dynamic> gradient(const Vec3& x) const;

 private:
  MonomialSet monomials_;
  AffineScaling scaling_;
};

/// pk_basis over the convex hull of `vertices`.
ScaledPolynomialBasis pk_basis(std::span<const Vec3> vertices, int dim, int k);

/// P_k on a face simplex (segment or triangle) written in centered
/// barycentric variables of the face's vertices in a fixed order, so two
/// cells sharing the face produce the same test functions.
class FaceTestBasis {
 public:
  FaceTestBasis() = default;
  FaceTestBasis(int face_dim, int k) : monomials_(face_dim, k) {}

  std::size_t size() const { return monomials_.size(); }
  /// `bary` holds the face_dim+1 barycentric coordinates.
  void eval(const std::array<double, 4>& bary, std::span<double> out) const;

 private:
  MonomialSet monomials_;
};

}  // namespace polymixed
