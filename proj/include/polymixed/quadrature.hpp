#pragma once

#include <array>
#include <cmath>
#include <type_traits>
#include <span>
#include <vector>

#include "polymixed/common.hpp"

namespace polymixed {

inline constexpr int kMaxQuadDegree = 14;

/// Quadrature rule on the reference simplex of dimension 1, 2 or 3.
///
/// Points are stored as barycentric coordinates (dim+1 entries used); the
/// weights sum to the reference measure 1/dim!.
struct QuadRule {
  int dim = 0;
  int degree = 0;
  std::vector<std::array<double, 4>> points;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

/// Rule exact for all polynomials of total degree <= `degree`.
/// Throws UnsupportedDegree outside 1 <= dim <= 3, 0 <= degree <= 14.
const QuadRule& simplex_rule(int dim, int degree);

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre(int npoints, std::vector<double>& nodes, std::vector<double>& weights);

/// Measure of a sub-simplex with `verts.size()` vertices embedded in R^3
/// (length, area or volume).
double simplex_measure(std::span<const Vec3> verts);

/// Affine image of barycentric coordinates.
Vec3 map_barycentric(std::span<const Vec3> verts, const std::array<double, 4>& bary);

/// Sum of w_i |det J| f(x_i) over the physical simplex `verts`.
///
/// Throws DegenerateSimplex if the simplex measure is below 1e-14 times
/// the natural scale (longest edge to the power of the simplex dimension).
template <class F>
auto integrate(F&& f, std::span<const Vec3> verts, const QuadRule& rule) {
  if (static_cast<int>(verts.size()) != rule.dim + 1) {
    throw DimensionMismatch("integrate: rule dimension does not match simplex");
  }
  const double meas = simplex_measure(verts);
  double edge = 0.0;
  for (std::size_t a = 0; a < verts.size(); ++a)
    for (std::size_t b = a + 1; b < verts.size(); ++b) edge = std::max(edge, (verts[a] - verts[b]).norm());
  if (meas < 1e-14 * std::pow(edge, rule.dim)) throw DegenerateSimplex("integrate: degenerate simplex");

  double ref = 1.0;
  for (int i = 2; i <= rule.dim; ++i) ref /= i;
  const double jac = meas / ref;

  using Result = std::decay_t<decltype(f(verts[0]))>;
  Result acc = rule.weights[0] * jac * f(map_barycentric(verts, rule.points[0]));
  for (std::size_t q = 1; q < rule.size(); ++q) {
    acc += rule.weights[q] * jac * f(map_barycentric(verts, rule.points[q]));
  }
  return acc;
}

}  // namespace polymixed
