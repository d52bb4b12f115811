#include "polymixed/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace polymixed {

void gauss_legendre(int npoints, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(npoints, 0.0);
  weights.assign(npoints, 0.0);
  // Legendre P_n and its derivative by the three-term recurrence.
  const auto legendre = [npoints](double z, double& dp) {
    double p1 = 1.0, p2 = 0.0;
    for (int j = 1; j <= npoints; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
    }
    dp = npoints * (z * p1 - p2) / (z * z - 1.0);
    return p1;
  };
  for (int i = 0; i < npoints; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (npoints + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double dz = legendre(z, dp) / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    legendre(z, dp);
    nodes[i] = 0.5 * (1.0 - z);
    weights[i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
}

namespace {

QuadRule centroid_rule(int dim, int degree) {
  QuadRule r;
  r.dim = dim;
  r.degree = degree;
  std::array<double, 4> p{0, 0, 0, 0};
  for (int i = 0; i <= dim; ++i) p[i] = 1.0 / (dim + 1);
  r.points.push_back(p);
  double w = 1.0;
  for (int i = 2; i <= dim; ++i) w /= i;
  r.weights.push_back(w);
  return r;
}

// Conical product rule: Duffy collapse of the cube onto the simplex with the
// Jacobian folded into higher Gauss-Legendre point counts.
QuadRule collapsed_rule(int dim, int degree) {
  if (degree <= 1) return centroid_rule(dim, degree);
  QuadRule r;
  r.dim = dim;
  r.degree = degree;
  std::vector<double> xu, wu, xv, wv, xw, ww;
  if (dim == 1) {
    gauss_legendre((degree + 2) / 2, xu, wu);
    for (std::size_t i = 0; i < xu.size(); ++i) {
      r.points.push_back({1.0 - xu[i], xu[i], 0.0, 0.0});
      r.weights.push_back(wu[i]);
    }
  } else if (dim == 2) {
    gauss_legendre((degree + 3) / 2, xu, wu);
    gauss_legendre((degree + 2) / 2, xv, wv);
    for (std::size_t i = 0; i < xu.size(); ++i)
      for (std::size_t j = 0; j < xv.size(); ++j) {
        const double x = xu[i];
        const double y = xv[j] * (1.0 - x);
        r.points.push_back({1.0 - x - y, x, y, 0.0});
        r.weights.push_back(wu[i] * wv[j] * (1.0 - x));
      }
  } else {
    gauss_legendre((degree + 4) / 2, xu, wu);
    gauss_legendre((degree + 3) / 2, xv, wv);
    gauss_legendre((degree + 2) / 2, xw, ww);
    for (std::size_t i = 0; i < xu.size(); ++i)
      for (std::size_t j = 0; j < xv.size(); ++j)
        for (std::size_t l = 0; l < xw.size(); ++l) {
          const double x = xu[i];
          const double y = xv[j] * (1.0 - x);
          const double z = xw[l] * (1.0 - x) * (1.0 - xv[j]);
          r.points.push_back({1.0 - x - y - z, x, y, z});
          r.weights.push_back(wu[i] * wv[j] * ww[l] * (1.0 - x) * (1.0 - x) * (1.0 - xv[j]));
        }
  }
  return r;
}

struct RuleTable {
  std::array<std::array<QuadRule, kMaxQuadDegree + 1>, 3> rules;
  RuleTable() {
    for (int d = 1; d <= 3; ++d)
      for (int p = 0; p <= kMaxQuadDegree; ++p) rules[d - 1][p] = collapsed_rule(d, p);
  }
};

}  // namespace

const QuadRule& simplex_rule(int dim, int degree) {
  if (dim < 1 || dim > 3 || degree < 0 || degree > kMaxQuadDegree) {
    throw UnsupportedDegree("simplex_rule: dim " + std::to_string(dim) + ", degree " + std::to_string(degree));
  }
  static const RuleTable table;
  return table.rules[dim - 1][degree];
}

double simplex_measure(std::span<const Vec3> verts) {
  switch (verts.size()) {
    case 2:
      return (verts[1] - verts[0]).norm();
    case 3:
      return 0.5 * (verts[1] - verts[0]).cross(verts[2] - verts[0]).norm();
    case 4:
      return std::abs((verts[1] - verts[0]).dot((verts[2] - verts[0]).cross(verts[3] - verts[0]))) / 6.0;
    default:
      throw DimensionMismatch("simplex_measure: expected 2, 3 or 4 vertices");
  }
}

Vec3 map_barycentric(std::span<const Vec3> verts, const std::array<double, 4>& bary) {
  Vec3 x = Vec3::Zero();
  for (std::size_t i = 0; i < verts.size(); ++i) x += bary[i] * verts[i];
  return x;
}

}  // namespace polymixed
