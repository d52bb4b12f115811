#include "polymixed/polynomial.hpp"

#include <algorithm>

namespace polymixed {

std::size_t dim_pk(int dim, int k) {
  if (k < 0) return 0;
  switch (dim) {
    case 1: return k + 1;
    case 2: return (k + 1) * (k + 2) / 2;
    case 3: return (k + 1) * (k + 2) * (k + 3) / 6;
    default: throw DimensionMismatch("dim_pk: dim must be 1, 2 or 3");
  }
}

std::size_t dim_homogeneous(int dim, int k) {
  if (k < 0) return 0;
  return dim_pk(dim, k) - dim_pk(dim, k - 1);
}

namespace {

void append_degree(int dim, int d, std::vector<std::array<int, 3>>& exps) {
  if (dim == 1) {
    exps.push_back({d, 0, 0});
  } else if (dim == 2) {
    for (int a = d; a >= 0; --a) exps.push_back({a, d - a, 0});
  } else {
    for (int a = d; a >= 0; --a)
      for (int b = d - a; b >= 0; --b) exps.push_back({a, b, d - a - b});
  }
}

}  // namespace

MonomialSet::MonomialSet(int dim, int degree) : dim_(dim), degree_(degree) {
  if (dim < 1 || dim > 3) throw DimensionMismatch("MonomialSet: dim must be 1, 2 or 3");
  if (degree > 15) throw UnsupportedDegree("MonomialSet: degree above 15");
  for (int d = 0; d <= degree; ++d) append_degree(dim, d, exps_);
}

MonomialSet MonomialSet::homogeneous(int dim, int degree) {
  MonomialSet s;
  s.dim_ = dim;
  s.degree_ = degree;
  if (degree >= 0) append_degree(dim, degree, s.exps_);
  return s;
}

void MonomialSet::powers(const Vec3& x, std::array<std::array<double, 16>, 3>& pw) const {
  for (int c = 0; c < dim_; ++c) {
    pw[c][0] = 1.0;
    for (int p = 1; p <= std::max(degree_, 0); ++p) pw[c][p] = pw[c][p - 1] * x[c];
  }
}

void MonomialSet::eval(const Vec3& x, std::span<double> out) const {
  std::array<std::array<double, 16>, 3> pw;
  powers(x, pw);
  for (std::size_t m = 0; m < exps_.size(); ++m) {
    double v = 1.0;
    for (int c = 0; c < dim_; ++c) v *= pw[c][exps_[m][c]];
    out[m] = v;
  }
}

void MonomialSet::eval_partial(const Vec3& x, int axis, std::span<double> out) const {
  std::array<std::array<double, 16>, 3> pw;
  powers(x, pw);
  for (std::size_t m = 0; m < exps_.size(); ++m) {
    const int e = exps_[m][axis];
    if (e == 0) {
      out[m] = 0.0;
      continue;
    }
    double v = e;
    for (int c = 0; c < dim_; ++c) v *= pw[c][c == axis ? e - 1 : exps_[m][c]];
    out[m] = v;
  }
}

AffineScaling bounding_box_scaling(std::span<const Vec3> points, int dim) {
  Vec3 lo = points[0], hi = points[0];
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  AffineScaling s;
  s.center = 0.5 * (lo + hi);
  double w = 0.0;
  for (int c = 0; c < dim; ++c) w = std::max(w, hi[c] - lo[c]);
  s.scale = 0.5 * w;
  if (dim < 3) s.center[2] = 0.0;
  return s;
}

Eigen::VectorXd ScaledPolynomialBasis::eval(const Vec3& x) const {
  Eigen::VectorXd v(size());
  eval(x, std::span<double>(v.data(), size()));
  return v;
}

Eigen::Matrix<double, 3, Eigen::Dynamic> ScaledPolynomialBasis::gradient(const Vec3& x) const {
  Eigen::Matrix<double, 3, Eigen::Dynamic> g = Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, size());
  const Vec3 xi = scaling_.to_local(x);
  Eigen::VectorXd tmp(size());
  for (int c = 0; c < dim(); ++c) {
    monomials_.eval_partial(xi, c, std::span<double>(tmp.data(), size()));
    g.row(c) = tmp.transpose() / scaling_.scale;
  }
  return g;
}

ScaledPolynomialBasis pk_basis(std::span<const Vec3> vertices, int dim, int k) {
  return ScaledPolynomialBasis(dim, k, bounding_box_scaling(vertices, dim));
}

void FaceTestBasis::eval(const std::array<double, 4>& bary, std::span<double> out) const {
  const int fd = monomials_.dim();
  Vec3 t = Vec3::Zero();
  for (int c = 0; c < fd; ++c) t[c] = (fd + 1) * bary[c + 1] - 1.0;
  monomials_.eval(t, out);
}

}  // namespace polymixed
