#include "polymixed/localspace.hpp"

#include <cmath>
#include <cstdlib>
#include <exception>
#include <numbers>

#include "polymixed/quadrature.hpp"

namespace polymixed {

int default_quad_degree(int k) {
  if (const char* env = std::getenv("POLYMIXED_QUAD_DEGREE")) {
    char* end = nullptr;
    const long d = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || d < 0 || d > kMaxQuadDegree) {
      throw UnsupportedDegree(std::string("POLYMIXED_QUAD_DEGREE='") + env + "' is not an integer in [0, 14]");
    }
    return static_cast<int>(d);
  }
  return std::min(2 * k + 3, kMaxQuadDegree);
}

// ---------------------------------------------------------------------------
// Frame

namespace {

std::vector<Vec3> frame_candidates(int dim) {
  std::vector<Vec3> c;
  if (dim == 2) {
    for (int j = 0; j < 180; ++j) {
      const double t = j * std::numbers::pi / 180.0;
      c.emplace_back(std::cos(t), std::sin(t), 0.0);
    }
    return c;
  }
  c = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  for (const Vec3& d : {Vec3(1, 1, 0), Vec3(1, -1, 0), Vec3(1, 0, 1), Vec3(1, 0, -1), Vec3(0, 1, 1), Vec3(0, 1, -1),
                        Vec3(1, 1, 1), Vec3(1, 1, -1), Vec3(1, -1, 1), Vec3(1, -1, -1)})
    c.push_back(d.normalized());
  // Fibonacci points on the upper hemisphere
  const int m = 400;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < m; ++i) {
    const double z = 1.0 - (i + 0.5) / m;
    const double r = std::sqrt(1.0 - z * z);
    c.emplace_back(r * std::cos(golden * i), r * std::sin(golden * i), z);
  }
  return c;
}

}  // namespace

Frame choose_frame(const CellSubdivision& sub) {
  static const std::vector<Vec3> cand2 = frame_candidates(2);
  static const std::vector<Vec3> cand3 = frame_candidates(3);
  const auto& cand = sub.dim == 2 ? cand2 : cand3;

  Vec3 best = cand.front();
  double best_margin = -1.0;
  for (const Vec3& n1 : cand) {
    double margin = 1.0;
    for (const auto& f : sub.internal_faces) margin = std::min(margin, std::abs(n1.dot(f.normal)));
    if (margin > best_margin) {
      best_margin = margin;
      best = n1;
    }
  }
  if (best_margin < kFrameMargin) {
    throw FrameNotFound("cell " + std::to_string(sub.cell) + ": no frame direction with margin " +
                        std::to_string(kFrameMargin));
  }
  Frame f;
  f.n1 = best;
  f.margin = best_margin;
  if (sub.dim == 2) {
    f.n2 = Vec3(-best.y(), best.x(), 0.0);
    f.n3 = Vec3::UnitZ();
  } else {
    // complete with the coordinate axis least aligned with n1
    int axis = 0;
    for (int c = 1; c < 3; ++c)
      if (std::abs(best[c]) < std::abs(best[axis])) axis = c;
    Vec3 e = Vec3::Unit(axis);
    f.n2 = (e - e.dot(best) * best).normalized();
    f.n3 = best.cross(f.n2);
  }
  return f;
}

// ---------------------------------------------------------------------------
// RT_k on a simplex

RaviartThomasPiece::RaviartThomasPiece(int dim, int k)
    : dim_(dim), k_(k), pk_(dim, k), hom_(MonomialSet::homogeneous(dim, k)) {
  if (k < 0 || pk_.size() > 64) throw UnsupportedDegree("RaviartThomasPiece: order out of range");
  size_ = static_cast<int>(dim * pk_.size() + hom_.size());
}

void RaviartThomasPiece::eval(const Vec3& xi, Eigen::Matrix<double, 3, Eigen::Dynamic>& values,
                              Eigen::VectorXd& div) const {
  const int np = static_cast<int>(pk_.size());
  const int nh = static_cast<int>(hom_.size());
  values.setZero(3, size_);
  div.resize(size_);
  std::array<double, 64> mono{}, dmono{};
  pk_.eval(xi, mono);
  for (int c = 0; c < dim_; ++c) {
    pk_.eval_partial(xi, c, dmono);
    for (int m = 0; m < np; ++m) {
      values(c, c * np + m) = mono[m];
      div[c * np + m] = dmono[m];
    }
  }
  std::array<double, 64> hv{};
  hom_.eval(xi, hv);
  for (int h = 0; h < nh; ++h) {
    const int col = dim_ * np + h;
    for (int c = 0; c < dim_; ++c) values(c, col) = xi[c] * hv[h];
    div[col] = (dim_ + k_) * hv[h];
  }
}

// ---------------------------------------------------------------------------
// LocalVelocitySpace

std::size_t local_dimension_count(int dim, int k, int n_simplices) {
  const std::size_t n = n_simplices;
  const std::size_t kk = k;
  return dim == 2 ? n * (kk + 1) * (kk + 3) : n * (kk + 1) * (kk + 2) * (kk + 4) / 2;
}

int LocalVelocitySpace::num_basis() const {
  int n = 0;
  for (const auto& r : rows)
    if (r.kind != DofKind::jump_moment && r.kind != DofKind::divergence_match) ++n;
  return n;
}

Vec3 LocalVelocitySpace::value(const Eigen::VectorXd& coeffs, int simplex, const Vec3& x) const {
  Eigen::Matrix<double, 3, Eigen::Dynamic> vals;
  Eigen::VectorXd div;
  rt.eval(scaling.to_local(x), vals, div);
  return vals * coeffs.segment(simplex * rt.size(), rt.size());
}

double LocalVelocitySpace::divergence(const Eigen::VectorXd& coeffs, int simplex, const Vec3& x) const {
  Eigen::Matrix<double, 3, Eigen::Dynamic> vals;
  Eigen::VectorXd div;
  rt.eval(scaling.to_local(x), vals, div);
  return div.dot(coeffs.segment(simplex * rt.size(), rt.size())) / scaling.scale;
}

void LocalVelocitySpace::basis_values(int simplex, const Vec3& x, Eigen::Matrix<double, 3, Eigen::Dynamic>& values,
                                      Eigen::VectorXd& div) const {
  Eigen::Matrix<double, 3, Eigen::Dynamic> vals;
  Eigen::VectorXd d;
  rt.eval(scaling.to_local(x), vals, d);
  const auto block = basis.middleRows(simplex * rt.size(), rt.size());
  values = vals * block;
  div = block.transpose() * d / scaling.scale;
}

namespace {

// Visits every quadrature point of the moment rows (boundary, frame and, if
// requested, internal-face jump rows). The callback receives the first row of
// the block, the scaled test values, the simplex the field is taken from,
// the point, the direction the field is dotted with, and a sign.
template <class Visit>
void for_each_moment_point(const LocalVelocitySpace& s, int degree, bool with_jumps, Visit&& visit) {
  const int d = s.dim;
  const int k = s.k;
  const auto& sub = s.sub;
  const FaceTestBasis face_tests(d - 1, k);
  const MonomialSet cell_tests(d, k - 1);
  const QuadRule& face_rule = simplex_rule(d - 1, degree);
  const QuadRule& cell_rule = simplex_rule(d, degree);
  const int nft = static_cast<int>(face_tests.size());
  const int nct = static_cast<int>(cell_tests.size());

  Eigen::VectorXd t(std::max(nft, std::max(nct, 1)));
  int row = 0;

  for (const auto& p : sub.boundary_pieces) {
    const double jac = p.measure * (d == 2 ? 1.0 : 2.0);
    for (std::size_t q = 0; q < face_rule.size(); ++q) {
      face_tests.eval(face_rule.points[q], std::span<double>(t.data(), nft));
      const Vec3 x = map_barycentric(p.coords(), face_rule.points[q]);
      visit(row, t.head(nft) * (face_rule.weights[q] * jac / p.measure), p.simplex, x, p.normal, 1.0);
    }
    row += nft;
  }

  if (nct > 0) {
    const std::array<Vec3, 3> dirs{s.frame.n1, s.frame.n2, s.frame.n3};
    const double cell_jac = (d == 2 ? 2.0 : 6.0);
    // n1 moments over the whole cell
    for (int i = 0; i < sub.size(); ++i) {
      const auto& sx = sub.simplices[i];
      for (std::size_t q = 0; q < cell_rule.size(); ++q) {
        const Vec3 x = map_barycentric(sx.coords(), cell_rule.points[q]);
        cell_tests.eval(s.scaling.to_local(x), std::span<double>(t.data(), nct));
        visit(row, s.test_transform[0] * t.head(nct) * (cell_rule.weights[q] * cell_jac * sx.measure / sub.measure),
              i, x, dirs[0], 1.0);
      }
    }
    row += nct;
    // n2 (and n3) moments per simplex
    for (int dir = 1; dir < d; ++dir) {
      for (int i = 0; i < sub.size(); ++i) {
        const auto& sx = sub.simplices[i];
        for (std::size_t q = 0; q < cell_rule.size(); ++q) {
          const Vec3 x = map_barycentric(sx.coords(), cell_rule.points[q]);
          cell_tests.eval(s.scaling.to_local(x), std::span<double>(t.data(), nct));
          visit(row, s.test_transform[i + 1] * t.head(nct) * (cell_rule.weights[q] * cell_jac), i, x, dirs[dir], 1.0);
        }
        row += nct;
      }
    }
  }

  if (!with_jumps) return;
  for (const auto& f : sub.internal_faces) {
    const double jac = f.measure * (d == 2 ? 1.0 : 2.0);
    for (std::size_t q = 0; q < face_rule.size(); ++q) {
      face_tests.eval(face_rule.points[q], std::span<double>(t.data(), nft));
      const Vec3 x = map_barycentric(f.coords(), face_rule.points[q]);
      const Eigen::VectorXd w = t.head(nft) * (face_rule.weights[q] * jac / f.measure);
      visit(row, w, f.simplex, x, f.normal, 1.0);
      visit(row, w, f.neighbor, x, f.normal, -1.0);
    }
    row += nft;
  }
}

std::vector<Eigen::MatrixXd> orthonormal_tests(const AffineScaling& scaling, const CellSubdivision& sub, int degree,
                                               int quad_degree) {
  if (degree < 0) return {};
  const int d = sub.dim;
  const MonomialSet tests(d, degree);
  const int nt = static_cast<int>(tests.size());
  const QuadRule& rule = simplex_rule(d, quad_degree);
  const double cell_jac = (d == 2 ? 2.0 : 6.0);
  std::vector<Eigen::MatrixXd> grams(sub.size() + 1, Eigen::MatrixXd::Zero(nt, nt));
  Eigen::VectorXd t(nt);
  for (int i = 0; i < sub.size(); ++i) {
    const auto& sx = sub.simplices[i];
    for (std::size_t q = 0; q < rule.size(); ++q) {
      tests.eval(scaling.to_local(map_barycentric(sx.coords(), rule.points[q])), std::span<double>(t.data(), nt));
      const Eigen::MatrixXd tt = (rule.weights[q] * cell_jac) * t * t.transpose();
      grams[i + 1] += tt;
      grams[0] += (sx.measure / sub.measure) * tt;
    }
  }
  std::vector<Eigen::MatrixXd> out;
  for (const auto& g : grams) {
    const Eigen::LLT<Eigen::MatrixXd> chol(g);
    out.push_back(chol.matrixL().solve(Eigen::MatrixXd::Identity(nt, nt)));
  }
  return out;
}

}  // namespace

Eigen::VectorXd LocalVelocitySpace::dof_values(const PiecewiseVectorField& v, int degree) const {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Index>(rows.size()));
  for_each_moment_point(*this, degree, false,
                        [&](int row, const Eigen::VectorXd& tests, int simplex, const Vec3& x, const Vec3& dir, double sign) {
                          rhs.segment(row, tests.size()) += (sign * v(simplex, x).dot(dir)) * tests;
                        });
  return rhs;
}

Eigen::VectorXd LocalVelocitySpace::interpolate(const VectorField& v, int degree) const {
  if (!factored) throw Error("interpolate: local space is not factored");
  return lu.solve(dof_values([&v](int, const Vec3& x) { return v(x); }, degree));
}

LocalVelocitySpace build_dof_matrix(const CellSubdivision& sub, int k, const Frame& frame, int quad_degree) {
  LocalVelocitySpace s;
  s.cell = sub.cell;
  s.dim = sub.dim;
  s.k = k;
  s.quad_degree = quad_degree;
  s.sub = sub;
  s.scaling = bounding_box_scaling(sub.cell_points(), sub.dim);
  s.frame = frame;
  s.rt = RaviartThomasPiece(sub.dim, k);

  const int d = sub.dim;
  const int n = sub.size();
  const int nft = static_cast<int>(dim_pk(d - 1, k));
  const int nct = static_cast<int>(dim_pk(d, k - 1));
  const int npk = static_cast<int>(dim_pk(d, k));

  for (int b = 0; b < static_cast<int>(sub.boundary_pieces.size()); ++b)
    for (int t = 0; t < nft; ++t) s.rows.push_back({DofKind::boundary_moment, b, t});
  for (int t = 0; t < nct; ++t) s.rows.push_back({DofKind::n1_moment, -1, t});
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < nct; ++t) s.rows.push_back({DofKind::n2_moment, i, t});
  if (d == 3)
    for (int i = 0; i < n; ++i)
      for (int t = 0; t < nct; ++t) s.rows.push_back({DofKind::n3_moment, i, t});
  for (int f = 0; f < static_cast<int>(sub.internal_faces.size()); ++f)
    for (int t = 0; t < nft; ++t) s.rows.push_back({DofKind::jump_moment, f, t});
  for (int i = 1; i < n; ++i)
    for (int t = 0; t < npk; ++t) s.rows.push_back({DofKind::divergence_match, i, t});

  const int ncols = s.num_coeffs();
  if (static_cast<int>(s.rows.size()) != ncols ||
      static_cast<std::size_t>(ncols) != local_dimension_count(d, k, n)) {
    throw DimensionMismatch("cell " + std::to_string(sub.cell) + ": DOF system has " + std::to_string(s.rows.size()) +
                            " rows for " + std::to_string(ncols) + " coefficients");
  }

  s.test_transform = orthonormal_tests(s.scaling, sub, k - 1, quad_degree);

  const int N = s.rt.size();
  Eigen::MatrixXd& A = s.dof_matrix;
  A.setZero(ncols, ncols);
  Eigen::Matrix<double, 3, Eigen::Dynamic> vals;
  Eigen::VectorXd div;
  for_each_moment_point(s, quad_degree, true,
                        [&](int row, const Eigen::VectorXd& tests, int simplex, const Vec3& x, const Vec3& dir, double sign) {
                          s.rt.eval(s.scaling.to_local(x), vals, div);
                          A.block(row, simplex * N, tests.size(), N).noalias() +=
                              sign * tests * (dir.transpose() * vals);
                        });

  // divergence of every piece matches that of the first, tested on T_1
  const int div_row0 = ncols - (n - 1) * npk;
  const MonomialSet pk(d, k);
  const QuadRule& rule = simplex_rule(d, quad_degree);
  const auto& t1 = sub.simplices[0];
  const double cell_jac = (d == 2 ? 2.0 : 6.0);
  Eigen::VectorXd p(npk);
  // test functions orthonormal on T_1
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(npk, npk);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    pk.eval(s.scaling.to_local(map_barycentric(t1.coords(), rule.points[q])), std::span<double>(p.data(), npk));
    gram.noalias() += (rule.weights[q] * cell_jac) * p * p.transpose();
  }
  const Eigen::LLT<Eigen::MatrixXd> chol(gram);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Vec3 xi = s.scaling.to_local(map_barycentric(t1.coords(), rule.points[q]));
    pk.eval(xi, std::span<double>(p.data(), npk));
    s.rt.eval(xi, vals, div);
    const Eigen::VectorXd ortho = chol.matrixL().solve(p);
    const Eigen::MatrixXd contrib = (rule.weights[q] * cell_jac) * ortho * div.transpose();
    for (int i = 1; i < n; ++i) {
      const int row = div_row0 + (i - 1) * npk;
      A.block(row, i * N, npk, N) += contrib;
      A.block(row, 0, npk, N) -= contrib;
    }
  }
  return s;
}

void factorize(LocalVelocitySpace& s) {
  const auto& A = s.dof_matrix;
  s.lu.compute(A);
  const double scale = A.cwiseAbs().maxCoeff();
  const double pivot = s.lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(pivot >= 1e-13 * scale)) {
    throw SingularDofMatrix(s.cell, "DOF matrix is singular (pivot " + std::to_string(pivot) + ")");
  }
  s.rcond = s.lu.rcond();
  const int nb = s.num_basis();
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(A.rows(), nb);
  // defining rows come first
  rhs.topRows(nb).setIdentity();
  s.basis = s.lu.solve(rhs);
  s.factored = true;
}

LocalVelocitySpace make_local_space(const CellSubdivision& sub, int k) {
  LocalVelocitySpace s = build_dof_matrix(sub, k, choose_frame(sub), default_quad_degree(k));
  factorize(s);
  return s;
}

std::vector<LocalVelocitySpace> build_local_spaces_serial(const std::vector<CellSubdivision>& subs, int k) {
  std::vector<LocalVelocitySpace> spaces(subs.size());
  for (std::size_t c = 0; c < subs.size(); ++c) spaces[c] = make_local_space(subs[c], k);
  return spaces;
}

std::vector<LocalVelocitySpace> build_local_spaces(const std::vector<CellSubdivision>& subs, int k) {
  std::vector<LocalVelocitySpace> spaces(subs.size());
  const auto n = static_cast<std::int64_t>(subs.size());
  // exceptions cannot cross the parallel region; keep the first by cell order
  std::vector<std::exception_ptr> errors(subs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t c = 0; c < n; ++c) {
    try {
      spaces[c] = make_local_space(subs[c], k);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return spaces;
}

}  // namespace polymixed
