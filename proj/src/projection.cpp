#include "polymixed/projection.hpp"

#include <exception>
#include <map>

namespace polymixed {

ProjectedVelocity project_velocity_serial(const VectorField& v, const std::vector<LocalVelocitySpace>& spaces) {
  ProjectedVelocity out;
  out.coeffs.resize(spaces.size());
  for (std::size_t c = 0; c < spaces.size(); ++c) out.coeffs[c] = spaces[c].interpolate(v);
  return out;
}

ProjectedVelocity project_velocity(const VectorField& v, const std::vector<LocalVelocitySpace>& spaces) {
  ProjectedVelocity out;
  out.coeffs.resize(spaces.size());
  const auto n = static_cast<std::int64_t>(spaces.size());
  std::vector<std::exception_ptr> errors(spaces.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t c = 0; c < n; ++c) {
    try {
      out.coeffs[c] = spaces[c].interpolate(v);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

ScaledPolynomialBasis cell_pk_basis(const LocalVelocitySpace& space) {
  return ScaledPolynomialBasis(space.dim, space.k, space.scaling);
}

Eigen::MatrixXd cell_mass_matrix(const CellSubdivision& sub, const ScaledPolynomialBasis& basis, int degree) {
  const auto n = static_cast<Index>(basis.size());
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(n, n);
  const QuadRule& rule = simplex_rule(sub.dim, degree);
  for (const auto& s : sub.simplices)
    mass += integrate(
        [&](const Vec3& x) -> Eigen::MatrixXd {
          const Eigen::VectorXd p = basis.eval(x);
          return p * p.transpose();
        },
        s.coords(), rule);
  return mass;
}

namespace {

Eigen::VectorXd l2_project_cell(const ScalarField& w, const CellSubdivision& sub, const ScaledPolynomialBasis& basis,
                                int k) {
  const Eigen::MatrixXd mass = cell_mass_matrix(sub, basis, std::min(2 * k + 3, kMaxQuadDegree));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Index>(basis.size()));
  const QuadRule& rule = simplex_rule(sub.dim, kDataQuadDegree);
  for (const auto& s : sub.simplices)
    rhs += integrate([&](const Vec3& x) -> Eigen::VectorXd { return w(x) * basis.eval(x); }, s.coords(), rule);
  Eigen::LLT<Eigen::MatrixXd> llt(mass);
  if (llt.info() != Eigen::Success) throw SingularMassMatrix("cell " + std::to_string(sub.cell) + ": P_k mass matrix");
  return llt.solve(rhs);
}

}  // namespace

ProjectedScalar project_scalar(const ScalarField& w, const std::vector<LocalVelocitySpace>& spaces) {
  ProjectedScalar out;
  out.bases.resize(spaces.size());
  out.coeffs.resize(spaces.size());
  for (std::size_t c = 0; c < spaces.size(); ++c) {
    out.bases[c] = cell_pk_basis(spaces[c]);
    out.coeffs[c] = l2_project_cell(w, spaces[c].sub, out.bases[c], spaces[c].k);
  }
  return out;
}

ProjectedScalar project_scalar(const ScalarField& w, const std::vector<CellSubdivision>& subs, int k) {
  ProjectedScalar out;
  out.bases.resize(subs.size());
  out.coeffs.resize(subs.size());
  for (std::size_t c = 0; c < subs.size(); ++c) {
    out.bases[c] = ScaledPolynomialBasis(subs[c].dim, k, bounding_box_scaling(subs[c].cell_points(), subs[c].dim));
    out.coeffs[c] = l2_project_cell(w, subs[c], out.bases[c], k);
  }
  return out;
}

double commuting_defect(const VectorField& v, const ScalarField& div_v, const LocalVelocitySpace& space) {
  const Eigen::VectorXd pi = space.interpolate(v);
  const ScaledPolynomialBasis basis = cell_pk_basis(space);
  const QuadRule& rule = simplex_rule(space.dim, kDataQuadDegree);
  const auto np = static_cast<Index>(basis.size());
  Eigen::VectorXd defect = Eigen::VectorXd::Zero(np), pnorm2 = Eigen::VectorXd::Zero(np);
  double div2 = 0.0, v2 = 0.0;
  for (int i = 0; i < space.sub.size(); ++i) {
    const auto& s = space.sub.simplices[i];
    defect += integrate(
        [&](const Vec3& x) -> Eigen::VectorXd { return (div_v(x) - space.divergence(pi, i, x)) * basis.eval(x); },
        s.coords(), rule);
    pnorm2 += integrate([&](const Vec3& x) -> Eigen::VectorXd { return basis.eval(x).array().square().matrix(); },
                        s.coords(), rule);
    div2 += integrate([&](const Vec3& x) { return div_v(x) * div_v(x); }, s.coords(), rule);
    v2 += integrate([&](const Vec3& x) { return v(x).squaredNorm(); }, s.coords(), rule);
  }
  const double field_scale = std::sqrt(div2) + std::sqrt(v2) / space.scaling.scale;
  if (field_scale == 0.0) return 0.0;
  double worst = 0.0;
  for (Index j = 0; j < np; ++j) worst = std::max(worst, std::abs(defect[j]) / (std::sqrt(pnorm2[j]) * field_scale));
  return worst;
}

double interelement_jump(const std::vector<LocalVelocitySpace>& spaces, const std::vector<Eigen::VectorXd>& coeffs) {
  std::map<std::vector<Index>, std::vector<std::pair<std::size_t, int>>> owners;
  for (std::size_t c = 0; c < spaces.size(); ++c)
    for (int b = 0; b < static_cast<int>(spaces[c].sub.boundary_pieces.size()); ++b)
      owners[spaces[c].sub.boundary_pieces[b].key()].push_back({c, b});

  double worst_jump = 0.0, worst_moment = 0.0;
  for (const auto& [key, who] : owners) {
    if (who.size() != 2) continue;
    const int d = spaces[who[0].first].dim;
    const int k = spaces[who[0].first].k;
    const FaceTestBasis tests(d - 1, k);
    const QuadRule& rule = simplex_rule(d - 1, std::min(2 * k + 3, kMaxQuadDegree));
    const auto nt = static_cast<Index>(tests.size());
    Eigen::VectorXd jump = Eigen::VectorXd::Zero(nt), t(nt);
    for (const auto& [c, b] : who) {
      const auto& sp = spaces[c];
      const auto& piece = sp.sub.boundary_pieces[b];
      const double jac = (d == 2 ? 1.0 : 2.0);
      Eigen::VectorXd m = Eigen::VectorXd::Zero(nt);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        tests.eval(rule.points[q], std::span<double>(t.data(), nt));
        const Vec3 x = map_barycentric(piece.coords(), rule.points[q]);
        m += rule.weights[q] * jac * sp.value(coeffs[c], piece.simplex, x).dot(piece.normal) * t;
      }
      worst_moment = std::max(worst_moment, m.cwiseAbs().maxCoeff());
      jump += m;  // outward normals are opposite, so the sum is the jump
    }
    worst_jump = std::max(worst_jump, jump.cwiseAbs().maxCoeff());
  }
  return worst_moment > 0.0 ? worst_jump / worst_moment : 0.0;
}

}  // namespace polymixed
