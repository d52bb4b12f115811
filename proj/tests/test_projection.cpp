#include <gtest/gtest.h>

#include <cmath>

#include "polymixed/projection.hpp"

using namespace polymixed;

namespace {

const VectorField smooth_v = [](const Vec3& x) {
  return Vec3(std::sin(2 * x[0] + x[1]) * x[2] + x[1] * x[1], std::exp(x[0] - x[1]), std::cos(x[0] * x[2]));
};
const ScalarField smooth_div = [](const Vec3& x) {
  return 2 * std::cos(2 * x[0] + x[1]) * x[2] - std::exp(x[0] - x[1]) - x[0] * std::sin(x[0] * x[2]);
};
const ScalarField smooth_div_2d = [](const Vec3& x) {
  return 2 * std::cos(2 * x[0] + x[1]) * x[2] - std::exp(x[0] - x[1]);
};

}  // namespace

TEST(ProjectScalar, CellAverageForOrderZero) {
  const auto subs = subdivide_all(make_quad_grid(1));
  const ProjectedScalar p = project_scalar([](const Vec3& x) { return x[0] * x[0]; }, subs, 0);
  EXPECT_NEAR(p.value(0, Vec3(0.5, 0.5, 0)), 1.0 / 3, 1e-13);
}

TEST(ProjectScalar, ReproducesPolynomials) {
  for (auto family : {GridFamily::quadhex, GridFamily::wedge}) {
    const auto spaces = build_local_spaces(subdivide_all(make_grid(family, 2)), 2);
    const ScalarField w = [](const Vec3& x) { return 1 + x[0] - 2 * x[1] * x[2] + 3 * x[0] * x[1]; };
    const ProjectedScalar p = project_scalar(w, spaces);
    for (const auto& s : spaces) {
      const Vec3 x = s.sub.simplices[0].points[0] * 0.25 + s.sub.simplices[0].points[1] * 0.75;
      EXPECT_NEAR(p.value(s.cell, x), w(x), 1e-12);
    }
  }
}

TEST(ProjectScalar, OrthogonalToPk) {
  const auto spaces = build_local_spaces(subdivide_all(make_quadhex_grid(1)), 1);
  const ScalarField w = [](const Vec3& x) { return std::exp(x[0]) * std::sin(3 * x[1]); };
  const ProjectedScalar p = project_scalar(w, spaces);
  const QuadRule& rule = simplex_rule(2, kDataQuadDegree);
  for (const auto& s : spaces) {
    const ScaledPolynomialBasis b = cell_pk_basis(s);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Index>(b.size()));
    for (const auto& t : s.sub.simplices)
      r += integrate([&](const Vec3& x) -> Eigen::VectorXd { return (w(x) - p.value(s.cell, x)) * b.eval(x); },
                     t.coords(), rule);
    EXPECT_LT(r.cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(CommutingDefect, BelowToleranceEveryCell) {
  for (auto family : {GridFamily::quad, GridFamily::quadhex, GridFamily::wedge})
    for (int k = 0; k <= 3; ++k) {
      const int level = family == GridFamily::wedge ? 1 : 2;
      const ScalarField& div = family == GridFamily::wedge ? smooth_div : smooth_div_2d;
      for (const auto& s : build_local_spaces(subdivide_all(make_grid(family, level)), k))
        EXPECT_LE(commuting_defect(smooth_v, div, s), 1e-10) << to_string(family) << " k=" << k << " cell " << s.cell;
    }
}

TEST(CommutingDefect, DetectsWrongDivergence) {
  const auto spaces = build_local_spaces(subdivide_all(make_quad_grid(2)), 1);
  const ScalarField wrong = [](const Vec3& x) { return smooth_div_2d(x) + 0.5; };
  EXPECT_GT(commuting_defect(smooth_v, wrong, spaces[0]), 1e-3);
}

TEST(InterelementJump, InterpolantIsConforming) {
  for (auto family : {GridFamily::quad, GridFamily::wedge}) {
    const auto spaces = build_local_spaces(subdivide_all(make_grid(family, 2)), 1);
    const ProjectedVelocity pv = project_velocity(smooth_v, spaces);
    EXPECT_LT(interelement_jump(spaces, pv.coeffs), 1e-12);
  }
}

TEST(InterelementJump, BrokenFieldIsDetected) {
  const auto spaces = build_local_spaces(subdivide_all(make_quad_grid(2)), 0);
  ProjectedVelocity pv = project_velocity(smooth_v, spaces);
  pv.coeffs[0] *= 1.5;
  EXPECT_GT(interelement_jump(spaces, pv.coeffs), 1e-3);
}

TEST(ProjectVelocity, ParallelMatchesSerial) {
  const auto spaces = build_local_spaces(subdivide_all(make_quadhex_grid(2)), 2);
  const ProjectedVelocity a = project_velocity(smooth_v, spaces);
  const ProjectedVelocity b = project_velocity_serial(smooth_v, spaces);
  for (std::size_t c = 0; c < spaces.size(); ++c) EXPECT_TRUE(a.coeffs[c] == b.coeffs[c]);
}
