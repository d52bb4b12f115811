#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <random>

#include "polymixed/assembly.hpp"
#include "polymixed/postproc.hpp"
#include "polymixed/projection.hpp"

using namespace polymixed;

namespace {

struct Pipeline {
  PolytopalMesh mesh;
  std::vector<LocalVelocitySpace> spaces;
  GlobalDofMap dofs;

  Pipeline(PolytopalMesh m, int k) : mesh(std::move(m)) {
    spaces = build_local_spaces(subdivide_all(mesh), k);
    dofs = build_dof_map(mesh, spaces);
  }
  MixedSolution run(const ManufacturedCase& mc) const { return solve(assemble(mesh, spaces, dofs, mc)); }
};

PolytopalMesh two_squares() {
  PolytopalMesh m;
  m.dim = 2;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0), Vec3(2, 1, 0)};
  m.cells = {{0, 1, 4, 3}, {1, 2, 5, 4}};
  m.build_faces();
  return m;
}

}  // namespace

TEST(DofMap, SingleSquareOrderZero) {
  const Pipeline p(make_quad_grid(1), 0);
  EXPECT_EQ(p.dofs.num_velocity, 4);
  EXPECT_EQ(p.dofs.num_pressure, 1);
  EXPECT_EQ(p.dofs.num_unknowns(), 5);
}

TEST(DofMap, TwoCellsShareOneEdge) {
  const Pipeline p(two_squares(), 0);
  EXPECT_EQ(p.dofs.num_velocity, 7);
  EXPECT_EQ(p.dofs.num_pressure, 2);
  EXPECT_EQ(p.dofs.num_interior_face_pieces, 1);
}

TEST(DofMap, WedgeLevelOneCount) {
  const Pipeline p(make_wedge_grid(1), 0);
  // two prisms with 8 face pieces each; the shared rectangle is cut in two
  EXPECT_EQ(p.dofs.num_velocity, 2 * 8 - 2);
  EXPECT_EQ(p.dofs.num_pressure, 2);
}

TEST(DofMap, CountIdentityAndSharedSigns) {
  for (auto family : {GridFamily::quad, GridFamily::quadhex, GridFamily::wedge})
    for (int k = 0; k <= 2; ++k) {
      const Pipeline p(make_grid(family, 2), k);
      Index sum = 0;
      for (const auto& s : p.spaces) sum += s.num_basis();
      const auto nft = static_cast<Index>(dim_pk(p.mesh.dim - 1, k));
      EXPECT_EQ(p.dofs.num_velocity, sum - p.dofs.num_interior_face_pieces * nft);
      EXPECT_EQ(p.dofs.num_pressure, p.mesh.num_cells() * static_cast<Index>(dim_pk(p.mesh.dim, k)));

      std::vector<int> refs(p.dofs.num_velocity, 0);
      std::vector<double> signs(p.dofs.num_velocity, 0.0);
      for (std::size_t c = 0; c < p.spaces.size(); ++c)
        for (std::size_t j = 0; j < p.dofs.velocity[c].size(); ++j) {
          ++refs[p.dofs.velocity[c][j]];
          signs[p.dofs.velocity[c][j]] += p.dofs.sign[c][j];
        }
      Index shared = 0;
      for (Index i = 0; i < p.dofs.num_velocity; ++i) {
        EXPECT_TRUE(refs[i] == 1 || refs[i] == 2);
        if (refs[i] == 2) {
          ++shared;
          EXPECT_EQ(signs[i], 0.0);
        }
      }
      EXPECT_EQ(shared, p.dofs.num_interior_face_pieces * nft);
    }
}

TEST(ManufacturedCase, TrigData) {
  using std::numbers::pi;
  const ManufacturedCase mc = manufactured_case("trig2d", 2);
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const Vec3 x(u(gen), u(gen), 0.0);
    EXPECT_NEAR(mc.f(x), 2 * pi * pi * std::sin(pi * x[0]) * std::sin(pi * x[1]), 1e-12);
    EXPECT_LT((mc.a * mc.q(x) + mc.grad_u(x)).norm(), 1e-12);
  }
  for (double t : {0.0, 0.3, 0.8, 1.0}) {
    EXPECT_NEAR(mc.g(Vec3(t, 0, 0)), 0.0, 1e-15);
    EXPECT_NEAR(mc.g(Vec3(1, t, 0)), 0.0, 1e-15);
    EXPECT_NEAR(mc.g(Vec3(t, 1, 0)), 0.0, 1e-15);
    EXPECT_NEAR(mc.g(Vec3(0, t, 0)), 0.0, 1e-15);
  }
}

TEST(ManufacturedCase, PolyDataAgainstFiniteDifferences) {
  const ManufacturedCase mc = manufactured_case("poly3d", 3);
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  const double h = 1e-5;
  for (int i = 0; i < 20; ++i) {
    const Vec3 x(u(gen), u(gen), u(gen));
    const double X = x[0] - x[0] * x[0], Y = x[1] - x[1] * x[1], Z = x[2] - x[2] * x[2];
    EXPECT_NEAR(mc.q(x)[1], -256.0 * X * X * (1 - 2 * x[1]) * Z, 1e-12);
    double div = 0.0;
    for (int d = 0; d < 3; ++d) {
      Vec3 e = Vec3::Zero();
      e[d] = h;
      div += (mc.q(x + e)[d] - mc.q(x - e)[d]) / (2 * h);
      EXPECT_NEAR(mc.grad_u(x)[d], (mc.u(x + e) - mc.u(x - e)) / (2 * h), 1e-7);
    }
    EXPECT_NEAR(mc.f(x), div, 1e-6 * std::max(1.0, std::abs(div)));
  }
}

TEST(ManufacturedCase, UnknownAndMismatched) {
  EXPECT_THROW(manufactured_case("gaussian", 2), UnknownCase);
  EXPECT_THROW(manufactured_case("trig2d", 3), DimensionMismatch);
  EXPECT_THROW(manufactured_case("poly3d", 2), DimensionMismatch);
}

TEST(Assembly, HomogeneousBoundaryGivesZeroG) {
  const Pipeline p(make_quad_grid(3), 1);
  const MixedSystem s = assemble(p.mesh, p.spaces, p.dofs, manufactured_case("trig2d", 2));
  EXPECT_LT(s.rhs.head(s.num_velocity).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_GT(s.rhs.tail(s.num_pressure).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Assembly, IdenticalCellsHaveEqualLocalBlocks) {
  const Pipeline p(two_squares(), 1);
  const ManufacturedCase mc = manufactured_case("constant", 2);
  const LocalBlocks a = local_blocks(p.mesh, p.spaces[0], mc);
  const LocalBlocks b = local_blocks(p.mesh, p.spaces[1], mc);
  EXPECT_LT((a.mass - b.mass).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((a.div - b.div).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Assembly, MassPositiveDefiniteAndDivergenceFullRank) {
  for (auto family : {GridFamily::quad, GridFamily::quadhex, GridFamily::wedge}) {
    const Pipeline p(make_grid(family, family == GridFamily::wedge ? 1 : 2), 1);
    const MixedSystem s = assemble(p.mesh, p.spaces, p.dofs, manufactured_case("constant", p.mesh.dim));
    const Eigen::MatrixXd k(s.matrix);
    const Eigen::MatrixXd m = k.topLeftCorner(s.num_velocity, s.num_velocity);
    const Eigen::MatrixXd b = k.bottomLeftCorner(s.num_pressure, s.num_velocity);
    EXPECT_LT((m - m.transpose()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff(), 0.0);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(b);
    EXPECT_EQ(lu.rank(), s.num_pressure);
    EXPECT_LT((k - k.transpose()).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Assembly, ParallelMatchesSerialBitwise) {
  const Pipeline p(make_quadhex_grid(2), 1);
  const ManufacturedCase mc = manufactured_case("trig2d", 2);
  const MixedSystem a = assemble(p.mesh, p.spaces, p.dofs, mc);
  const MixedSystem b = assemble_serial(p.mesh, p.spaces, p.dofs, mc);
  EXPECT_TRUE(a.rhs == b.rhs);
  EXPECT_EQ((Eigen::MatrixXd(a.matrix) - Eigen::MatrixXd(b.matrix)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(PatchTest, ConstantAndLinearPressureAreExact) {
  for (auto family : {GridFamily::quad, GridFamily::quadhex, GridFamily::wedge}) {
    const int dim = family == GridFamily::wedge ? 3 : 2;
    {
      const Pipeline p(make_grid(family, 2), 0);
      const ManufacturedCase mc = manufactured_case("constant", dim);
      const MixedSolution s = p.run(mc);
      EXPECT_LT(s.q.cwiseAbs().maxCoeff(), 1e-10);
      for (std::size_t c = 0; c < p.spaces.size(); ++c)
        EXPECT_NEAR(cell_pressure(p.dofs, c, s.u)[0], 1.5, 1e-10);
      EXPECT_LT(error_pressure(p.spaces, p.dofs, s, mc), 1e-10);
    }
    {
      const Pipeline p(make_grid(family, 2), 1);
      const ManufacturedCase mc = manufactured_case("linear", dim);
      const MixedSolution s = p.run(mc);
      EXPECT_LT(error_pressure(p.spaces, p.dofs, s, mc), 1e-10) << to_string(family);
      EXPECT_LT(error_flux_V(p.spaces, p.dofs, s, mc), 1e-10) << to_string(family);
      const Vec3 x = p.mesh.cell_center(0);
      const Eigen::VectorXd qc = cell_velocity(p.spaces[0], p.dofs, s.q);
      EXPECT_LT((p.spaces[0].value(qc, 0, p.spaces[0].sub.simplices[0].points[0]) - mc.q(x)).norm(), 1e-10);
    }
  }
}

TEST(Solve, DivergenceIdentityAndResidual) {
  const Pipeline p(make_quad_grid(3), 0);
  const ManufacturedCase mc = manufactured_case("trig2d", 2);
  const MixedSolution s = p.run(mc);
  EXPECT_LE(s.residual, 1e-10);
  EXPECT_LE(divergence_identity_defect(p.spaces, p.dofs, s, mc), 1e-9);
  std::vector<Eigen::VectorXd> coeffs;
  for (const auto& sp : p.spaces) coeffs.push_back(cell_velocity(sp, p.dofs, s.q));
  EXPECT_LE(interelement_jump(p.spaces, coeffs), 1e-9);
}

TEST(Solve, SparsePathAgreesWithDense) {
  // level 5 with k = 1 exceeds the dense limit
  const Pipeline p(make_quad_grid(5), 1);
  ASSERT_GT(p.dofs.num_unknowns(), kDenseSolveLimit);
  const MixedSolution s = p.run(manufactured_case("trig2d", 2));
  EXPECT_LE(s.residual, 1e-10);
}

TEST(Solve, InvariantUnderCellRenumbering) {
  PolytopalMesh m = make_quadhex_grid(2);
  PolytopalMesh r = m;
  std::reverse(r.cells.begin(), r.cells.end());
  r.build_faces();
  const Pipeline a(m, 1), b(r, 1);
  const ManufacturedCase mc = manufactured_case("trig2d", 2);
  const MixedSolution sa = a.run(mc), sb = b.run(mc);
  const Index n = m.num_cells();
  for (Index c = 0; c < n; ++c) {
    const Eigen::VectorXd ua = cell_pressure(a.dofs, c, sa.u);
    const Eigen::VectorXd ub = cell_pressure(b.dofs, n - 1 - c, sb.u);
    EXPECT_LT((ua - ub).cwiseAbs().maxCoeff(), 1e-10);
    const Eigen::VectorXd qa = cell_velocity(a.spaces[c], a.dofs, sa.q);
    const Eigen::VectorXd qb = cell_velocity(b.spaces[n - 1 - c], b.dofs, sb.q);
    EXPECT_LT((qa - qb).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(InfSup, StableAcrossLevels) {
  for (int k = 0; k <= 1; ++k) {
    std::vector<double> beta;
    for (int level = 1; level <= 3; ++level) {
      const Pipeline p(make_quad_grid(level), k);
      beta.push_back(inf_sup_constant(p.mesh, p.spaces, p.dofs));
    }
    const double lo = *std::min_element(beta.begin(), beta.end());
    const double hi = *std::max_element(beta.begin(), beta.end());
    EXPECT_GT(lo, 0.05);
    EXPECT_LT((hi - lo) / hi, 0.05);
  }
}
