#include <benchmark/benchmark.h>

#include "polymixed/assembly.hpp"
#include "polymixed/projection.hpp"

using namespace polymixed;

namespace {

struct Fixture {
  PolytopalMesh mesh;
  std::vector<CellSubdivision> subs;
  std::vector<LocalVelocitySpace> spaces;
  GlobalDofMap dofs;
  ManufacturedCase mc;

  Fixture(bool three_d, int level, int k)
      : mesh(three_d ? make_wedge_grid(level) : make_quadhex_grid(level)),
        subs(subdivide_all(mesh)),
        spaces(build_local_spaces(subs, k)),
        dofs(build_dof_map(mesh, spaces)),
        mc(manufactured_case(three_d ? "poly3d" : "trig2d", three_d ? 3 : 2)) {}
};

const Fixture& fixture(int which) {
  static const Fixture f2d(false, 5, 2), f3d(true, 3, 1);
  return which == 0 ? f2d : f3d;
}

void BM_LocalSpaces(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  const int k = state.range(0) == 0 ? 2 : 1;
  for (auto _ : state) {
    auto s = state.range(1) ? build_local_spaces(f.subs, k) : build_local_spaces_serial(f.subs, k);
    benchmark::DoNotOptimize(s.data());
  }
}

void BM_Assemble(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  for (auto _ : state) {
    auto sys = state.range(1) ? assemble(f.mesh, f.spaces, f.dofs, f.mc)
                              : assemble_serial(f.mesh, f.spaces, f.dofs, f.mc);
    benchmark::DoNotOptimize(sys.rhs.data());
  }
}

void BM_ProjectVelocity(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  const VectorField q = [&](const Vec3& x) { return f.mc.q(x); };
  for (auto _ : state) {
    auto p = state.range(1) ? project_velocity(q, f.spaces) : project_velocity_serial(q, f.spaces);
    benchmark::DoNotOptimize(&p);
  }
}

}  // namespace

BENCHMARK(BM_LocalSpaces)->ArgNames({"3d", "parallel"})->ArgsProduct({{0, 1}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Assemble)->ArgNames({"3d", "parallel"})->ArgsProduct({{0, 1}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProjectVelocity)->ArgNames({"3d", "parallel"})->ArgsProduct({{0, 1}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
