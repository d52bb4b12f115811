#include "polymixed/study.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>

#include "polymixed/projection.hpp"

namespace polymixed {

std::pair<int, int> parse_level_range(const std::string& text) {
  const auto pos = text.find("..");
  try {
    std::size_t used = 0;
    if (pos == std::string::npos) {
      const int l = std::stoi(text, &used);
      if (used != text.size()) throw ConfigError("bad level '" + text + "'");
      return {l, l};
    }
    const std::string a = text.substr(0, pos), b = text.substr(pos + 2);
    const int lo = std::stoi(a, &used);
    if (used != a.size()) throw ConfigError("bad level range '" + text + "'");
    const int hi = std::stoi(b, &used);
    if (used != b.size()) throw ConfigError("bad level range '" + text + "'");
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw ConfigError("bad level range '" + text + "'");
  }
}

std::string default_case(GridFamily grid) { return grid == GridFamily::wedge ? "poly3d" : "trig2d"; }

void validate(const StudyConfig& config) {
  if (config.k < 0 || config.k > kMaxOrder) throw ConfigError("k must be in 0.." + std::to_string(kMaxOrder));
  const int max_level = config.grid == GridFamily::wedge ? kMaxLevel3d : kMaxLevel2d;
  if (config.level_min < 1 || config.level_max > max_level || config.level_min > config.level_max)
    throw ConfigError("levels must satisfy 1 <= a <= b <= " + std::to_string(max_level));
  const std::string expected = default_case(config.grid);
  if (!config.case_name.empty() && config.case_name != expected && config.case_name != "constant" &&
      config.case_name != "linear")
    throw ConfigError("case '" + config.case_name + "' does not match grid " + to_string(config.grid));
}

LevelResult run_level(GridFamily grid, int k, int level, const ManufacturedCase& mc, bool checks) {
  const auto start = std::chrono::steady_clock::now();
  const PolytopalMesh mesh = make_grid(grid, level);
  if (mesh.dim != mc.dim) throw DimensionMismatch("case dimension differs from mesh dimension");
  const std::vector<CellSubdivision> subs = subdivide_all(mesh);
  check_face_compatibility(mesh, subs);
  const std::vector<LocalVelocitySpace> spaces = build_local_spaces(subs, k);
  const GlobalDofMap dofs = build_dof_map(mesh, spaces);
  const MixedSystem system = assemble(mesh, spaces, dofs, mc);
  const MixedSolution sol = solve(system);

  LevelResult r;
  r.cells = mesh.num_cells();
  r.residual = sol.residual;
  r.record.level = level;
  r.record.h = std::ldexp(1.0, 1 - level);
  r.record.velocity_dofs = dofs.num_velocity;
  r.record.pressure_dofs = dofs.num_pressure;
  r.record.err_u = error_pressure(spaces, dofs, sol, mc);
  const FluxError fe = error_flux(spaces, dofs, sol, mc);
  r.record.err_q = fe.v();
  r.record.err_q_div = fe.div;
  r.div_identity = divergence_identity_defect(spaces, dofs, sol, mc);
  r.min_rcond = 1.0;
  for (const auto& sp : spaces) r.min_rcond = std::min(r.min_rcond, sp.rcond);
  if (checks) {
    std::vector<Eigen::VectorXd> coeffs(spaces.size());
    for (std::size_t c = 0; c < spaces.size(); ++c) coeffs[c] = cell_velocity(spaces[c], dofs, sol.q);
    r.jump = interelement_jump(spaces, coeffs);
    const VectorField q = [&mc](const Vec3& x) { return mc.q(x); };
    const ScalarField f = [&mc](const Vec3& x) { return mc.f(x); };
    for (const auto& sp : spaces) r.commuting = std::max(r.commuting, commuting_defect(q, f, sp));
  }
  r.record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<ConvergenceRecord> StudyResult::records() const {
  std::vector<ConvergenceRecord> out;
  for (const auto& l : levels) out.push_back(l.record);
  rates(out);
  return out;
}

StudyResult run_study(const StudyConfig& config) {
  validate(config);
  const std::string name = config.case_name.empty() ? default_case(config.grid) : config.case_name;
  const ManufacturedCase mc = manufactured_case(name, config.grid == GridFamily::wedge ? 3 : 2);
  StudyResult study;
  for (int level = config.level_min; level <= config.level_max; ++level) {
    try {
      study.levels.push_back(run_level(config.grid, config.k, level, mc, config.checks));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw LevelFailure(level, e.what());
    }
  }
  return study;
}

double reproduction_error(const LocalVelocitySpace& space) {
  const ScaledPolynomialBasis pk = cell_pk_basis(space);
  const auto n = static_cast<Index>(pk.size());
  std::mt19937 gen(17);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::Matrix<double, 3, Eigen::Dynamic> coef(3, n);
  for (Index j = 0; j < n; ++j)
    for (int i = 0; i < 3; ++i) coef(i, j) = i < space.dim ? dist(gen) : 0.0;
  const VectorField v = [&](const Vec3& x) -> Vec3 { return coef * pk.eval(x); };
  const Eigen::VectorXd pi = space.interpolate(v);
  const QuadRule& rule = simplex_rule(space.dim, space.quad_degree);
  double err = 0.0, scale = 0.0;
  for (int i = 0; i < space.sub.size(); ++i)
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec3 x = map_barycentric(space.sub.simplices[i].coords(), rule.points[q]);
      err = std::max(err, (space.value(pi, i, x) - v(x)).norm());
      scale = std::max(scale, v(x).norm());
    }
  return err / scale;
}

BasisDefects basis_defects(const LocalVelocitySpace& space) {
  BasisDefects d;
  const QuadRule& cell_rule = simplex_rule(space.dim, space.quad_degree);
  const QuadRule& face_rule = simplex_rule(space.dim - 1, space.quad_degree);
  Eigen::Matrix<double, 3, Eigen::Dynamic> va, vb;
  Eigen::VectorXd da, db;
  double vscale = 0.0, dscale = 0.0;
  // Divergence polynomial of simplex 0, evaluated on every other simplex.
  for (int i = 0; i < space.sub.size(); ++i)
    for (std::size_t q = 0; q < cell_rule.size(); ++q) {
      const Vec3 x = map_barycentric(space.sub.simplices[i].coords(), cell_rule.points[q]);
      space.basis_values(i, x, va, da);
      space.basis_values(0, x, vb, db);
      d.divergence = std::max(d.divergence, (da - db).cwiseAbs().maxCoeff());
      dscale = std::max(dscale, da.cwiseAbs().maxCoeff());
      vscale = std::max(vscale, va.cwiseAbs().maxCoeff());
    }
  for (const auto& f : space.sub.internal_faces)
    for (std::size_t q = 0; q < face_rule.size(); ++q) {
      const Vec3 x = map_barycentric(f.coords(), face_rule.points[q]);
      space.basis_values(f.simplex, x, va, da);
      space.basis_values(f.neighbor, x, vb, db);
      d.normal_jump = std::max(d.normal_jump, ((va - vb).transpose() * f.normal).cwiseAbs().maxCoeff());
    }
  if (dscale > 0.0) d.divergence /= dscale;
  if (vscale > 0.0) d.normal_jump /= vscale;
  return d;
}

namespace {

CheckResult below(std::string name, double value, double bound) {
  return {std::move(name), value <= bound, value, bound};
}

}  // namespace

std::vector<CheckResult> property_checks(GridFamily grid, int k, int max_level) {
  double rcond = 1.0, repro = 0.0, commuting = 0.0, div = 0.0, jump = 0.0;
  const int dim = grid == GridFamily::wedge ? 3 : 2;
  const VectorField v = [](const Vec3& x) {
    return Vec3(std::sin(3 * x[0]) * x[1], std::cos(2 * x[1] + x[2]), x[0] * x[2]);
  };
  const ScalarField dv = [dim](const Vec3& x) {
    return 3 * std::cos(3 * x[0]) * x[1] - 2 * std::sin(2 * x[1] + x[2]) + (dim == 3 ? x[0] : 0.0);
  };
  for (int level = 1; level <= max_level; ++level) {
    const PolytopalMesh mesh = make_grid(grid, level);
    const auto spaces = build_local_spaces(subdivide_all(mesh), k);
    for (const auto& sp : spaces) {
      rcond = std::min(rcond, sp.rcond);
      repro = std::max(repro, reproduction_error(sp));
      commuting = std::max(commuting, commuting_defect(v, dv, sp));
      const BasisDefects bd = basis_defects(sp);
      div = std::max(div, bd.divergence);
      jump = std::max(jump, bd.normal_jump);
    }
  }
  const std::string tag = to_string(grid) + " k=" + std::to_string(k);
  return {{"unisolvence " + tag, rcond > 1e-10, rcond, 1e-10},
          below("reproduction " + tag, repro, 1e-11),
          below("commuting defect " + tag, commuting, 1e-10),
          below("one-piece divergence " + tag, div, 1e-10),
          below("internal normal continuity " + tag, jump, 1e-10)};
}

std::vector<CheckResult> solution_checks(const StudyResult& study) {
  double jump = 0.0, ident = 0.0, divpart = 0.0, residual = 0.0;
  for (const auto& l : study.levels) {
    jump = std::max(jump, l.jump);
    ident = std::max(ident, l.div_identity);
    divpart = std::max(divpart, l.record.err_q_div);
    residual = std::max(residual, l.residual);
  }
  return {below("solve residual", residual, kSolveTolerance), below("conformity jump", jump, 1e-9),
          below("divergence identity", ident, 1e-9), below("flux error divergence part", divpart, 1e-8)};
}

std::vector<double> inf_sup_trend(GridFamily grid, int k, int max_level) {
  std::vector<double> out;
  for (int level = 1; level <= max_level; ++level) {
    const PolytopalMesh mesh = make_grid(grid, level);
    const auto spaces = build_local_spaces(subdivide_all(mesh), k);
    out.push_back(inf_sup_constant(mesh, spaces, build_dof_map(mesh, spaces)));
  }
  return out;
}

double relative_spread(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi > 0.0 ? (*hi - *lo) / *hi : 0.0;
}

std::string format_checks(const std::vector<CheckResult>& checks) {
  std::ostringstream out;
  for (const auto& c : checks) {
    char buf[96];
    std::snprintf(buf, sizeof buf, " value=%.3e bound=%.1e", c.value, c.bound);
    out << (c.passed ? "PASS " : "FAIL ") << c.name << buf << "\n";
  }
  return out.str();
}

}  // namespace polymixed
