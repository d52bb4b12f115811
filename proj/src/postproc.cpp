#include "polymixed/postproc.hpp"

#include <cstdio>
#include <sstream>

#include "polymixed/projection.hpp"

namespace polymixed {

double error_pressure(const std::vector<LocalVelocitySpace>& spaces, const GlobalDofMap& dofs,
                      const MixedSolution& sol, const ManufacturedCase& mc) {
  const ProjectedScalar qu = project_scalar(mc.u, spaces);
  double sum = 0.0;
  for (std::size_t c = 0; c < spaces.size(); ++c) {
    const Eigen::VectorXd d = qu.coeffs[c] - cell_pressure(dofs, static_cast<Index>(c), sol.u);
    const Eigen::MatrixXd mass = cell_mass_matrix(spaces[c].sub, qu.bases[c], spaces[c].quad_degree);
    sum += d.dot(mass * d);
  }
  return std::sqrt(std::max(0.0, sum));
}

FluxError error_flux(const std::vector<LocalVelocitySpace>& spaces, const GlobalDofMap& dofs,
                     const MixedSolution& sol, const ManufacturedCase& mc) {
  const VectorField q = [&mc](const Vec3& x) { return mc.q(x); };
  const ProjectedVelocity pq = project_velocity(q, spaces);
  double l2 = 0.0, div = 0.0;
  for (std::size_t c = 0; c < spaces.size(); ++c) {
    const auto& sp = spaces[c];
    const Eigen::VectorXd d = pq.coeffs[c] - cell_velocity(sp, dofs, sol.q);
    const QuadRule& rule = simplex_rule(sp.dim, sp.quad_degree);
    for (int i = 0; i < sp.sub.size(); ++i) {
      const auto& s = sp.sub.simplices[i];
      l2 += integrate([&](const Vec3& x) { return sp.value(d, i, x).squaredNorm(); }, s.coords(), rule);
      div += integrate([&](const Vec3& x) { return std::pow(sp.divergence(d, i, x), 2); }, s.coords(), rule);
    }
  }
  return {std::sqrt(l2), std::sqrt(div)};
}

double divergence_identity_defect(const std::vector<LocalVelocitySpace>& spaces, const GlobalDofMap& dofs,
                                  const MixedSolution& sol, const ManufacturedCase& mc) {
  const ScalarField f = [&mc](const Vec3& x) { return mc.f(x); };
  const ProjectedScalar qf = project_scalar(f, spaces);
  double worst = 0.0, fnorm2 = 0.0;
  for (std::size_t c = 0; c < spaces.size(); ++c) {
    const auto& sp = spaces[c];
    const Eigen::VectorXd qc = cell_velocity(sp, dofs, sol.q);
    const QuadRule& rule = simplex_rule(sp.dim, sp.quad_degree);
    for (int i = 0; i < sp.sub.size(); ++i) {
      const auto& s = sp.sub.simplices[i];
      const double e2 = integrate(
          [&](const Vec3& x) { return std::pow(sp.divergence(qc, i, x) - qf.value(static_cast<Index>(c), x), 2); },
          s.coords(), rule);
      worst = std::max(worst, std::sqrt(e2 / s.measure));
      fnorm2 += integrate([&](const Vec3& x) { return std::pow(qf.value(static_cast<Index>(c), x), 2); }, s.coords(),
                          rule);
    }
  }
  return worst / std::max(1.0, std::sqrt(fnorm2));
}

std::optional<double> rate(double previous, double current) {
  if (previous <= 0.0 || current <= 0.0) return std::nullopt;
  return std::log2(previous / current);
}

void rates(std::vector<ConvergenceRecord>& records) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i > 0 && records[i].level <= records[i - 1].level) throw Error("levels must strictly increase");
    records[i].rate_u = i == 0 ? std::nullopt : rate(records[i - 1].err_u, records[i].err_u);
    records[i].rate_q = i == 0 ? std::nullopt : rate(records[i - 1].err_q, records[i].err_q);
  }
}

double fitted_rate(const std::vector<int>& levels, const std::vector<double>& errors) {
  const auto n = static_cast<double>(levels.size());
  if (levels.size() < 2 || levels.size() != errors.size()) throw Error("fitted rate needs two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double x = levels[i], y = -std::log2(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

TableFormat parse_table_format(const std::string& name) {
  if (name == "markdown") return TableFormat::markdown;
  if (name == "csv") return TableFormat::csv;
  throw Error("unknown table format '" + name + "'");
}

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string fixed2(const std::optional<double>& v, const char* missing) {
  if (!v) return missing;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

std::vector<std::string> row_cells(const ConvergenceRecord& r, bool diagnostics, const char* missing) {
  std::vector<std::string> cells{std::to_string(r.level), sci(r.err_u), fixed2(r.rate_u, missing), sci(r.err_q),
                                 fixed2(r.rate_q, missing)};
  if (diagnostics) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", r.seconds);
    cells.insert(cells.end(), {sci(r.h), std::to_string(r.velocity_dofs), std::to_string(r.pressure_dofs),
                               sci(r.err_q_div), buf});
  }
  return cells;
}

}  // namespace

std::string emit_table(const std::vector<ConvergenceRecord>& records, TableFormat format, bool diagnostics) {
  std::vector<std::string> head{"level", "err_u", "rate_u", "err_q_V", "rate_q"};
  if (diagnostics) head.insert(head.end(), {"h", "velocity_dofs", "pressure_dofs", "err_q_div", "seconds"});
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    if (format == TableFormat::csv) {
      for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    } else {
      out << "|";
      for (const auto& c : cells) out << " " << c << " |";
    }
    out << "\n";
  };
  line(head);
  if (format == TableFormat::markdown) line(std::vector<std::string>(head.size(), "---"));
  for (const auto& r : records) line(row_cells(r, diagnostics, format == TableFormat::csv ? "" : "—"));
  return out.str();
}

std::vector<ConvergenceRecord> parse_csv_table(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<ConvergenceRecord> out;
  int lineno = 0;
  if (!std::getline(in, line)) return out;
  ++lineno;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() < 5) throw ParseError(lineno, "expected at least 5 fields");
    auto opt = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<double>(std::stod(s)); };
    ConvergenceRecord r;
    try {
      r.level = std::stoi(cells[0]);
      r.err_u = std::stod(cells[1]);
      r.rate_u = opt(cells[2]);
      r.err_q = std::stod(cells[3]);
      r.rate_q = opt(cells[4]);
      if (cells.size() >= 10) {
        r.h = std::stod(cells[5]);
        r.velocity_dofs = std::stoll(cells[6]);
        r.pressure_dofs = std::stoll(cells[7]);
        r.err_q_div = std::stod(cells[8]);
        r.seconds = std::stod(cells[9]);
      }
    } catch (const std::logic_error&) {
      throw ParseError(lineno, "malformed number");
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace polymixed
