#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "polymixed/assembly.hpp"

namespace polymixed {

struct FluxError {
  double l2 = 0.0;
  double div = 0.0;
  double v() const { return std::sqrt(l2 * l2 + div * div); }
};

/// ||Q_h u - u_h|| over the simplices of every cell.
double error_pressure(const std::vector<LocalVelocitySpace>& spaces, const GlobalDofMap& dofs,
                      const MixedSolution& sol, const ManufacturedCase& mc);

/// L2 and divergence parts of Pi_h q - q_h.
FluxError error_flux(const std::vector<LocalVelocitySpace>& spaces, const GlobalDofMap& dofs,
                     const MixedSolution& sol, const ManufacturedCase& mc);
inline double error_flux_V(const std::vector<LocalVelocitySpace>& spaces, const GlobalDofMap& dofs,
                           const MixedSolution& sol, const ManufacturedCase& mc) {
  return error_flux(spaces, dofs, sol, mc).v();
}

/// Max over cells and P_k basis functions p of |(div q_h - Q_h f, p)| / ||p||,
/// relative to max(1, ||f||).
double divergence_identity_defect(const std::vector<LocalVelocitySpace>& spaces, const GlobalDofMap& dofs,
                                  const MixedSolution& sol, const ManufacturedCase& mc);

struct ConvergenceRecord {
  int level = 0;
  double h = 0.0;
  double err_u = 0.0;
  double err_q = 0.0;
  double err_q_div = 0.0;
  std::optional<double> rate_u;
  std::optional<double> rate_q;
  Index velocity_dofs = 0;
  Index pressure_dofs = 0;
  double seconds = 0.0;
};

/// log2(e_prev / e); empty when either error is zero. Throws Error unless
/// levels strictly increase.
void rates(std::vector<ConvergenceRecord>& records);
std::optional<double> rate(double previous, double current);

/// Least-squares slope of -log2(err) against level.
double fitted_rate(const std::vector<int>& levels, const std::vector<double>& errors);

enum class TableFormat { markdown, csv };
TableFormat parse_table_format(const std::string& name);

/// Columns level, err_u, rate, err_q_V, rate; with `diagnostics` also h,
/// dof counts, seconds and the divergence part of the flux error.
std::string emit_table(const std::vector<ConvergenceRecord>& records, TableFormat format, bool diagnostics = false);

/// Parses CSV produced by emit_table.
std::vector<ConvergenceRecord> parse_csv_table(const std::string& text);

}  // namespace polymixed
