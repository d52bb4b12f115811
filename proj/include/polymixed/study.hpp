#pragma once

#include <optional>
#include <string>
#include <vector>

#include "polymixed/postproc.hpp"

namespace polymixed {

class ConfigError : public Error {
  using Error::Error;
};

/// A level of a study failed; the message names the level.
class LevelFailure : public Error {
 public:
  LevelFailure(int level, const std::string& what)
      : Error("level " + std::to_string(level) + ": " + what), level_(level) {}
  int level() const { return level_; }

 private:
  int level_;
};

inline constexpr int kMaxLevel2d = 8;
inline constexpr int kMaxLevel3d = 6;
inline constexpr int kMaxOrder = 3;

struct StudyConfig {
  GridFamily grid = GridFamily::quad;
  int k = 0;
  int level_min = 1;
  int level_max = 3;
  std::string case_name;
  TableFormat format = TableFormat::markdown;
  std::string out;
  bool checks = false;
  bool diagnostics = false;
  std::string dump_mesh;
};

/// "a..b" or a single level.
std::pair<int, int> parse_level_range(const std::string& text);
std::string default_case(GridFamily grid);
/// Throws ConfigError on a grid/case/dimension mismatch or bad ranges.
void validate(const StudyConfig& config);

struct LevelResult {
  ConvergenceRecord record;
  double residual = 0.0;
  double min_rcond = 0.0;
  double div_identity = 0.0;
  double jump = 0.0;
  double commuting = 0.0;
  Index cells = 0;
};

/// Mesh, subdivision, local spaces, assembly, solve and error evaluation for
/// one level. `checks` adds the conformity and commuting-defect measures.
LevelResult run_level(GridFamily grid, int k, int level, const ManufacturedCase& mc, bool checks = false);

struct StudyResult {
  std::vector<LevelResult> levels;
  std::vector<ConvergenceRecord> records() const;
};

/// Throws ConfigError, or LevelFailure wrapping any numerical error.
StudyResult run_study(const StudyConfig& config);

/// Relative interpolation error of a fixed [P_k]^d field (sampled at
/// quadrature points).
double reproduction_error(const LocalVelocitySpace& space);

struct BasisDefects {
  /// max over basis members of the spread of divergence between simplices
  double divergence = 0.0;
  /// max normal-component jump across internal faces
  double normal_jump = 0.0;
};
BasisDefects basis_defects(const LocalVelocitySpace& space);

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double bound = 0.0;
};

/// Property checks on levels up to 3 of one family and order: unisolvence,
/// reproduction, commuting defect, basis defects.
std::vector<CheckResult> property_checks(GridFamily grid, int k, int max_level = 3);

/// Checks on solved levels: conformity, divergence identity, div part of
/// the flux error.
std::vector<CheckResult> solution_checks(const StudyResult& study);

/// Inf-sup constants on levels 1..max_level.
std::vector<double> inf_sup_trend(GridFamily grid, int k, int max_level = 3);
/// Relative spread (max - min) / max.
double relative_spread(const std::vector<double>& values);

std::string format_checks(const std::vector<CheckResult>& checks);

}  // namespace polymixed
