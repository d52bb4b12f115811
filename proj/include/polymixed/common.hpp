#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace polymixed {

using Index = std::int64_t;
using Vec3 = Eigen::Vector3d;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class TopologyError : public Error { using Error::Error; };
class NonConvexCell : public Error { using Error::Error; };
class FaceMismatch : public Error { using Error::Error; };
class UnsupportedDegree : public Error { using Error::Error; };
class DegenerateSimplex : public Error { using Error::Error; };
class FrameNotFound : public Error { using Error::Error; };
class DimensionMismatch : public Error { using Error::Error; };
class SingularMassMatrix : public Error { using Error::Error; };
class SolveFailure : public Error { using Error::Error; };
class UnknownCase : public Error { using Error::Error; };

class SingularDofMatrix : public Error {
 public:
  SingularDofMatrix(Index cell, const std::string& what)
      : Error("cell " + std::to_string(cell) + ": " + what), cell_(cell) {}
  Index cell() const { return cell_; }

 private:
  Index cell_;
};

}  // namespace polymixed
