#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <string>
#include <vector>

namespace rbadapt {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// A point in parameter space.
using Parameter = Eigen::VectorXd;
using ParameterList = std::vector<Parameter>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user configuration or inconsistent model definition.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Operators with incompatible shapes.
class StructuralError : public Error {
 public:
  using Error::Error;
};

class SingularOperatorError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, Index step) : Error(what), step_(step) {}
  Index step() const { return step_; }

 private:
  Index step_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line) : Error(what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

std::string format_parameter(const Parameter& mu);

}  // namespace rbadapt
