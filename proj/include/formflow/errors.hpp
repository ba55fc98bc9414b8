#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace formflow {

/// Base class for everything this library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Grid mismatch, axis out of range, bad degree and similar misuse.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Operation is not defined in the requested dimension (e.g. Weyl part for n = 2).
class UnsupportedDimensionError : public Error {
 public:
  using Error::Error;
};

/// A metric sample is not symmetric positive definite.
class DegenerateMetricError : public Error {
 public:
  DegenerateMetricError(const std::string& what, std::size_t node, double min_eig)
      : Error(what), node_(node), min_eig_(min_eig) {}
  std::size_t node() const { return node_; }
  double min_eigenvalue() const { return min_eig_; }

 private:
  std::size_t node_;
  double min_eig_;
};

/// The flow left the admissible metric set (finite maximal time reached numerically).
class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, double t, std::size_t node)
      : Error(what), t_(t), node_(node) {}
  double time() const { return t_; }
  std::size_t node() const { return node_; }

 private:
  double t_;
  std::size_t node_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0, int column = 0, std::string field = {})
      : Error(what), line_(line), column_(column), field_(std::move(field)) {}
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  int column_;
  std::string field_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace formflow
