#pragma once

#include <stdexcept>
#include <string>

namespace mcbm {

// Bad input: wrong sizes, out-of-range knobs, unreadable files. CLI exit code 1.
class ArgumentError : public std::invalid_argument {
 public:
  explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical or degenerate failure (singular matrix, empty batch, no overlap,
// diverged fit). CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class HorizonError : public NumericalError {
 public:
  explicit HorizonError(const std::string& what) : NumericalError(what) {}
};

class DegenerateBatchError : public NumericalError {
 public:
  explicit DegenerateBatchError(const std::string& what) : NumericalError(what) {}
};

class DivergenceError : public NumericalError {
 public:
  explicit DivergenceError(const std::string& what) : NumericalError(what) {}
};

class NoOverlapError : public NumericalError {
 public:
  explicit NoOverlapError(const std::string& what) : NumericalError(what) {}
};

class DegenerateErrorField : public NumericalError {
 public:
  explicit DegenerateErrorField(const std::string& what) : NumericalError(what) {}
};

}  // namespace mcbm
