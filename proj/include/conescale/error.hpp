#pragma once

#include <stdexcept>
#include <string>

namespace conescale {

// Every library failure carries one of three categories; the CLI maps them
// to exit codes 2, 3 and 4.
enum class ErrorCategory { validation, numerical, hypothesis };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorCategory::validation, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorCategory::numerical, what) {}
};

class HypothesisError : public Error {
 public:
  explicit HypothesisError(const std::string& what)
      : Error(ErrorCategory::hypothesis, what) {}
};

class OverflowError : public NumericalError {
 public:
  OverflowError(const std::string& what, long node)
      : NumericalError(what), node_(node) {}
  long node() const noexcept { return node_; }

 private:
  long node_;
};

int exit_code(ErrorCategory category) noexcept;

}  // namespace conescale
