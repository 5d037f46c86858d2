#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace speclab {

enum class ErrorKind {
  InvalidParameters,
  BranchCut,
  OnBranchCut,
  SingularFormula,
  SizeExceeded,
  NoDominanceSplit,
  NoSubcriticalBranch,
  Beta0ConstraintViolated,
  NonConvergence,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for every library failure; `kind()` drives the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace speclab
