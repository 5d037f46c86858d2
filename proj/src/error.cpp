#include "speclab/error.hpp"

namespace speclab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameters: return "InvalidParameters";
    case ErrorKind::BranchCut: return "BranchCut";
    case ErrorKind::OnBranchCut: return "OnBranchCut";
    case ErrorKind::SingularFormula: return "SingularFormula";
    case ErrorKind::SizeExceeded: return "SizeExceeded";
    case ErrorKind::NoDominanceSplit: return "NoDominanceSplit";
    case ErrorKind::NoSubcriticalBranch: return "NoSubcriticalBranch";
    case ErrorKind::Beta0ConstraintViolated: return "Beta0ConstraintViolated";
    case ErrorKind::NonConvergence: return "NonConvergence";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace speclab
