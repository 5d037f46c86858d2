#pragma once

// Entry generators for the four Jacobi operator families and their truncations,
// plus the transition and compact-difference diagnostics.

#include <cstddef>
#include <utility>
#include <variant>
#include <vector>

#include "speclab/tridiag.hpp"

namespace speclab {

/// Diagonal 2 mu (n+1/2), off-diagonal d_n; indices n = 0..N-1.
struct CalJ0 {
  double mu;
};
/// Diagonal 2 mu (n+1/2)^{1/2} sqrt(n+1/2-lambda); requires lambda < 1/2.
struct CalJ {
  double lambda;
  double mu;
};
/// Zero diagonal, off-diagonal n^{1/2} / (2 (n+eps)^{1/4} (n-1+eps)^{1/4}); requires eps > 0.
struct Jeps {
  double epsilon;
};
/// Zero diagonal on indices 1..N, off-diagonal 1/(2 (1-1/n)^{1/4}) for n >= 2.
struct J0bar {};

using JacobiFamily = std::variant<CalJ0, CalJ, Jeps, J0bar>;

/// d_n = n^{1/2} (n^2 - 1/4)^{1/4}; d_0 = 0.
double d_coefficient(std::size_t n);

/// Throws InvalidParameters / BranchCut when the family's entries are undefined.
void validate(const JacobiFamily& family);

TridiagonalMatrix build(const JacobiFamily& family, std::size_t n);

enum class CountSide { Above, Below };

/// Below: eigenvalues strictly below level. Above: N minus that.
std::size_t count_relative(const JacobiFamily& family, double level, std::size_t n, CountSide side);

struct DoublingPolicy {
  std::size_t start = 2048;
  std::size_t cap = std::size_t{1} << 20;
};

struct StabilizedCount {
  std::size_t count = 0;
  /// The size at which the count first repeated under doubling.
  std::size_t size = 0;
};

/// Doubles N from policy.start until two consecutive sizes agree; NonConvergence past policy.cap.
StabilizedCount count_stabilized(const JacobiFamily& family, double level, CountSide side,
                                 const DoublingPolicy& policy = {});

/// max over n in [N/2, N) of |2 mu (n+1/2)^{1/2} zeta_n(lambda) - (2 mu (n+1/2) - mu lambda)|.
double compact_difference_tail(double lambda, double mu, std::size_t n);

struct TransitionScanReport {
  double mu = 0.0;
  std::pair<double, double> window{};
  std::vector<std::size_t> sizes;
  std::vector<double> smallest_eigs;
  std::vector<std::size_t> window_counts;
};

/// Throws InvalidParameters unless sizes are ascending, each >= 2, and window.first < window.second.
TransitionScanReport transition_scan(double mu, const std::vector<std::size_t>& sizes,
                                     std::pair<double, double> window, double tol = 1e-12);

}  // namespace speclab
