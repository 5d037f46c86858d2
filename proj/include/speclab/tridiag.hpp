#pragma once

// Finite real symmetric tridiagonal matrices: Sturm counting, windowed bisection and a
// dense Jacobi-rotation oracle that shares no code with the Sturm path.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace speclab {

class TridiagonalMatrix {
 public:
  /// Throws InvalidParameters unless offdiag.size() + 1 == diag.size() >= 1 and all entries are finite.
  TridiagonalMatrix(std::vector<double> diag, std::vector<double> offdiag);

  std::size_t size() const { return diag_.size(); }
  std::span<const double> diag() const { return diag_; }
  /// offdiag()[i] couples rows i and i+1.
  std::span<const double> offdiag() const { return off_; }

  double inf_norm() const;
  /// Gershgorin enclosure (lower, upper) of the spectrum.
  std::pair<double, double> gershgorin() const;

 private:
  std::vector<double> diag_;
  std::vector<double> off_;
};

struct EigenvalueReport {
  double a = 0.0;
  double b = 0.0;
  std::vector<double> eigenvalues;
  std::size_t count_below_a = 0;
  std::size_t count_below_b = 0;
  std::size_t truncation_size = 0;
  double tol = 0.0;
};

/// Number of eigenvalues strictly below `level`.
std::size_t sturm_count_below(const TridiagonalMatrix& t, double level);

/// Eigenvalues in [a, b), each bisected to absolute width tol. Throws InvalidParameters
/// unless a < b and tol > 0.
EigenvalueReport eigenvalues_in_window(const TridiagonalMatrix& t, double a, double b, double tol);

/// k-th smallest eigenvalue (0-based) to absolute width tol.
double kth_eigenvalue(const TridiagonalMatrix& t, std::size_t k, double tol);

double smallest_eigenvalue(const TridiagonalMatrix& t, double tol);

inline constexpr std::size_t kDenseOracleMaxSize = 1024;

/// All eigenvalues, ascending, via cyclic Jacobi rotations on the dense matrix.
/// Throws SizeExceeded above kDenseOracleMaxSize, NonConvergence if sweeps stall.
std::vector<double> dense_eigen_oracle(const TridiagonalMatrix& t);

}  // namespace speclab
