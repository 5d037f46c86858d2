#pragma once

// The three-term recurrence
//   d_{n+1} C_{n+1} + P_n C_n + d_n C_{n-1} = 0,   P_n = 2 mu (n+1/2)^{1/2} zeta_n(lambda),
// its branch-correct zeta, forward and minimal (backward) solutions, Birkhoff-Adams
// asymptotics, the summed identity and the secular defect.

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace speclab {

using cplx = std::complex<double>;

/// sqrt(n + 1/2 - lambda) with Re > 0 and Im zeta * Im lambda < 0. OnBranchCut for real lambda >= n+1/2.
cplx zeta(std::size_t n, cplx lambda);

/// P_n = 2 mu (n+1/2)^{1/2} zeta_n(lambda).
cplx p_coefficient(std::size_t n, double mu, cplx lambda);

enum class Direction { Forward, Backward };

/// C_0..C_N stored as mantissa * 2^exponent per element, so sequences spanning far more
/// than the double range keep every entry.
class RecurrenceSolution {
 public:
  double mu = 0.0;
  cplx lambda{};
  Direction direction = Direction::Forward;
  std::string normalization;

  std::size_t size() const { return mant_.size(); }
  /// Largest valid index N.
  std::size_t last() const { return mant_.size() - 1; }

  cplx mantissa(std::size_t n) const { return mant_[n]; }
  int exponent(std::size_t n) const { return exp_[n]; }
  /// C_n; overflows to inf / underflows to 0 outside the double range.
  cplx value(std::size_t n) const;
  /// C_n * 2^{-ref}.
  cplx scaled(std::size_t n, int ref) const;
  /// log |C_n|; -inf for C_n = 0.
  double log_abs(std::size_t n) const;
  /// C_{n+1} / C_n.
  cplx ratio(std::size_t n) const;

  void push(cplx mantissa, int exponent);
  /// Multiplies every element by s * 2^e.
  void rescale(cplx s, int e);
  /// Overwrites element n.
  void set(std::size_t n, cplx mantissa, int exponent);
  void truncate(std::size_t count);
  void reverse();

 private:
  std::vector<cplx> mant_;
  std::vector<int> exp_;
};

/// C_0 = c0, C_1 from the boundary row d_1 C_1 + P_0 C_0 = 0, then the recurrence up to C_N.
RecurrenceSolution iterate_forward(double mu, cplx lambda, cplx c0, std::size_t n);

/// The decaying solution on 0..N by backward recurrence from M > N, normalized to C_N = 1.
/// M = 0 selects the default N + max(50, N/10). NoDominanceSplit when no minimal solution exists.
RecurrenceSolution minimal_solution_backward(double mu, cplx lambda, std::size_t n, std::size_t m = 0);

/// As above but without the final normalization: the seed at M is 1, so the result varies
/// continuously with lambda.
RecurrenceSolution minimal_solution_raw(double mu, cplx lambda, std::size_t n, std::size_t m = 0);

enum class RootCase { DistinctRoots, DoubleRoot };

struct BirkhoffAdamsParams {
  RootCase root_case = RootCase::DistinctRoots;
  double a0 = 0.0;
  cplx a1{};
  double b0 = 1.0;
  double b1 = -1.0;
  /// lambda_plus = -mu + sqrt(mu^2 - 1), lambda_minus = -mu - sqrt(mu^2 - 1) (principal root).
  cplx lambda_plus{};
  cplx lambda_minus{};
  cplx d_plus{};
  cplx d_minus{};
  /// Double root only: solutions lambda^n exp(+-delta sqrt n) n^kappa.
  cplx delta{};
  double kappa = 0.0;
};

BirkhoffAdamsParams birkhoff_adams_eval(double mu, cplx lambda);

/// Which asymptotic solution is minimal: +1 (lambda_plus, or +delta) or -1.
/// NoDominanceSplit when |mu| <= 1 with real lambda, or when both solutions have equal growth.
int minimal_branch(const BirkhoffAdamsParams& ba, double mu, cplx lambda);

/// Leading-order C_{n+1}/C_n of the asymptotic solution on `branch` (+1 or -1).
cplx asymptotic_ratio(const BirkhoffAdamsParams& ba, int branch, std::size_t n);

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  /// d_{k+1} |C_{k+1}| |C_k|, the magnitude the right side is built from.
  double scale = 0.0;
};

/// 2 mu sum_{n<=k} |C_n|^2 (n+1/2)^{1/2} Im zeta_n  against  -d_{k+1} Im(C_{k+1} conj C_k),
/// both scaled by 2^{-2e} for the exponent e of C_k. Requires k + 1 <= sol.last().
IdentityCheck identity_residual(const RecurrenceSolution& sol, std::size_t k);

/// |C_n D_{n+1} - C_{n+1} D_n| / ((|C_n| + |C_{n+1}|)(|D_n| + |D_{n+1}|)).
double cross_defect(const RecurrenceSolution& c, const RecurrenceSolution& d, std::size_t n);

/// Truncation length for which the backward recurrence resolves C_0, C_1 to full precision.
std::size_t recommended_length(double mu, cplx lambda);

/// Normalized cross product of the boundary-seeded solution and the minimal solution,
/// evaluated at n = 0. N = 0 selects recommended_length.
double secular_defect(double mu, cplx lambda, std::size_t n = 0);

/// Real-valued, sign-changing version of the defect for real lambda < 1/2 and mu > 1.
double secular_function(double mu, double lambda, std::size_t n = 0);

struct SecularRoot {
  double lambda = 0.0;
  double defect = 0.0;
  bool bracketed = false;
};

/// Root of secular_function near `guess`, bracketed by widening from 1e-7 to 1e-2.
SecularRoot refine_secular_root(double mu, double guess, double tol = 1e-13);

}  // namespace speclab
