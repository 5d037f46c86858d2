#pragma once

// The two-dimensional operator in its Hermite-mode picture: quadratic forms of
// finite-mode trial states, form bounds, eigenvalues below the threshold 1/2 and
// their counting functions.

#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "speclab/coupling.hpp"
#include "speclab/jacobi_ops.hpp"

namespace speclab {

/// Normalized Hermite function chi_n(y) by upward recurrence.
double hermite_eval(std::size_t n, double y);

/// psi_n(x) = a e^{-delta x} for x > 0 and b e^{delta x} for x < 0.
struct ModeProfile {
  std::size_t n = 0;
  cplx a{};
  cplx b{};
  double delta = 1.0;
};

class ModeTrialFunction {
 public:
  /// Throws InvalidParameters on repeated mode indices, delta <= 0 or non-finite data.
  explicit ModeTrialFunction(std::vector<ModeProfile> modes);

  const std::vector<ModeProfile>& modes() const { return modes_; }
  /// Mode with index n, or nullptr.
  const ModeProfile* find(std::size_t n) const;

 private:
  std::vector<ModeProfile> modes_;  // sorted by n
};

struct FormValues {
  double a0 = 0.0;
  double b_sum = 0.0;
  double full = 0.0;
  double norm_squared = 0.0;
};

inline constexpr double kBeta0ConstraintTol = 1e-10;

/// Beta != 0: b_sum = (1/beta) sum_n sqrt(n)/(2 sqrt2) Re[u_n^dagger Sigma u_{n-1}] with
/// u_n = (psi_n(0+), psi_n(0-)). Beta = 0: the alpha/4-weighted boundary sum, after checking
/// f_- = -(conj(gamma)/2) f_+ mode by mode (Beta0ConstraintViolated otherwise).
FormValues evaluate_forms(const ModeTrialFunction& trial, const CouplingParams& params);

/// Projects beta = 0 trial data onto f_- = -(conj(gamma)/2) f_+ keeping f_+.
ModeTrialFunction project_beta0(const ModeTrialFunction& trial, cplx gamma);

/// c with full >= (c/2) ||Psi||^2, computed on the canonicalized parameters.
double lower_bound_constant(const CouplingParams& params);

/// Single mode with (a, b) = K^{(branch)} / sqrt(delta) for unit K.
ModeTrialFunction saturating_trial(double delta, int branch, const CouplingDerived& derived,
                                   std::size_t mode = 0);

/// int_0^inf (|f'|^2 + delta^2 |f|^2) dx for f = c e^{-kappa x}.
double trace_energy(cplx c, double kappa, double delta);

struct HEigenvalue {
  double lambda = 0.0;
  Branch branch = Branch::BetaZero;
  double mu = 0.0;
  /// Root of the secular function next to lambda, and its defect there.
  double secular_lambda = 0.0;
  double secular_defect = 0.0;
};

struct HSpectrumResult {
  CouplingParams params;
  std::vector<BranchMu> branch_mus;
  std::vector<HEigenvalue> eigenvalues;  // ascending
  std::vector<std::size_t> per_branch_counts;  // aligned with branch_mus
  std::size_t n_modes = 0;
  double tol = 0.0;
  double lambda_min = 0.0;
  double method_agreement = 0.0;
};

/// NaN selects the default: max(-9.5, c/2) for the lower bound constant c when c > 0.
inline constexpr double kDefaultLambdaMin = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kThresholdGap = 1e-12;

double default_lambda_min(const CouplingParams& params);

/// Eigenvalues below 1/2 located as the jumps of the Sturm count of the truncated
/// CalJ(lambda, mu_j) at 0, per subcritical branch. NoSubcriticalBranch if every branch
/// has mu <= 1; no branches at all (alpha = beta = 0) gives an empty result.
HSpectrumResult h_eigenvalues_below_threshold(const CouplingParams& params,
                                              double lambda_min = kDefaultLambdaMin, double tol = 1e-10,
                                              bool verify = true, const DoublingPolicy& policy = {});

struct EpsilonCount {
  std::size_t count = 0;
  std::vector<BranchMu> counted_branches;
  std::vector<std::size_t> per_branch;
  std::vector<std::string> warnings;
};

/// sum_j N_+(mu_j, J(eps)) over branches with mu_j > 1.
EpsilonCount count_below_epsilon(const CouplingParams& params, double epsilon,
                                 const DoublingPolicy& policy = {});

struct Discrete2Check {
  std::size_t lhs = 0;
  std::size_t rhs = 0;
  std::size_t bound = 0;
  bool ok = false;
  double lambda_min = 0.0;
};

Discrete2Check discrete2_check(const CouplingParams& params, const DoublingPolicy& policy = {});

struct AsymptoticsRow {
  double mu = 0.0;
  std::size_t counted = 0;
  double predicted = 0.0;
  double ratio = 0.0;
  std::size_t size = 0;
};

/// N_+(mu, J0bar) stabilized under doubling, against 1/(4 sqrt2 sqrt(mu - 1)).
AsymptoticsRow count_asymptotics_point(double mu, const DoublingPolicy& policy = {});
std::vector<AsymptoticsRow> count_asymptotics_curve(const std::vector<double>& mus,
                                                    const DoublingPolicy& policy = {});

/// Beta = 0 form of the same law in alpha: 2^{1/4}/4 sqrt(alpha/(4 + |gamma|^2 - 2 sqrt2 alpha)).
double beta0_count_prediction(double alpha, cplx gamma);

}  // namespace speclab
