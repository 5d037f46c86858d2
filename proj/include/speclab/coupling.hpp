#pragma once

// Parameter algebra for the four-parameter contact interaction (alpha, beta, gamma):
// the omega vector, the Hermitian coupling matrix Sigma and its eigen-decomposition,
// the two Jacobi coupling constants mu1/mu2 and the critical hypersurface.

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace speclab {

using cplx = std::complex<double>;

inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kTwoSqrt2 = 2.0 * kSqrt2;
inline constexpr double kDefaultCriticalTol = 1e-10;

struct CouplingParams {
  double alpha = 0.0;
  double beta = 0.0;
  cplx gamma{0.0, 0.0};
  /// Set when the mirror map (alpha, beta) -> (-alpha, -beta) has been applied an odd number of times.
  bool mirrored = false;
};

/// Validating constructor; throws InvalidParameters on non-finite input.
CouplingParams make_params(double alpha, double beta, cplx gamma = {});

/// A coupling constant that is either finite or the explicit "divergent" marker.
/// Never produced by a floating-point division by zero.
class MuValue {
 public:
  static constexpr MuValue divergent() { return MuValue(); }
  constexpr explicit MuValue(double v) : value_(v), divergent_(false) {}

  constexpr bool is_divergent() const { return divergent_; }
  /// Throws std::logic_error on the divergent marker.
  double value() const;
  std::string to_string() const;

  friend bool operator==(const MuValue&, const MuValue&) = default;

 private:
  constexpr MuValue() = default;
  double value_ = 0.0;
  bool divergent_ = true;
};

using Vec2c = std::array<cplx, 2>;
using Mat2c = std::array<Vec2c, 2>;

struct CouplingDerived {
  std::array<double, 4> omega{};
  Mat2c sigma{};
  /// omega0 + sqrt(omega1^2 + omega2^2 + omega3^2); pairs with k2 and mu2.
  double sigma_eig_plus = 0.0;
  /// omega0 - sqrt(...); pairs with k1 and mu1.
  double sigma_eig_minus = 0.0;
  /// Unit-norm eigenvectors (K_+, K_-) of sigma.
  Vec2c k1{};
  Vec2c k2{};
  /// Present only when beta != 0.
  std::optional<MuValue> mu1;
  std::optional<double> mu2;

  double radical() const { return 0.5 * (sigma_eig_plus - sigma_eig_minus); }
  /// True when sigma is a multiple of the identity (gamma = 0, alpha*beta = 4).
  bool degenerate() const { return radical() == 0.0; }
};

CouplingDerived derive(const CouplingParams& params);

/// mu for beta = 0: (4 + |gamma|^2) / (2 sqrt2 alpha). Throws InvalidParameters for alpha = 0.
double mu_beta_zero(const CouplingParams& params);

enum class Branch { Branch1, Branch2, BetaZero };
enum class TransitionKind { Subcritical, Critical, Supercritical, NonpositiveOrDivergent };

std::string_view to_string(Branch b);
std::string_view to_string(TransitionKind k);

struct TransitionClass {
  Branch branch;
  TransitionKind kind;
  MuValue mu;
};

TransitionKind classify_mu(const MuValue& mu, double tol);

/// One entry per Jacobi branch, computed on the canonicalized parameters.
std::vector<TransitionClass> classify(const CouplingParams& params, double tol = kDefaultCriticalTol);

CouplingParams mirror(const CouplingParams& params);

/// Applies the mirror map when beta < 0, or when beta = 0 and alpha < 0.
CouplingParams canonicalize(const CouplingParams& params);

struct BranchMu {
  Branch branch;
  MuValue mu;
};

/// Branch coupling constants of the canonicalized parameters. Empty for alpha = beta = 0
/// (no Jacobi branch: the interaction reduces to the beta = 0 boundary relation only).
std::vector<BranchMu> branch_mus(const CouplingParams& params);

/// The alpha at which the relevant branch's mu equals 1 on the slice (beta, gamma).
/// beta = 0 returns (4 + |gamma|^2)/(2 sqrt2). Throws InvalidParameters for beta < 0 and
/// SingularFormula for beta = 2 sqrt2 with gamma != 0 (no crossing exists there).
double critical_alpha(double beta, cplx gamma);

/// Branch(es) whose mu crosses 1 at critical_alpha; both at beta = 2 sqrt2.
std::vector<Branch> critical_branches(double beta, cplx gamma);

}  // namespace speclab
