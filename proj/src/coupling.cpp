#include "speclab/coupling.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "speclab/error.hpp"

namespace speclab {

namespace {

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Eigenvector of a 2x2 Hermitian [[a, conj(b)], [b, c]] for eigenvalue e.
// Both row-derived candidates are valid; the larger one avoids the zero vector.
Vec2c eigenvector(double a, cplx b, double c, double e) {
  Vec2c from_row1{std::conj(b), cplx(e - a)};
  Vec2c from_row2{cplx(e - c), b};
  auto norm2 = [](const Vec2c& v) { return std::norm(v[0]) + std::norm(v[1]); };
  Vec2c v = norm2(from_row2) >= norm2(from_row1) ? from_row2 : from_row1;
  double len = std::sqrt(norm2(v));
  return {v[0] / len, v[1] / len};
}

}  // namespace

CouplingParams make_params(double alpha, double beta, cplx gamma) {
  if (!std::isfinite(alpha) || !std::isfinite(beta) || !finite(gamma)) {
    throw Error(ErrorKind::InvalidParameters, "coupling parameters must be finite");
  }
  return CouplingParams{alpha, beta, gamma, false};
}

double MuValue::value() const {
  if (divergent_) throw std::logic_error("MuValue::value on divergent marker");
  return value_;
}

std::string MuValue::to_string() const {
  if (divergent_) return "infinity";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", value_);
  return buf;
}

CouplingDerived derive(const CouplingParams& p) {
  CouplingDerived d;
  const double g = std::norm(p.gamma);
  const double ab = p.alpha * p.beta;
  d.omega = {4.0 + ab + g, ab + g - 4.0, 4.0 * p.gamma.imag(), 4.0 * p.gamma.real()};
  const auto& w = d.omega;
  d.sigma = {Vec2c{cplx(w[0] + w[3]), cplx(w[1], -w[2])},
             Vec2c{cplx(w[1], w[2]), cplx(w[0] - w[3])}};

  const double r = std::hypot(w[1], w[2], w[3]);
  // (w0 - r)(w0 + r) = 16 alpha beta; take the cancellation-free factor directly.
  if (w[0] > 0.0) {
    d.sigma_eig_plus = w[0] + r;
    d.sigma_eig_minus = 16.0 * ab / d.sigma_eig_plus;
  } else {
    d.sigma_eig_minus = w[0] - r;
    d.sigma_eig_plus = 16.0 * ab / d.sigma_eig_minus;  // w0 <= 0 forces r >= 8
  }

  if (r == 0.0) {
    d.k1 = {cplx(1.0), cplx(0.0)};
    d.k2 = {cplx(0.0), cplx(1.0)};
  } else {
    const double a = w[0] + w[3], c = w[0] - w[3];
    const cplx b(w[1], w[2]);
    d.k1 = eigenvector(a, b, c, w[0] - r);
    d.k2 = eigenvector(a, b, c, w[0] + r);
  }

  if (p.beta != 0.0) {
    const double s = kTwoSqrt2 * p.beta;
    if (p.alpha == 0.0) {
      d.mu1 = MuValue::divergent();
    } else if (w[0] > 0.0) {
      d.mu1 = MuValue((w[0] + r) / (4.0 * kSqrt2 * p.alpha));
    } else {
      d.mu1 = MuValue(s / (w[0] - r));
    }
    d.mu2 = w[0] > 0.0 ? s / (w[0] + r) : (w[0] - r) / (4.0 * kSqrt2 * p.alpha);
  }
  return d;
}

double mu_beta_zero(const CouplingParams& p) {
  if (p.beta != 0.0) throw Error(ErrorKind::InvalidParameters, "mu_beta_zero requires beta = 0");
  if (p.alpha == 0.0) {
    throw Error(ErrorKind::InvalidParameters, "alpha = beta = 0 has no Jacobi branch");
  }
  return (4.0 + std::norm(p.gamma)) / (kTwoSqrt2 * p.alpha);
}

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::Branch1: return "Branch1";
    case Branch::Branch2: return "Branch2";
    case Branch::BetaZero: return "BetaZero";
  }
  return "?";
}

std::string_view to_string(TransitionKind k) {
  switch (k) {
    case TransitionKind::Subcritical: return "Subcritical";
    case TransitionKind::Critical: return "Critical";
    case TransitionKind::Supercritical: return "Supercritical";
    case TransitionKind::NonpositiveOrDivergent: return "NonpositiveOrDivergent";
  }
  return "?";
}

TransitionKind classify_mu(const MuValue& mu, double tol) {
  if (mu.is_divergent() || mu.value() <= 0.0) return TransitionKind::NonpositiveOrDivergent;
  const double m = mu.value();
  if (std::abs(m - 1.0) <= tol) return TransitionKind::Critical;
  return m > 1.0 ? TransitionKind::Subcritical : TransitionKind::Supercritical;
}

CouplingParams mirror(const CouplingParams& p) {
  return CouplingParams{-p.alpha, -p.beta, p.gamma, !p.mirrored};
}

CouplingParams canonicalize(const CouplingParams& p) {
  if (p.beta < 0.0 || (p.beta == 0.0 && p.alpha < 0.0)) return mirror(p);
  return p;
}

std::vector<BranchMu> branch_mus(const CouplingParams& params) {
  const CouplingParams p = canonicalize(params);
  if (p.beta == 0.0) {
    if (p.alpha == 0.0) return {};
    return {{Branch::BetaZero, MuValue(mu_beta_zero(p))}};
  }
  const CouplingDerived d = derive(p);
  return {{Branch::Branch1, *d.mu1}, {Branch::Branch2, MuValue(*d.mu2)}};
}

std::vector<TransitionClass> classify(const CouplingParams& params, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidParameters, "tolerance must be positive");
  const CouplingParams p = canonicalize(params);
  if (p.beta == 0.0) mu_beta_zero(p);  // throws for alpha = 0
  std::vector<TransitionClass> out;
  for (const auto& bm : branch_mus(p)) out.push_back({bm.branch, classify_mu(bm.mu, tol), bm.mu});
  return out;
}

double critical_alpha(double beta, cplx gamma) {
  if (!std::isfinite(beta) || !finite(gamma)) {
    throw Error(ErrorKind::InvalidParameters, "parameters must be finite");
  }
  if (beta < 0.0) throw Error(ErrorKind::InvalidParameters, "critical_alpha requires beta >= 0");
  const double g = std::norm(gamma);
  if (beta == 0.0) return (4.0 + g) / kTwoSqrt2;
  const double t = kTwoSqrt2 - beta;
  if (t == 0.0) {
    if (g != 0.0) {
      throw Error(ErrorKind::SingularFormula,
                  "beta = 2 sqrt2 with gamma != 0: no mu branch reaches 1 on this slice");
    }
    return (4.0 - kSqrt2 * t) / beta;
  }
  return (kTwoSqrt2 * g / t - (g - 4.0) - kSqrt2 * t) / beta;
}

std::vector<Branch> critical_branches(double beta, cplx gamma) {
  if (beta == 0.0) return {Branch::BetaZero};
  critical_alpha(beta, gamma);  // validates
  const double t = kTwoSqrt2 - beta;
  if (t > 0.0) return {Branch::Branch1};
  if (t < 0.0) return {Branch::Branch2};
  return {Branch::Branch1, Branch::Branch2};
}

}  // namespace speclab
