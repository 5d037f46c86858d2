#include "speclab/recurrence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "speclab/error.hpp"
#include "speclab/jacobi_ops.hpp"

namespace speclab {

namespace {

constexpr int kRescaleBits = 512;

cplx ldexp_c(cplx z, int e) { return {std::ldexp(z.real(), e), std::ldexp(z.imag(), e)}; }

double abs_max(cplx z) { return std::max(std::abs(z.real()), std::abs(z.imag())); }

// Brings a running triple back into [2^-512, 2^512] and reports the exponent shift.
int renormalize(cplx& a, cplx& b, cplx& c) {
  const double big = std::ldexp(1.0, kRescaleBits);
  const double small = std::ldexp(1.0, -kRescaleBits);
  const double m = std::max({abs_max(a), abs_max(b), abs_max(c)});
  if (m > big) {
    a = ldexp_c(a, -kRescaleBits);
    b = ldexp_c(b, -kRescaleBits);
    c = ldexp_c(c, -kRescaleBits);
    return kRescaleBits;
  }
  if (m != 0.0 && m < small) {
    a = ldexp_c(a, kRescaleBits);
    b = ldexp_c(b, kRescaleBits);
    c = ldexp_c(c, kRescaleBits);
    return -kRescaleBits;
  }
  return 0;
}

void require_finite(double mu, cplx lambda) {
  if (!std::isfinite(mu) || !std::isfinite(lambda.real()) || !std::isfinite(lambda.imag())) {
    throw Error(ErrorKind::InvalidParameters, "mu and lambda must be finite");
  }
}

}  // namespace

cplx zeta(std::size_t n, cplx lambda) {
  const double a = static_cast<double>(n) + 0.5;
  if (lambda.imag() == 0.0 && lambda.real() >= a) {
    throw Error(ErrorKind::OnBranchCut, "lambda = " + std::to_string(lambda.real()) +
                                            " lies on the cut [" + std::to_string(a) + ", inf)");
  }
  cplx z = std::sqrt(cplx(a - lambda.real(), -lambda.imag()));
  if (z.real() < 0.0) z = -z;
  if (!(z.real() > 0.0) || (lambda.imag() != 0.0 && !(z.imag() * lambda.imag() < 0.0))) {
    throw std::logic_error("zeta: branch conditions cannot both hold");
  }
  return z;
}

cplx p_coefficient(std::size_t n, double mu, cplx lambda) {
  return 2.0 * mu * std::sqrt(static_cast<double>(n) + 0.5) * zeta(n, lambda);
}

cplx RecurrenceSolution::value(std::size_t n) const { return ldexp_c(mant_.at(n), exp_.at(n)); }

cplx RecurrenceSolution::scaled(std::size_t n, int ref) const {
  return ldexp_c(mant_.at(n), exp_.at(n) - ref);
}

double RecurrenceSolution::log_abs(std::size_t n) const {
  const double m = std::abs(mant_.at(n));
  if (m == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(m) + exp_[n] * std::log(2.0);
}

cplx RecurrenceSolution::ratio(std::size_t n) const {
  return ldexp_c(mant_.at(n + 1) / mant_.at(n), exp_[n + 1] - exp_[n]);
}

void RecurrenceSolution::push(cplx mantissa, int exponent) {
  mant_.push_back(mantissa);
  exp_.push_back(exponent);
}

void RecurrenceSolution::rescale(cplx s, int e) {
  for (std::size_t i = 0; i < mant_.size(); ++i) {
    mant_[i] *= s;
    exp_[i] += e;
  }
}

void RecurrenceSolution::set(std::size_t n, cplx mantissa, int exponent) {
  mant_.at(n) = mantissa;
  exp_.at(n) = exponent;
}

void RecurrenceSolution::truncate(std::size_t count) {
  mant_.resize(count);
  exp_.resize(count);
}

void RecurrenceSolution::reverse() {
  std::reverse(mant_.begin(), mant_.end());
  std::reverse(exp_.begin(), exp_.end());
}

RecurrenceSolution iterate_forward(double mu, cplx lambda, cplx c0, std::size_t n) {
  require_finite(mu, lambda);
  if (n < 2) throw Error(ErrorKind::InvalidParameters, "N must be at least 2");
  RecurrenceSolution sol;
  sol.mu = mu;
  sol.lambda = lambda;
  sol.direction = Direction::Forward;
  sol.normalization = "C_0 = c0";

  cplx prev{};  // C_{k-1} * 2^-e
  cplx cur = c0;
  cplx nxt = -p_coefficient(0, mu, lambda) * cur / d_coefficient(1);
  int e = renormalize(prev, cur, nxt);
  sol.push(c0, 0);
  // c0 itself is stored unscaled; keep the running frame consistent with it.
  sol.push(nxt, e);
  prev = cur;
  cur = nxt;
  for (std::size_t k = 1; k < n; ++k) {
    nxt = -(p_coefficient(k, mu, lambda) * cur + d_coefficient(k) * prev) / d_coefficient(k + 1);
    e += renormalize(prev, cur, nxt);
    sol.push(nxt, e);
    prev = cur;
    cur = nxt;
  }
  return sol;
}

namespace {

RecurrenceSolution backward(double mu, cplx lambda, std::size_t n, std::size_t m) {
  require_finite(mu, lambda);
  if (n < 2) throw Error(ErrorKind::InvalidParameters, "N must be at least 2");
  const BirkhoffAdamsParams ba = birkhoff_adams_eval(mu, lambda);
  const int branch = minimal_branch(ba, mu, lambda);
  if (m == 0) m = n + std::max<std::size_t>(50, n / 10);
  if (m <= n) throw Error(ErrorKind::InvalidParameters, "backward start M must exceed N");

  RecurrenceSolution sol;
  sol.mu = mu;
  sol.lambda = lambda;
  sol.direction = Direction::Backward;

  // Seed (C_M, C_{M+1}) along the asymptotic minimal solution.
  cplx above = asymptotic_ratio(ba, branch, m);  // C_{k+1}
  cplx cur = 1.0;                                // C_k
  int e = 0;
  sol.push(cur, e);
  for (std::size_t k = m; k >= 1; --k) {
    cplx below = -(d_coefficient(k + 1) * above + p_coefficient(k, mu, lambda) * cur) / d_coefficient(k);
    e += renormalize(above, cur, below);
    sol.push(below, e);
    above = cur;
    cur = below;
  }
  sol.reverse();
  sol.truncate(n + 1);
  return sol;
}

}  // namespace

RecurrenceSolution minimal_solution_raw(double mu, cplx lambda, std::size_t n, std::size_t m) {
  RecurrenceSolution sol = backward(mu, lambda, n, m);
  sol.normalization = "C_M = 1 at the backward start";
  return sol;
}

RecurrenceSolution minimal_solution_backward(double mu, cplx lambda, std::size_t n, std::size_t m) {
  RecurrenceSolution sol = backward(mu, lambda, n, m);
  sol.rescale(1.0 / sol.mantissa(n), -sol.exponent(n));
  sol.normalization = "C_N = 1";
  return sol;
}

BirkhoffAdamsParams birkhoff_adams_eval(double mu, cplx lambda) {
  require_finite(mu, lambda);
  BirkhoffAdamsParams ba;
  ba.a0 = 2.0 * mu;
  ba.a1 = -mu * (1.0 + lambda);
  ba.b0 = 1.0;
  ba.b1 = -1.0;
  if (mu * mu == 1.0) {
    ba.root_case = RootCase::DoubleRoot;
    ba.lambda_plus = ba.lambda_minus = -mu;
    ba.delta = 2.0 * std::sqrt((ba.a0 * ba.a1 - 2.0 * ba.b1) / (2.0 * ba.b0));
    ba.kappa = 0.25 + ba.b1 / (2.0 * ba.b0);
    return ba;
  }
  const cplx s = std::sqrt(cplx(mu * mu - 1.0));
  ba.lambda_plus = -mu + s;
  ba.lambda_minus = -mu - s;
  auto exponent = [&](cplx l) { return (ba.a1 * l + ba.b1) / (ba.a0 * l + 2.0 * ba.b0); };
  ba.d_plus = exponent(ba.lambda_plus);
  ba.d_minus = exponent(ba.lambda_minus);
  return ba;
}

int minimal_branch(const BirkhoffAdamsParams& ba, double mu, cplx lambda) {
  if (std::abs(mu) <= 1.0 && lambda.imag() == 0.0) {
    throw Error(ErrorKind::NoDominanceSplit, "|mu| <= 1 with real lambda: both solutions oscillate");
  }
  if (ba.root_case == RootCase::DoubleRoot) {
    const double re = ba.delta.real();
    if (std::abs(re) <= 1e-14 * std::abs(ba.delta) || ba.delta == 0.0) {
      throw Error(ErrorKind::NoDominanceSplit, "double root with purely oscillatory exponent");
    }
    return re > 0.0 ? -1 : 1;
  }
  const double mp = std::abs(ba.lambda_plus), mm = std::abs(ba.lambda_minus);
  if (std::abs(mp - mm) > 1e-12 * std::max(mp, mm)) return mp < mm ? 1 : -1;
  const double rp = ba.d_plus.real(), rm = ba.d_minus.real();
  if (std::abs(rp - rm) <= 1e-12) {
    throw Error(ErrorKind::NoDominanceSplit, "both solutions have equal growth");
  }
  return rp < rm ? 1 : -1;
}

cplx asymptotic_ratio(const BirkhoffAdamsParams& ba, int branch, std::size_t n) {
  if (n == 0) throw Error(ErrorKind::InvalidParameters, "asymptotic ratio needs n >= 1");
  const double x = static_cast<double>(n);
  const double logstep = std::log1p(1.0 / x);
  if (ba.root_case == RootCase::DoubleRoot) {
    const double dsq = 1.0 / (std::sqrt(x + 1.0) + std::sqrt(x));
    return ba.lambda_plus * std::exp(static_cast<double>(branch) * ba.delta * dsq + ba.kappa * logstep);
  }
  const cplx l = branch > 0 ? ba.lambda_plus : ba.lambda_minus;
  const cplx d = branch > 0 ? ba.d_plus : ba.d_minus;
  return l * std::exp(d * logstep);
}

IdentityCheck identity_residual(const RecurrenceSolution& sol, std::size_t k) {
  if (sol.size() < 2 || k + 1 > sol.last()) {
    throw Error(ErrorKind::InvalidParameters, "identity index must satisfy k + 1 <= N");
  }
  int ref = std::numeric_limits<int>::min();
  for (std::size_t n = 0; n <= k + 1; ++n) {
    if (sol.mantissa(n) != 0.0) ref = std::max(ref, sol.exponent(n));
  }
  if (ref == std::numeric_limits<int>::min()) ref = 0;
  IdentityCheck out;
  double lhs = 0.0;
  for (std::size_t n = 0; n <= k; ++n) {
    lhs += std::norm(sol.scaled(n, ref)) * std::sqrt(static_cast<double>(n) + 0.5) * zeta(n, sol.lambda).imag();
  }
  out.lhs = 2.0 * sol.mu * lhs;
  const cplx ck = sol.scaled(k, ref), ck1 = sol.scaled(k + 1, ref);
  const double dk1 = d_coefficient(k + 1);
  out.rhs = -dk1 * (ck1 * std::conj(ck)).imag();
  out.scale = dk1 * std::abs(ck1) * std::abs(ck);
  out.residual = std::abs(out.lhs - out.rhs) / (std::abs(out.lhs) + std::abs(out.rhs) + 1e-300);
  return out;
}

double cross_defect(const RecurrenceSolution& c, const RecurrenceSolution& d, std::size_t n) {
  if (n + 1 > c.last() || n + 1 > d.last()) throw Error(ErrorKind::InvalidParameters, "index out of range");
  const int rc = std::max(c.exponent(n), c.exponent(n + 1));
  const int rd = std::max(d.exponent(n), d.exponent(n + 1));
  const cplx c0 = c.scaled(n, rc), c1 = c.scaled(n + 1, rc);
  const cplx d0 = d.scaled(n, rd), d1 = d.scaled(n + 1, rd);
  const double norm = (std::abs(c0) + std::abs(c1)) * (std::abs(d0) + std::abs(d1));
  if (norm == 0.0) throw Error(ErrorKind::InvalidParameters, "cross defect of a zero solution");
  return std::abs(c0 * d1 - c1 * d0) / norm;
}

std::size_t recommended_length(double mu, cplx lambda) {
  const BirkhoffAdamsParams ba = birkhoff_adams_eval(mu, lambda);
  minimal_branch(ba, mu, lambda);  // throws when no split exists
  constexpr double kDigits = 80.0;  // e-folds of separation between the two solutions
  constexpr double kCap = 2e6;
  double n = 0.0;
  if (ba.root_case == RootCase::DoubleRoot) {
    const double re = std::abs(ba.delta.real());
    n = std::pow(kDigits / (2.0 * re), 2.0);
  } else {
    const double gap = std::abs(std::log(std::abs(ba.lambda_plus) / std::abs(ba.lambda_minus)));
    if (gap > 1e-12) {
      n = kDigits / gap;
    } else {
      n = 2e4;  // only an algebraic split n^{Re d}; the asymptotic seed supplies the rest
    }
  }
  return static_cast<std::size_t>(std::clamp(n + 50.0, 200.0, kCap));
}

double secular_defect(double mu, cplx lambda, std::size_t n) {
  if (n == 0) n = recommended_length(mu, lambda);
  const RecurrenceSolution minimal = minimal_solution_backward(mu, lambda, n);
  RecurrenceSolution seeded;
  seeded.push(1.0, 0);
  seeded.push(-p_coefficient(0, mu, lambda) / d_coefficient(1), 0);
  return cross_defect(seeded, minimal, 0);
}

double secular_function(double mu, double lambda, std::size_t n) {
  if (!(lambda < 0.5)) throw Error(ErrorKind::BranchCut, "secular function needs lambda < 1/2");
  if (n == 0) n = recommended_length(mu, lambda);
  const RecurrenceSolution raw = minimal_solution_raw(mu, lambda, n);
  const int ref = std::max(raw.exponent(0), raw.exponent(1));
  const double d0 = raw.scaled(0, ref).real(), d1 = raw.scaled(1, ref).real();
  const double p0 = p_coefficient(0, mu, lambda).real();
  const double dd1 = d_coefficient(1);
  return (dd1 * d1 + p0 * d0) / ((dd1 + std::abs(p0)) * (std::abs(d0) + std::abs(d1)));
}

SecularRoot refine_secular_root(double mu, double guess, double tol) {
  const std::size_t n = recommended_length(mu, guess);
  auto f = [&](double x) { return secular_function(mu, x, n); };
  const double top = std::nextafter(0.5, 0.0);
  SecularRoot out{guess, std::abs(f(guess)), false};
  if (out.defect == 0.0) {
    out.bracketed = true;
    return out;
  }
  for (double h = 1e-7; h <= 1e-2 * (1.0 + 1e-12); h *= 2.0) {
    double lo = guess - h, hi = std::min(guess + h, top);
    double flo = f(lo), fhi = f(hi);
    if ((flo < 0.0) == (fhi < 0.0)) continue;
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double fm = f(mid);
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    out.lambda = 0.5 * (lo + hi);
    out.defect = std::abs(f(out.lambda));
    out.bracketed = true;
    return out;
  }
  return out;
}

}  // namespace speclab
