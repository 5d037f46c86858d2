#include "speclab/jacobi_ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "speclab/error.hpp"

namespace speclab {

double d_coefficient(std::size_t n) {
  if (n == 0) return 0.0;
  const double x = static_cast<double>(n);
  return std::sqrt(x) * std::sqrt(std::sqrt((x + 0.5) * (x - 0.5)));
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double jeps_entry(std::size_t n, double eps) {
  const double x = static_cast<double>(n);
  return std::sqrt(x) / (2.0 * std::sqrt(std::sqrt((x + eps) * (x - 1.0 + eps))));
}

}  // namespace

void validate(const JacobiFamily& family) {
  std::visit(overloaded{
                 [](const CalJ0& f) {
                   if (!std::isfinite(f.mu)) throw Error(ErrorKind::InvalidParameters, "mu must be finite");
                 },
                 [](const CalJ& f) {
                   if (!std::isfinite(f.mu) || !std::isfinite(f.lambda)) {
                     throw Error(ErrorKind::InvalidParameters, "mu and lambda must be finite");
                   }
                   if (!(f.lambda < 0.5)) {
                     throw Error(ErrorKind::BranchCut,
                                 "lambda must be below 1/2 for a real symmetric truncation, got " +
                                     std::to_string(f.lambda));
                   }
                 },
                 [](const Jeps& f) {
                   if (!(f.epsilon > 0.0) || !std::isfinite(f.epsilon)) {
                     throw Error(ErrorKind::InvalidParameters,
                                 "epsilon must be positive because j1,0 = \xe2\x88\x9e at epsilon = 0");
                   }
                 },
                 [](const J0bar&) {},
             },
             family);
}

TridiagonalMatrix build(const JacobiFamily& family, std::size_t n) {
  if (n < 2) throw Error(ErrorKind::InvalidParameters, "truncation size must be at least 2");
  validate(family);
  std::vector<double> diag(n, 0.0), off(n - 1, 0.0);
  std::visit(overloaded{
                 [&](const CalJ0& f) {
                   for (std::size_t i = 0; i < n; ++i) diag[i] = 2.0 * f.mu * (static_cast<double>(i) + 0.5);
                   for (std::size_t i = 1; i < n; ++i) off[i - 1] = d_coefficient(i);
                 },
                 [&](const CalJ& f) {
                   for (std::size_t i = 0; i < n; ++i) {
                     const double a = static_cast<double>(i) + 0.5;
                     diag[i] = 2.0 * f.mu * std::sqrt(a) * std::sqrt(a - f.lambda);
                   }
                   for (std::size_t i = 1; i < n; ++i) off[i - 1] = d_coefficient(i);
                 },
                 [&](const Jeps& f) {
                   for (std::size_t i = 1; i < n; ++i) off[i - 1] = jeps_entry(i, f.epsilon);
                 },
                 [&](const J0bar&) {
                   // Row k holds index k+1, so off[k-1] couples indices k and k+1.
                   for (std::size_t k = 1; k < n; ++k) {
                     const double m = static_cast<double>(k + 1);
                     off[k - 1] = 0.5 / std::sqrt(std::sqrt(1.0 - 1.0 / m));
                   }
                 },
             },
             family);
  return TridiagonalMatrix(std::move(diag), std::move(off));
}

std::size_t count_relative(const JacobiFamily& family, double level, std::size_t n, CountSide side) {
  const std::size_t below = sturm_count_below(build(family, n), level);
  return side == CountSide::Below ? below : n - below;
}

StabilizedCount count_stabilized(const JacobiFamily& family, double level, CountSide side,
                                 const DoublingPolicy& policy) {
  validate(family);
  std::size_t n = std::max<std::size_t>(policy.start, 2);
  std::size_t prev = count_relative(family, level, n, side);
  while (2 * n <= policy.cap) {
    n *= 2;
    const std::size_t cur = count_relative(family, level, n, side);
    if (cur == prev) return {cur, n / 2};
    prev = cur;
  }
  throw Error(ErrorKind::NonConvergence,
              "count did not stabilize under doubling up to N = " + std::to_string(policy.cap));
}

double compact_difference_tail(double lambda, double mu, std::size_t n) {
  validate(CalJ{lambda, mu});
  if (n < 2) throw Error(ErrorKind::InvalidParameters, "N must be at least 2");
  double worst = 0.0;
  for (std::size_t i = n / 2; i < n; ++i) {
    const double a = static_cast<double>(i) + 0.5;
    const double u = std::sqrt(1.0 - lambda / a);
    // Closed form of the difference; the naive subtraction loses all digits at large n.
    worst = std::max(worst, std::abs(mu * lambda * lambda / (a * (1.0 + u) * (1.0 + u))));
  }
  return worst;
}

TransitionScanReport transition_scan(double mu, const std::vector<std::size_t>& sizes,
                                     std::pair<double, double> window, double tol) {
  if (!(window.first < window.second)) throw Error(ErrorKind::InvalidParameters, "window requires a < b");
  if (sizes.empty() || !std::is_sorted(sizes.begin(), sizes.end()) || sizes.front() < 2) {
    throw Error(ErrorKind::InvalidParameters, "sizes must be ascending and at least 2");
  }
  TransitionScanReport rep;
  rep.mu = mu;
  rep.window = window;
  rep.sizes = sizes;
  for (std::size_t n : sizes) {
    const TridiagonalMatrix t = build(CalJ0{mu}, n);
    rep.smallest_eigs.push_back(smallest_eigenvalue(t, tol));
    rep.window_counts.push_back(sturm_count_below(t, window.second) - sturm_count_below(t, window.first));
  }
  return rep;
}

}  // namespace speclab
