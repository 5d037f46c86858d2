#include "speclab/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "speclab/error.hpp"
#include "speclab/recurrence.hpp"

namespace speclab {

double hermite_eval(std::size_t n, double y) {
  double prev = 0.0;
  double cur = std::exp(-0.5 * y * y) / std::sqrt(std::sqrt(std::numbers::pi));
  for (std::size_t k = 0; k < n; ++k) {
    const double next = (kSqrt2 * y * cur - std::sqrt(static_cast<double>(k)) * prev) /
                        std::sqrt(static_cast<double>(k + 1));
    prev = cur;
    cur = next;
  }
  return cur;
}

ModeTrialFunction::ModeTrialFunction(std::vector<ModeProfile> modes) : modes_(std::move(modes)) {
  std::sort(modes_.begin(), modes_.end(), [](const auto& x, const auto& y) { return x.n < y.n; });
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const ModeProfile& m = modes_[i];
    if (i > 0 && modes_[i - 1].n == m.n) {
      throw Error(ErrorKind::InvalidParameters, "mode " + std::to_string(m.n) + " given twice");
    }
    if (!(m.delta > 0.0) || !std::isfinite(m.delta)) {
      throw Error(ErrorKind::InvalidParameters, "decay rate must be positive and finite");
    }
    if (!std::isfinite(std::abs(m.a)) || !std::isfinite(std::abs(m.b))) {
      throw Error(ErrorKind::InvalidParameters, "boundary values must be finite");
    }
  }
}

const ModeProfile* ModeTrialFunction::find(std::size_t n) const {
  auto it = std::lower_bound(modes_.begin(), modes_.end(), n, [](const ModeProfile& m, std::size_t k) {
    return m.n < k;
  });
  return it != modes_.end() && it->n == n ? &*it : nullptr;
}

FormValues evaluate_forms(const ModeTrialFunction& trial, const CouplingParams& params) {
  FormValues out;
  for (const ModeProfile& m : trial.modes()) {
    const double w = std::norm(m.a) + std::norm(m.b);
    out.norm_squared += w / (2.0 * m.delta);
    out.a0 += w * (0.5 * m.delta + (static_cast<double>(m.n) + 0.5) / (2.0 * m.delta));
  }

  double boundary = 0.0;
  if (params.beta != 0.0) {
    const CouplingDerived d = derive(params);
    for (const ModeProfile& m : trial.modes()) {
      if (m.n == 0) continue;
      const ModeProfile* below = trial.find(m.n - 1);
      if (below == nullptr) continue;
      const Vec2c v{below->a, below->b};
      const cplx sv0 = d.sigma[0][0] * v[0] + d.sigma[0][1] * v[1];
      const cplx sv1 = d.sigma[1][0] * v[0] + d.sigma[1][1] * v[1];
      const cplx q = std::conj(m.a) * sv0 + std::conj(m.b) * sv1;
      boundary += std::sqrt(static_cast<double>(m.n)) / kTwoSqrt2 * q.real();
    }
    out.b_sum = boundary / params.beta;
  } else {
    const cplx half_conj_gamma = 0.5 * std::conj(params.gamma);
    for (const ModeProfile& m : trial.modes()) {
      const cplx fp = m.a + m.b, fm = m.a - m.b;
      const double gap = std::abs(fm + half_conj_gamma * fp);
      if (gap > kBeta0ConstraintTol * std::max(1.0, std::abs(m.a) + std::abs(m.b))) {
        throw Error(ErrorKind::Beta0ConstraintViolated,
                    "mode " + std::to_string(m.n) + " violates f_- = -(conj(gamma)/2) f_+ by " +
                        std::to_string(gap));
      }
    }
    for (const ModeProfile& m : trial.modes()) {
      if (m.n == 0) continue;
      const ModeProfile* below = trial.find(m.n - 1);
      if (below == nullptr) continue;
      const cplx fp = m.a + m.b, fq = below->a + below->b;
      boundary += std::sqrt(static_cast<double>(m.n)) * (std::conj(fp) * fq).real();
    }
    out.b_sum = 0.25 * params.alpha * kSqrt2 * boundary;
  }
  out.full = out.a0 + out.b_sum;
  return out;
}

ModeTrialFunction project_beta0(const ModeTrialFunction& trial, cplx gamma) {
  std::vector<ModeProfile> modes = trial.modes();
  for (ModeProfile& m : modes) {
    const cplx fp = m.a + m.b;
    const cplx fm = -0.5 * std::conj(gamma) * fp;
    m.a = 0.5 * (fp + fm);
    m.b = 0.5 * (fp - fm);
  }
  return ModeTrialFunction(std::move(modes));
}

double lower_bound_constant(const CouplingParams& params) {
  const CouplingParams p = canonicalize(params);
  if (p.beta == 0.0) return 1.0 - p.alpha / kSqrt2;
  const CouplingDerived d = derive(p);
  const double r = std::hypot(d.omega[1], d.omega[2], d.omega[3]);
  return 1.0 - (std::abs(d.omega[0]) + r) / (kTwoSqrt2 * p.beta);
}

ModeTrialFunction saturating_trial(double delta, int branch, const CouplingDerived& derived,
                                   std::size_t mode) {
  if (!derived.mu2.has_value()) {
    throw Error(ErrorKind::InvalidParameters, "saturating trial needs beta != 0");
  }
  if (branch != 1 && branch != 2) throw Error(ErrorKind::InvalidParameters, "branch must be 1 or 2");
  if (!(delta > 0.0)) throw Error(ErrorKind::InvalidParameters, "delta must be positive");
  const Vec2c& k = branch == 1 ? derived.k1 : derived.k2;
  const double s = 1.0 / std::sqrt(delta);
  return ModeTrialFunction({ModeProfile{mode, k[0] * s, k[1] * s, delta}});
}

double trace_energy(cplx c, double kappa, double delta) {
  if (!(kappa > 0.0)) throw Error(ErrorKind::InvalidParameters, "decay rate must be positive");
  return std::norm(c) * (kappa * kappa + delta * delta) / (2.0 * kappa);
}

double default_lambda_min(const CouplingParams& params) {
  const double c = lower_bound_constant(params);
  return std::max(0.5 - 10.0, c > 0.0 ? 0.5 * c : -std::numeric_limits<double>::infinity());
}

namespace {

std::size_t nu(double mu, double lambda, std::size_t n) {
  return sturm_count_below(build(CalJ{lambda, mu}, n), 0.0);
}

void collect_jumps(double mu, std::size_t n, double lo, double hi, std::size_t clo, std::size_t chi,
                   double tol, std::vector<double>& out) {
  if (chi <= clo) return;
  const double mid = 0.5 * (lo + hi);
  if (hi - lo <= tol || mid <= lo || mid >= hi) {
    out.insert(out.end(), chi - clo, mid);
    return;
  }
  const std::size_t cm = nu(mu, mid, n);
  collect_jumps(mu, n, lo, mid, clo, cm, tol, out);
  collect_jumps(mu, n, mid, hi, cm, chi, tol, out);
}

std::vector<double> jumps(double mu, std::size_t n, double lo, double hi, double tol) {
  std::vector<double> out;
  collect_jumps(mu, n, lo, hi, nu(mu, lo, n), nu(mu, hi, n), tol, out);
  return out;
}

struct BranchJumps {
  std::vector<double> lambdas;
  std::size_t size = 0;
};

BranchJumps stabilized_jumps(double mu, double lo, double hi, double tol, const DoublingPolicy& policy) {
  std::size_t n = std::max<std::size_t>(policy.start, 2);
  std::vector<double> prev = jumps(mu, n, lo, hi, tol);
  while (2 * n <= policy.cap) {
    n *= 2;
    std::vector<double> cur = jumps(mu, n, lo, hi, tol);
    bool same = cur.size() == prev.size();
    for (std::size_t i = 0; same && i < cur.size(); ++i) same = std::abs(cur[i] - prev[i]) <= 2.0 * tol;
    if (same) return {std::move(cur), n};
    prev = std::move(cur);
  }
  throw Error(ErrorKind::NonConvergence, "eigenvalue list did not stabilize under doubling");
}

std::vector<BranchMu> subcritical(const std::vector<BranchMu>& all) {
  std::vector<BranchMu> out;
  for (const auto& bm : all) {
    if (classify_mu(bm.mu, kDefaultCriticalTol) == TransitionKind::Subcritical) out.push_back(bm);
  }
  return out;
}

std::vector<BranchMu> require_subcritical(const CouplingParams& params) {
  auto sub = subcritical(branch_mus(params));
  if (sub.empty()) {
    throw Error(ErrorKind::NoSubcriticalBranch, "no branch with mu > 1: nothing is counted below 1/2");
  }
  return sub;
}

}  // namespace

HSpectrumResult h_eigenvalues_below_threshold(const CouplingParams& params, double lambda_min, double tol,
                                              bool verify, const DoublingPolicy& policy) {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidParameters, "tol must be positive");
  HSpectrumResult res;
  res.params = params;
  res.tol = tol;
  res.branch_mus = branch_mus(params);
  res.lambda_min = std::isnan(lambda_min) ? default_lambda_min(params) : lambda_min;
  if (res.branch_mus.empty()) return res;
  if (!(res.lambda_min < 0.5 - kThresholdGap)) {
    throw Error(ErrorKind::InvalidParameters, "lambda_min must lie below 1/2");
  }
  if (subcritical(res.branch_mus).empty()) {
    throw Error(ErrorKind::NoSubcriticalBranch, "no branch with mu > 1: no eigenvalues are searched");
  }

  const double hi = 0.5 - kThresholdGap;
  for (const BranchMu& bm : res.branch_mus) {
    if (classify_mu(bm.mu, kDefaultCriticalTol) != TransitionKind::Subcritical) {
      res.per_branch_counts.push_back(0);
      continue;
    }
    const double mu = bm.mu.value();
    BranchJumps bj = stabilized_jumps(mu, res.lambda_min, hi, tol, policy);
    res.n_modes = std::max(res.n_modes, bj.size);
    res.per_branch_counts.push_back(bj.lambdas.size());
    for (double lam : bj.lambdas) {
      HEigenvalue ev{lam, bm.branch, mu, std::numeric_limits<double>::quiet_NaN(),
                     std::numeric_limits<double>::quiet_NaN()};
      if (verify) {
        const SecularRoot root = refine_secular_root(mu, lam);
        ev.secular_defect = root.defect;
        if (root.bracketed) {
          ev.secular_lambda = root.lambda;
          res.method_agreement = std::max(res.method_agreement, std::abs(root.lambda - lam));
        } else {
          res.method_agreement = std::numeric_limits<double>::infinity();
        }
      }
      res.eigenvalues.push_back(ev);
    }
  }
  std::stable_sort(res.eigenvalues.begin(), res.eigenvalues.end(),
                   [](const HEigenvalue& x, const HEigenvalue& y) { return x.lambda < y.lambda; });
  return res;
}

EpsilonCount count_below_epsilon(const CouplingParams& params, double epsilon, const DoublingPolicy& policy) {
  validate(Jeps{epsilon});
  EpsilonCount out;
  const auto all = branch_mus(params);
  if (all.empty()) out.warnings.push_back("alpha = beta = 0: no Jacobi branch, count is 0");
  for (const BranchMu& bm : all) {
    if (classify_mu(bm.mu, kDefaultCriticalTol) != TransitionKind::Subcritical) {
      out.warnings.push_back(std::string(to_string(bm.branch)) + " has mu = " + bm.mu.to_string() +
                             ", only mu > 1 branches are counted");
      continue;
    }
    const StabilizedCount sc = count_stabilized(Jeps{epsilon}, bm.mu.value(), CountSide::Above, policy);
    out.counted_branches.push_back(bm);
    out.per_branch.push_back(sc.count);
    out.count += sc.count;
  }
  return out;
}

Discrete2Check discrete2_check(const CouplingParams& params, const DoublingPolicy& policy) {
  const auto sub = require_subcritical(params);
  Discrete2Check out;
  out.bound = sub.size() == 2 ? 2 : 1;

  // Push lambda_min down until no branch has a Sturm count left below it.
  double lo = default_lambda_min(params);
  const std::size_t probe = std::max<std::size_t>(policy.start, 2);
  for (int k = 0;; ++k) {
    bool clear = true;
    for (const auto& bm : sub) clear = clear && nu(bm.mu.value(), lo, probe) == 0;
    if (clear) break;
    if (k == 30) throw Error(ErrorKind::NonConvergence, "could not find a lambda_min below the spectrum");
    lo = 0.5 - 2.0 * (0.5 - lo);
  }
  out.lambda_min = lo;

  const double hi = 0.5 - kThresholdGap;
  for (const auto& bm : sub) {
    const double mu = bm.mu.value();
    std::size_t n = probe;
    std::size_t prev = nu(mu, hi, n) - nu(mu, lo, n);
    for (;;) {
      if (2 * n > policy.cap) throw Error(ErrorKind::NonConvergence, "threshold count did not stabilize");
      n *= 2;
      const std::size_t cur = nu(mu, hi, n) - nu(mu, lo, n);
      if (cur == prev) break;
      prev = cur;
    }
    out.lhs += prev;
    out.rhs += count_stabilized(J0bar{}, mu, CountSide::Above, policy).count;
  }
  const std::size_t diff = out.lhs > out.rhs ? out.lhs - out.rhs : out.rhs - out.lhs;
  out.ok = diff <= out.bound;
  return out;
}

AsymptoticsRow count_asymptotics_point(double mu, const DoublingPolicy& policy) {
  if (!(mu > 1.0) || !std::isfinite(mu)) throw Error(ErrorKind::InvalidParameters, "asymptotics need mu > 1");
  AsymptoticsRow row;
  row.mu = mu;
  const StabilizedCount sc = count_stabilized(J0bar{}, mu, CountSide::Above, policy);
  row.counted = sc.count;
  row.size = sc.size;
  row.predicted = 1.0 / (4.0 * kSqrt2 * std::sqrt(mu - 1.0));
  row.ratio = static_cast<double>(row.counted) / row.predicted;
  return row;
}

std::vector<AsymptoticsRow> count_asymptotics_curve(const std::vector<double>& mus, const DoublingPolicy& policy) {
  std::vector<AsymptoticsRow> out;
  for (double mu : mus) out.push_back(count_asymptotics_point(mu, policy));
  return out;
}

double beta0_count_prediction(double alpha, cplx gamma) {
  const double den = 4.0 + std::norm(gamma) - kTwoSqrt2 * alpha;
  if (!(alpha > 0.0) || !(den > 0.0)) {
    throw Error(ErrorKind::InvalidParameters, "prediction needs 0 < alpha < alpha_c");
  }
  return std::pow(2.0, 0.25) / 4.0 * std::sqrt(alpha / den);
}

}  // namespace speclab
