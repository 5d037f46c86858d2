// One PASS/FAIL line per acceptance criterion, with the measured quantities.

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "speclab/coupling.hpp"
#include "speclab/error.hpp"
#include "speclab/hamiltonian.hpp"
#include "speclab/jacobi_ops.hpp"
#include "speclab/recurrence.hpp"
#include "speclab/tridiag.hpp"

using namespace speclab;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... xs) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, xs...);
  return buf;
}

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && secs > budget_s) {
    v.pass = false;
    v.detail += fmt("; over the %.0f s budget", budget_s);
  }
  if (!v.pass) ++failures;
  std::printf("[%s] %2d %s (%.1f s): %s\n", v.pass ? "PASS" : "FAIL", id, name, secs, v.detail.c_str());
  std::fflush(stdout);
}

Verdict oracle_equivalence() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> size(2, 300);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0;
  std::size_t count_mismatch = 0, levels = 0;
  for (int m = 0; m < 1000; ++m) {
    const std::size_t n = size(rng);
    std::vector<double> d(n), e(n - 1);
    const double scale = std::pow(10.0, 2 * u(rng));
    for (auto& x : d) x = scale * u(rng);
    for (auto& x : e) x = scale * u(rng);
    const TridiagonalMatrix t(d, e);
    const auto dense = dense_eigen_oracle(t);
    const auto [lo, hi] = t.gershgorin();
    const auto rep = eigenvalues_in_window(t, lo - 1, hi + 1, 1e-13 * (1 + t.inf_norm()));
    if (rep.eigenvalues.size() != dense.size()) {
      ++count_mismatch;
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(rep.eigenvalues[i] - dense[i]));
    for (int k = 0; k < 10; ++k, ++levels) {
      const double level = lo + (hi - lo) * 0.5 * (u(rng) + 1);
      const auto want = static_cast<std::size_t>(std::lower_bound(dense.begin(), dense.end(), level) - dense.begin());
      if (sturm_count_below(t, level) != want) ++count_mismatch;
    }
  }
  return {worst <= 1e-8 && count_mismatch == 0,
          fmt("max |bisection - dense| = %.2e, count mismatches %zu of %zu levels", worst, count_mismatch, levels)};
}

Verdict transition() {
  std::ostringstream d;
  bool ok = true;
  for (double mu : {1.01, 1.5, 2.0}) {
    double prev = NAN, last_change = NAN, min_eig = INFINITY;
    for (std::size_t n = 2; n <= (std::size_t{1} << 14); n *= 2) {
      const double e = smallest_eigenvalue(build(CalJ0{mu}, n), 1e-13);
      min_eig = std::min(min_eig, e);
      if (!std::isnan(prev)) last_change = std::abs(e - prev);
      prev = e;
    }
    ok = ok && min_eig > 0 && last_change <= 1e-6;
    d << fmt("mu=%g min eig %.3e, last doubling change %.1e; ", mu, min_eig, last_change);
  }
  for (double mu : {0.3, 0.7}) {
    const auto rep = transition_scan(mu, {2048, 4096, 8192}, {-5, 5});
    const bool inc = rep.window_counts[0] < rep.window_counts[1] && rep.window_counts[1] < rep.window_counts[2];
    ok = ok && inc;
    d << fmt("mu=%g counts %zu<%zu<%zu; ", mu, rep.window_counts[0], rep.window_counts[1], rep.window_counts[2]);
  }
  const auto neg = transition_scan(1.0, {2048, 4096, 8192}, {-1, -1e-3});
  const auto pos = transition_scan(1.0, {2048, 4096, 8192}, {1e-3, 1});
  const bool zero = neg.window_counts[0] == 0 && neg.window_counts[1] == 0 && neg.window_counts[2] == 0;
  const bool grows = pos.window_counts[0] < pos.window_counts[1] && pos.window_counts[1] < pos.window_counts[2];
  ok = ok && zero && grows;
  d << fmt("mu=1 negative window %zu,%zu,%zu positive window %zu,%zu,%zu", neg.window_counts[0],
           neg.window_counts[1], neg.window_counts[2], pos.window_counts[0], pos.window_counts[1],
           pos.window_counts[2]);
  return {ok, d.str()};
}

Verdict asymptotics() {
  const std::vector<double> offsets = {2e-2, 5e-3, 2e-3, 5e-4};
  std::vector<double> mus, devs;
  for (double o : offsets) mus.push_back(1 + o);
  const auto rows = count_asymptotics_curve(mus, DoublingPolicy{2048, 200000});
  std::ostringstream d;
  bool within = true;
  for (const auto& r : rows) {
    within = within && std::abs(static_cast<double>(r.counted) - r.predicted) <= 2;
    devs.push_back(std::abs(r.ratio - 1));
    d << fmt("mu-1=%g count %zu pred %.3f |ratio-1| %.3f (N %zu); ", r.mu - 1, r.counted, r.predicted,
             devs.back(), r.size);
  }
  // Judged literally: |ratio-1| must not grow from one grid point to the next.
  // Counts are integers, so the deviation from a smooth law can jump up between points.
  std::size_t first_rise = 0;
  for (std::size_t i = 1; i < devs.size() && first_rise == 0; ++i) {
    if (devs[i] > devs[i - 1] + 1e-12) first_rise = i;
  }
  const bool decreasing = first_rise == 0;
  const bool final_ok = devs.back() <= 0.3;
  if (decreasing) {
    d << "|ratio-1| non-increasing along the grid";
  } else {
    d << fmt("|ratio-1| rises from %.3f to %.3f at mu-1=%g", devs[first_rise - 1], devs[first_rise],
             offsets[first_rise]);
  }
  return {within && decreasing && final_ok, d.str()};
}

Verdict discrete2() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<CouplingParams> points;
  while (points.size() < 20) {
    const std::size_t i = points.size();
    const bool beta_zero = i % 2 == 0;
    const bool gamma_zero = (i / 2) % 2 == 0;
    const cplx gamma = gamma_zero ? cplx{} : cplx{2 * u(rng) - 1, 2 * u(rng) - 1};
    CouplingParams p;
    if (beta_zero) {
      const double ac = critical_alpha(0, gamma);
      p = make_params((0.35 + 0.6 * u(rng)) * ac, 0, gamma);
    } else {
      const double beta = 0.3 + 4 * u(rng);
      p = make_params(-1 + 2.5 * u(rng), beta, gamma);
    }
    bool sub = false, near = false;
    for (const auto& c : classify(p)) {
      sub = sub || c.kind == TransitionKind::Subcritical;
      // Keep away from mu = 1, where the stabilized counts need very large truncations.
      near = near || (!c.mu.is_divergent() && std::abs(c.mu.value() - 1) < 0.02);
    }
    if (sub && !near) points.push_back(p);
  }
  std::size_t ok = 0, two = 0;
  std::ostringstream bad;
  for (const auto& p : points) {
    const auto c = discrete2_check(p);
    if (c.bound == 2) ++two;
    if (c.ok) {
      ++ok;
    } else {
      bad << fmt(" (%g,%g,%g%+gi): lhs %zu rhs %zu bound %zu;", p.alpha, p.beta, p.gamma.real(), p.gamma.imag(),
                 c.lhs, c.rhs, c.bound);
    }
  }
  return {ok == points.size(), fmt("%zu/%zu points within bound (%zu with two subcritical branches)", ok,
                                   points.size(), two) + bad.str()};
}

Verdict two_methods() {
  std::ostringstream d;
  bool ok = true;
  for (const auto& p : {make_params(1, 0, {}), make_params(1, 1, {})}) {
    const auto res = h_eigenvalues_below_threshold(p);
    double worst_gap = 0, worst_defect = 0;
    for (const auto& e : res.eigenvalues) {
      const bool confirmed = std::isfinite(e.secular_lambda) && std::abs(e.secular_lambda - e.lambda) <= 1e-6 &&
                             e.secular_defect <= 1e-6;
      ok = ok && confirmed;
      worst_gap = std::max(worst_gap, std::abs(e.secular_lambda - e.lambda));
      worst_defect = std::max(worst_defect, e.secular_defect);
    }
    ok = ok && !res.eigenvalues.empty();
    d << fmt("(%g,%g,0): %zu eigenvalues, max gap %.1e, max defect %.1e; ", p.alpha, p.beta, res.eigenvalues.size(),
             worst_gap, worst_defect);
  }
  return {ok, d.str()};
}

Verdict identity() {
  const cplx i{0, 1};
  double worst = 0;
  for (double mu : {0.5, 1.0, 1.5, 2.0}) {
    for (cplx lam : {i, 0.3 + 0.1 * i}) {
      for (std::size_t n : {100, 1000}) {
        worst = std::max(worst, identity_residual(iterate_forward(mu, lam, 1.0, n + 1), n).residual);
      }
    }
  }
  // Perturbing one entry by 1% must show up somewhere along the sequence.
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, 100);
  std::size_t detected = 0, trials = 0;
  double weakest = INFINITY;
  for (double mu : {0.5, 1.0, 1.5, 2.0}) {
    for (cplx lam : {i, 0.3 + 0.1 * i}) {
      const auto s = iterate_forward(mu, lam, 1.0, 101);
      for (int t = 0; t < 10; ++t, ++trials) {
        auto p = s;
        const std::size_t k = pick(rng);
        p.set(k, p.mantissa(k) * 1.01, p.exponent(k));
        double r = 0;
        for (std::size_t up = 0; up <= 100; ++up) r = std::max(r, identity_residual(p, up).residual);
        weakest = std::min(weakest, r);
        detected += r > 1e-4;
      }
    }
  }
  return {worst <= 1e-9 && detected == trials,
          fmt("max residual %.1e over 16 grid points; perturbation detected %zu/%zu (weakest %.1e)", worst, detected,
              trials, weakest)};
}

Verdict birkhoff_adams() {
  const cplx i{0, 1};
  double worst = 0, worst_exp = 0;
  const std::size_t n = 10000;
  for (double mu : {1.5, 2.0, 5.0}) {
    for (cplx lam : {cplx{0.3}, 0.2 + 0.1 * i}) {
      const auto sol = minimal_solution_backward(mu, lam, n + 2);
      const double s = std::sqrt(mu * mu - 1);
      const cplx root = -mu + s;
      const cplx d = -0.5 + lam * mu / (2 * s);
      const cplx rr = sol.ratio(n) / (root * std::pow(1.0 + 1.0 / n, d));
      worst = std::max(worst, std::abs(rr - 1.0));
      // The exponent read back from the ratio, as a sharper look at the same law.
      const cplx d_est = static_cast<double>(n) * (sol.ratio(n) / root - 1.0);
      worst_exp = std::max(worst_exp, std::abs(d_est - d) / std::abs(d));
    }
  }
  return {worst <= 0.01, fmt("max |ratio of ratios - 1| = %.1e at n = 1e4; exponent read-back rel. error %.1e",
                             worst, worst_exp)};
}

Verdict form_bounds() {
  const CouplingParams ps[] = {make_params(1, 0, {}), make_params(0.5, 0, {1, -0.5}), make_params(1, 4, {}),
                               make_params(0.3, 4, {0.2, 0.1}), make_params(-0.5, 6, {0.5, 0})};
  std::size_t violations = 0, checked = 0;
  double margin = INFINITY;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0, 1);
  std::uniform_real_distribution<double> logd(std::log(0.1), std::log(10.0));
  std::uniform_int_distribution<int> count(1, 13);
  for (const auto& p : ps) {
    const double c = lower_bound_constant(p);
    if (!(c > 0)) return {false, fmt("parameter point has c = %g", c)};
    for (int t = 0; t < 10000; ++t, ++checked) {
      std::vector<int> idx(13);
      for (int k = 0; k < 13; ++k) idx[k] = k;
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(count(rng));
      std::vector<ModeProfile> modes;
      for (int k : idx) modes.push_back({static_cast<std::size_t>(k), {g(rng), g(rng)}, {g(rng), g(rng)}, std::exp(logd(rng))});
      ModeTrialFunction trial(modes);
      if (p.beta == 0) trial = project_beta0(trial, p.gamma);
      const auto f = evaluate_forms(trial, p);
      margin = std::min(margin, 2 * f.full / f.norm_squared - c);
      if (f.full < 0.5 * c * f.norm_squared * (1 - 1e-12)) ++violations;
    }
  }
  // Trace equality for the saturating profiles, against adaptive quadrature.
  boost::math::quadrature::exp_sinh<double> q;
  double worst = 0;
  for (const auto& p : {make_params(1, 1, {}), make_params(0.3, 4, {0.2, 0.1}), make_params(-0.5, 6, {0.5, 0})}) {
    const auto d = derive(p);
    for (int branch : {1, 2}) {
      for (double delta : {0.5, 1.0, 2.0}) {
        const auto trial = saturating_trial(delta, branch, d);
        const auto& m = trial.modes().at(0);
        for (cplx v : {m.a, m.b}) {
          const double integral = q.integrate([&](double x) {
            // |f'|^2 + delta^2 |f|^2 for f = v e^{-delta x}.
            return 2 * delta * delta * std::norm(v) * std::exp(-2 * delta * x);
          });
          const double boundary = delta * std::norm(v);
          worst = std::max(worst, std::abs(integral - boundary) / std::max(1.0, boundary));
        }
      }
    }
  }
  return {violations == 0 && worst <= 1e-12,
          fmt("%zu trials, %zu violations, min(2 full/|Psi|^2 - c) = %.3e; saturation gap %.1e", checked, violations,
              margin, worst)};
}

Verdict critical_surface() {
  std::ostringstream d;
  bool ok = true;
  for (double beta : {0.5, 1.0, 2.0, kTwoSqrt2}) {
    const double ac = critical_alpha(beta, {});
    const bool exact = std::abs(ac - std::sqrt(2.0)) <= 1e-12;
    const auto rel = critical_branches(beta, {});
    auto kinds = [&](double alpha) {
      std::vector<TransitionKind> out;
      for (const auto& c : classify(make_params(alpha, beta, {}))) {
        if (std::find(rel.begin(), rel.end(), c.branch) != rel.end()) out.push_back(c.kind);
      }
      return out;
    };
    auto has = [](const std::vector<TransitionKind>& v, TransitionKind k) {
      return std::find(v.begin(), v.end(), k) != v.end();
    };
    const auto before = kinds(ac - 1e-6), after = kinds(ac + 1e-6);
    const bool flip = has(before, TransitionKind::Subcritical) && !has(before, TransitionKind::Supercritical) &&
                      has(after, TransitionKind::Supercritical) && !has(after, TransitionKind::Subcritical);
    ok = ok && exact && flip;
    d << fmt("beta=%g alpha_c-sqrt2=%.1e flip %s; ", beta, ac - std::sqrt(2.0), flip ? "yes" : "no");
  }
  return {ok, d.str()};
}

Verdict deficiency() {
  std::mt19937_64 rng(50);
  std::uniform_real_distribution<double> u(-3, 3);
  const cplx i{0, 1};
  double smallest = INFINITY;
  std::size_t draws = 0, sub = 0, super = 0, evaluated = 0;
  while (draws < 50) {
    const auto p = make_params(u(rng), u(rng), {u(rng), u(rng)});
    const auto cls = classify(p);
    bool any_sub = false, any_super = false;
    for (const auto& c : cls) {
      any_sub = any_sub || c.kind == TransitionKind::Subcritical;
      any_super = any_super || c.kind == TransitionKind::Supercritical;
    }
    if (!any_sub && !any_super) continue;
    ++draws;
    sub += any_sub;
    super += any_super;
    for (const auto& c : cls) {
      if (c.mu.is_divergent() || c.mu.value() == 0) continue;
      smallest = std::min(smallest, secular_defect(c.mu.value(), i));
      ++evaluated;
    }
  }
  return {smallest >= 1e-3, fmt("%zu draws (%zu with a subcritical, %zu with a supercritical branch), %zu defects, "
                                "min %.3f",
                                draws, sub, super, evaluated, smallest)};
}

Verdict determinism() {
  const std::vector<std::vector<std::string>> sweeps = {
      {"classify", "--beta", "1", "--gamma-re", "0.3", "--grid-var", "alpha", "--grid-start", "-2", "--grid-stop", "3",
       "--grid-steps", "41", "--format", "csv"},
      {"asymptotics", "--grid-var", "mu", "--grid-values", "1.02,1.005,1.002,1.0005", "--format", "json"},
      {"h-spectrum", "--beta", "1", "--grid-var", "alpha", "--grid-start", "-1", "--grid-stop", "1.3", "--grid-steps",
       "8", "--format", "csv"},
      {"identity-check", "--mu", "1.5", "--lambda-im", "1", "--grid-var", "lambda", "--grid-start", "-2",
       "--grid-stop", "0.4", "--grid-steps", "13", "--format", "json"},
      {"count", "--alpha", "0.8", "--beta", "0", "--grid-var", "epsilon", "--grid-start", "0.001", "--grid-stop", "1",
       "--grid-steps", "10", "--grid-scale", "log", "--format", "csv"}};
  unsetenv("SPECLAB_WORKERS");
  std::size_t same = 0, bytes = 0;
  for (const auto& args : sweeps) {
    std::string outs[2];
    for (int k = 0; k < 2; ++k) {
      auto a = args;
      a.insert(a.end(), {"--workers", k == 0 ? "1" : "4"});
      std::ostringstream out, err;
      if (cli::run(a, out, err) != 0) return {false, args[0] + " sweep failed: " + err.str()};
      outs[k] = out.str();
    }
    same += outs[0] == outs[1];
    bytes += outs[0].size();
  }
  return {same == sweeps.size(), fmt("%zu/%zu sweeps byte-identical across 1 and 4 workers (%zu bytes)", same,
                                     sweeps.size(), bytes)};
}

}  // namespace

int main() {
  criterion(1, "Sturm bisection vs dense oracle", 60, oracle_equivalence);
  criterion(2, "transition of the compact-difference operator at mu = 1", 120, transition);
  criterion(3, "counting asymptotics near mu = 1", 120, asymptotics);
  criterion(4, "threshold count against the reduced operator", 300, discrete2);
  criterion(5, "two-method eigenvalue agreement", 0, two_methods);
  criterion(6, "summed identity residual", 0, identity);
  criterion(7, "Birkhoff-Adams decay of the minimal solution", 0, birkhoff_adams);
  criterion(8, "form bounds and saturation", 0, form_bounds);
  criterion(9, "critical surface consistency", 0, critical_surface);
  criterion(10, "deficiency experiment at lambda = i", 0, deficiency);
  criterion(11, "sweep determinism across worker counts", 0, determinism);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
