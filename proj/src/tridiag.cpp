#include "speclab/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "speclab/error.hpp"

namespace speclab {

TridiagonalMatrix::TridiagonalMatrix(std::vector<double> diag, std::vector<double> offdiag)
    : diag_(std::move(diag)), off_(std::move(offdiag)) {
  if (diag_.empty() || off_.size() + 1 != diag_.size()) {
    throw Error(ErrorKind::InvalidParameters,
                "tridiagonal shape mismatch: diag " + std::to_string(diag_.size()) + ", offdiag " +
                    std::to_string(off_.size()));
  }
  auto finite = [](double x) { return std::isfinite(x); };
  if (!std::all_of(diag_.begin(), diag_.end(), finite) ||
      !std::all_of(off_.begin(), off_.end(), finite)) {
    throw Error(ErrorKind::InvalidParameters, "tridiagonal entries must be finite");
  }
}

double TridiagonalMatrix::inf_norm() const {
  const std::size_t n = size();
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = std::abs(diag_[i]);
    if (i > 0) row += std::abs(off_[i - 1]);
    if (i + 1 < n) row += std::abs(off_[i]);
    best = std::max(best, row);
  }
  return best;
}

std::pair<double, double> TridiagonalMatrix::gershgorin() const {
  const std::size_t n = size();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    double radius = 0.0;
    if (i > 0) radius += std::abs(off_[i - 1]);
    if (i + 1 < n) radius += std::abs(off_[i]);
    lo = std::min(lo, diag_[i] - radius);
    hi = std::max(hi, diag_[i] + radius);
  }
  return {lo, hi};
}

namespace {

double pivmin(const TridiagonalMatrix& t) {
  return std::numeric_limits<double>::epsilon() * (t.inf_norm() + 1.0);
}

// e2 holds the squared off-diagonal entries.
std::size_t count_with_pivmin(std::span<const double> d, std::span<const double> e2, double level,
                              double pmin) {
  std::size_t neg = 0;
  double q = d[0] - level;
  if (std::abs(q) < pmin) q = pmin;
  neg += q < 0.0;
  for (std::size_t i = 1; i < d.size(); ++i) {
    q = (d[i] - level) - e2[i - 1] / q;
    // A vanishing pivot is pushed to the positive side: the level then counts as
    // lying just below a coincident eigenvalue, giving strictly-below semantics.
    q = std::abs(q) < pmin ? pmin : q;
    neg += q < 0.0;
  }
  return neg;
}

std::vector<double> squared(std::span<const double> e) {
  std::vector<double> e2(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) e2[i] = e[i] * e[i];
  return e2;
}

// Same recurrence as count_with_pivmin for several levels at once; the chains are
// independent, so their divisions overlap in the pipeline.
template <std::size_t L>
void count_batch(std::span<const double> d, std::span<const double> e2, const double* level, double pmin,
                 std::size_t* neg) {
  double q[L];
  for (std::size_t j = 0; j < L; ++j) {
    q[j] = d[0] - level[j];
    q[j] = std::abs(q[j]) < pmin ? pmin : q[j];
    neg[j] = q[j] < 0.0;
  }
  for (std::size_t i = 1; i < d.size(); ++i) {
    for (std::size_t j = 0; j < L; ++j) {
      q[j] = (d[i] - level[j]) - e2[i - 1] / q[j];
      q[j] = std::abs(q[j]) < pmin ? pmin : q[j];
      neg[j] += q[j] < 0.0;
    }
  }
}

struct Bisector {
  std::span<const double> d;
  std::vector<double> e2;
  double pmin, tol;
  std::vector<double>* out;

  std::size_t count(double x) const { return count_with_pivmin(d, e2, x, pmin); }

  struct Interval {
    double lo, hi;
    std::size_t clo, chi;
  };

  // Emits the eigenvalues in [lo, hi) given the counts at both ends, in ascending order.
  void run(double lo, double hi, std::size_t clo, std::size_t chi) const {
    constexpr std::size_t kLanes = 8;
    std::vector<Interval> pending{{lo, hi, clo, chi}}, next, done;
    while (!pending.empty()) {
      next.clear();
      std::vector<Interval> split;
      for (const Interval& iv : pending) {
        const double mid = 0.5 * (iv.lo + iv.hi);
        if (iv.hi - iv.lo <= tol || mid <= iv.lo || mid >= iv.hi) {
          done.push_back(iv);
        } else {
          split.push_back(iv);
        }
      }
      for (std::size_t b = 0; b < split.size(); b += kLanes) {
        const std::size_t lanes = std::min(kLanes, split.size() - b);
        double mids[kLanes];
        std::size_t cm[kLanes];
        for (std::size_t j = 0; j < kLanes; ++j) {
          const Interval& iv = split[b + std::min(j, lanes - 1)];
          mids[j] = 0.5 * (iv.lo + iv.hi);
        }
        count_batch<kLanes>(d, e2, mids, pmin, cm);
        for (std::size_t j = 0; j < lanes; ++j) {
          const Interval& iv = split[b + j];
          if (cm[j] > iv.clo) next.push_back({iv.lo, mids[j], iv.clo, cm[j]});
          if (iv.chi > cm[j]) next.push_back({mids[j], iv.hi, cm[j], iv.chi});
        }
      }
      std::swap(pending, next);
    }
    std::sort(done.begin(), done.end(), [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
    for (const Interval& iv : done) out->insert(out->end(), iv.chi - iv.clo, 0.5 * (iv.lo + iv.hi));
  }
};

std::pair<double, double> safe_enclosure(const TridiagonalMatrix& t) {
  auto [lo, hi] = t.gershgorin();
  const double pad = 4.0 * pivmin(t) * static_cast<double>(t.size()) + 1e-300;
  return {lo - pad - std::abs(lo) * 1e-15, hi + pad + std::abs(hi) * 1e-15};
}

}  // namespace

std::size_t sturm_count_below(const TridiagonalMatrix& t, double level) {
  return count_with_pivmin(t.diag(), squared(t.offdiag()), level, pivmin(t));
}

EigenvalueReport eigenvalues_in_window(const TridiagonalMatrix& t, double a, double b, double tol) {
  if (!(a < b)) throw Error(ErrorKind::InvalidParameters, "window requires a < b");
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidParameters, "tol must be positive");
  EigenvalueReport r;
  r.a = a;
  r.b = b;
  r.tol = tol;
  r.truncation_size = t.size();
  Bisector bis{t.diag(), squared(t.offdiag()), pivmin(t), tol, &r.eigenvalues};
  r.count_below_a = bis.count(a);
  r.count_below_b = bis.count(b);
  // Shrink the window to the Gershgorin box so bisection depth does not depend on huge windows.
  auto [glo, ghi] = safe_enclosure(t);
  const double lo = std::max(a, glo), hi = std::min(b, ghi);
  if (lo < hi) {
    bis.run(lo, hi, lo == a ? r.count_below_a : bis.count(lo), hi == b ? r.count_below_b : bis.count(hi));
  }
  return r;
}

double kth_eigenvalue(const TridiagonalMatrix& t, std::size_t k, double tol) {
  if (k >= t.size()) throw Error(ErrorKind::InvalidParameters, "eigenvalue index out of range");
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidParameters, "tol must be positive");
  auto [lo, hi] = safe_enclosure(t);
  const double pmin = pivmin(t);
  const auto e2 = squared(t.offdiag());
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (count_with_pivmin(t.diag(), e2, mid, pmin) > k) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double smallest_eigenvalue(const TridiagonalMatrix& t, double tol) { return kth_eigenvalue(t, 0, tol); }

std::vector<double> dense_eigen_oracle(const TridiagonalMatrix& t) {
  const std::size_t n = t.size();
  if (n > kDenseOracleMaxSize) {
    throw Error(ErrorKind::SizeExceeded, "dense oracle limited to " +
                                             std::to_string(kDenseOracleMaxSize) + " rows, got " +
                                             std::to_string(n));
  }
  std::vector<double> a(n * n, 0.0);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };
  for (std::size_t i = 0; i < n; ++i) {
    at(i, i) = t.diag()[i];
    if (i + 1 < n) at(i, i + 1) = at(i + 1, i) = t.offdiag()[i];
  }

  // Round-robin ordering: each step applies n/2 disjoint rotations at once, so the
  // row pass and the column pass both stream through contiguous memory.
  const std::size_t m = n + (n % 2);
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  struct Rot {
    std::size_t p, q;
    double c, s, app, aqq;
  };
  std::vector<Rot> rots;
  rots.reserve(m / 2);

  constexpr int kMaxSweeps = 60;
  for (int sweep = 0;; ++sweep) {
    double off = 0.0, total = 0.0, sum_abs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += at(i, i) * at(i, i);
      for (std::size_t j = i + 1; j < n; ++j) {
        off += at(i, j) * at(i, j);
        sum_abs += std::abs(at(i, j));
      }
    }
    total += 2.0 * off;
    if (off == 0.0 || off <= 1e-34 * total) break;
    if (sweep == kMaxSweeps) throw Error(ErrorKind::NonConvergence, "Jacobi sweeps did not converge");
    // Early sweeps only chase the large entries.
    const double thresh = sweep < 3 ? 0.2 * sum_abs / static_cast<double>(n * n) : 0.0;

    for (std::size_t step = 0; step + 1 < m; ++step) {
      rots.clear();
      for (std::size_t i = 0; i < m / 2; ++i) {
        std::size_t p = order[i], q = order[m - 1 - i];
        if (p >= n || q >= n) continue;
        if (p > q) std::swap(p, q);
        const double apq = at(p, q);
        if (apq == 0.0 || std::abs(apq) < thresh) continue;
        const double app = at(p, p), aqq = at(q, q);
        // Negligible relative to both diagonal entries: drop it without rotating.
        const double g = 100.0 * std::abs(apq);
        if (sweep > 3 && std::abs(app) + g == std::abs(app) && std::abs(aqq) + g == std::abs(aqq)) {
          at(p, q) = at(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        double tt = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) tt = -tt;
        const double c = 1.0 / std::sqrt(tt * tt + 1.0);
        rots.push_back({p, q, c, tt * c, app - tt * apq, aqq + tt * apq});
      }
      for (const Rot& r : rots) {
        double* rp = &a[r.p * n];
        double* rq = &a[r.q * n];
        for (std::size_t k = 0; k < n; ++k) {
          const double x = rp[k], y = rq[k];
          rp[k] = r.c * x - r.s * y;
          rq[k] = r.s * x + r.c * y;
        }
      }
      if (!rots.empty()) {
        for (std::size_t k = 0; k < n; ++k) {
          double* row = &a[k * n];
          for (const Rot& r : rots) {
            const double x = row[r.p], y = row[r.q];
            row[r.p] = r.c * x - r.s * y;
            row[r.q] = r.s * x + r.c * y;
          }
        }
      }
      for (const Rot& r : rots) {
        at(r.p, r.p) = r.app;
        at(r.q, r.q) = r.aqq;
        at(r.p, r.q) = at(r.q, r.p) = 0.0;
      }
      std::rotate(order.begin() + 1, order.end() - 1, order.end());
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = at(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

}  // namespace speclab
