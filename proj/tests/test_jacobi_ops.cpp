#include <cmath>
#include <string>

#include "doctest.h"
#include "speclab/error.hpp"
#include "speclab/jacobi_ops.hpp"

using namespace speclab;

TEST_CASE("entry generators at low index") {
  const auto t = build(CalJ0{0.7}, 5);
  CHECK(t.offdiag()[0] == doctest::Approx(std::pow(0.75, 0.25)).epsilon(1e-15));
  CHECK(t.diag()[0] == doctest::Approx(0.7));
  CHECK(t.diag()[3] == doctest::Approx(2 * 0.7 * 3.5));

  const auto j = build(Jeps{1.0}, 4);
  CHECK(j.offdiag()[0] == doctest::Approx(1 / (2 * std::pow(2.0, 0.25))).epsilon(1e-15));
  CHECK(j.diag()[2] == 0);

  const auto flat = build(CalJ0{0.0}, 10);
  for (double x : flat.diag()) CHECK(x == 0);

  const auto jb = build(J0bar{}, 4);
  CHECK(jb.offdiag()[0] == doctest::Approx(0.5 / std::pow(0.5, 0.25)));
  CHECK(jb.offdiag()[2] == doctest::Approx(0.5 / std::pow(0.75, 0.25)));
}

TEST_CASE("d_n against its defining product") {
  for (std::size_t n : {1, 2, 7, 100, 123456}) {
    const long double x = n;
    const long double ref = std::sqrt(x) * std::pow((x + 0.5L) * (x - 0.5L), 0.25L);
    CHECK(std::abs(d_coefficient(n) - ref) <= 1e-15L * ref);
  }
  CHECK(d_coefficient(0) == 0);
}

TEST_CASE("family preconditions") {
  try {
    build(Jeps{0.0}, 10);
    FAIL("expected InvalidParameters");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidParameters);
    CHECK(std::string(e.what()).find("j1,0 = \xe2\x88\x9e") != std::string::npos);
  }
  CHECK_THROWS_AS(build(Jeps{-1.0}, 10), Error);
  try {
    build(CalJ{0.5, 1.0}, 10);
    FAIL("expected BranchCut");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BranchCut);
  }
  CHECK_THROWS_AS(build(CalJ0{1.0}, 1), Error);
}

TEST_CASE("CalJ at lambda = 1/2 - eps is 2 D (mu + J(eps)) D") {
  for (double eps : {0.01, 0.3, 2.0}) {
    for (double mu : {0.4, 1.7}) {
      const std::size_t n = 50;
      const auto big = build(CalJ{0.5 - eps, mu}, n);
      const auto small = build(Jeps{eps}, n);
      auto dd = [&](std::size_t k) { return std::pow((k + 0.5L) * (k + eps), 0.25L); };
      for (std::size_t k = 0; k < n; ++k) {
        const long double want = 2 * dd(k) * dd(k) * mu;
        CHECK(std::abs(big.diag()[k] - want) <= 1e-13L * want);
      }
      for (std::size_t k = 1; k < n; ++k) {
        const long double want = 2 * dd(k - 1) * dd(k) * small.offdiag()[k - 1];
        CHECK(std::abs(big.offdiag()[k - 1] - want) <= 1e-13L * want);
      }
    }
  }
}

TEST_CASE("inertia: negative count of CalJ equals count of J(eps) below -mu") {
  for (double eps : {0.001, 0.05, 0.4}) {
    for (double mu : {1.05, 1.4, 3.0}) {
      for (std::size_t n : {16, 300, 5000}) {
        CHECK(count_relative(CalJ{0.5 - eps, mu}, 0, n, CountSide::Below) ==
              count_relative(Jeps{eps}, -mu, n, CountSide::Below));
      }
    }
  }
}

TEST_CASE("count_relative examples") {
  CHECK(count_relative(CalJ0{3}, 0, 1000, CountSide::Above) == 1000);
  const auto a = count_relative(J0bar{}, 1.1, 20000, CountSide::Above);
  CHECK(a <= 1);
  CHECK(count_relative(J0bar{}, 1.1, 40000, CountSide::Above) == a);
  CHECK(count_relative(Jeps{0.5}, -1.3, 10000, CountSide::Below) ==
        count_relative(Jeps{0.5}, 1.3, 10000, CountSide::Above));
}

TEST_CASE("doubling policy") {
  const auto s = count_stabilized(J0bar{}, 1.02, CountSide::Above);
  CHECK(s.size >= 2048);
  CHECK(count_relative(J0bar{}, 1.02, 4 * s.size, CountSide::Above) == s.count);
  // Supercritical CalJ0 keeps gaining eigenvalues below 0, so the count never settles.
  try {
    count_stabilized(CalJ0{0.5}, 0, CountSide::Below, DoublingPolicy{2048, 8192});
    FAIL("expected NonConvergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonConvergence);
  }
}

TEST_CASE("compact difference tail") {
  CHECK(compact_difference_tail(0, 1, 1000) == 0);
  const double t3 = compact_difference_tail(0.4, 1, 1000), t4 = compact_difference_tail(0.4, 1, 10000),
               t5 = compact_difference_tail(0.4, 1, 100000);
  CHECK(t3 > t4);
  CHECK(t4 > t5);
  CHECK(t3 * 1000 == doctest::Approx(t5 * 100000).epsilon(0.01));
  // Naive subtraction in extended precision at moderate n.
  for (std::size_t n : {10, 200, 2000}) {
    long double worst = 0;
    for (std::size_t k = n / 2; k < n; ++k) {
      const long double a = k + 0.5L;
      const long double diff = 2 * 1.3L * std::sqrt(a) * std::sqrt(a - (-2.5L)) - (2 * 1.3L * a - 1.3L * (-2.5L));
      worst = std::max(worst, std::abs(diff));
    }
    CHECK(std::abs(compact_difference_tail(-2.5, 1.3, n) - worst) <= 1e-9L * worst + 1e-15L);
  }
  CHECK_THROWS_AS(compact_difference_tail(0.6, 1, 100), Error);
}

TEST_CASE("truncated CalJ0 is positive definite for mu > 1") {
  for (double mu : {1.01, 1.5, 2.0, 10.0}) {
    for (std::size_t n : {2, 10, 1000, 10000}) {
      CHECK(count_relative(CalJ0{mu}, 0, n, CountSide::Below) == 0);
      CHECK(smallest_eigenvalue(build(CalJ0{mu}, n), 1e-12) > 0);
    }
  }
}

TEST_CASE("zero-diagonal families have symmetric truncated spectra") {
  for (const JacobiFamily& f : {JacobiFamily{Jeps{0.2}}, JacobiFamily{J0bar{}}}) {
    const auto eig = dense_eigen_oracle(build(f, 301));
    for (std::size_t i = 0; i < eig.size(); ++i) CHECK(std::abs(eig[i] + eig[eig.size() - 1 - i]) <= 1e-10);
  }
}

TEST_CASE("J(eps) entries approach 1/2") {
  const auto t = build(Jeps{0.3}, 20001);
  for (std::size_t n = 10; n < 20001; n *= 3) {
    CHECK(std::abs(t.offdiag()[n - 1] - 0.5) <= 1.0 / (4.0 * n) + 1e-3 / n);
  }
}

TEST_CASE("counts below a fixed level are nondecreasing in N") {
  for (const JacobiFamily& f : {JacobiFamily{CalJ0{0.6}}, JacobiFamily{CalJ{-1.0, 1.3}},
                                JacobiFamily{Jeps{0.1}}, JacobiFamily{J0bar{}}}) {
    for (double level : {-3.0, -1.0, -0.2, 0.0, 0.9, 1.05, 4.0}) {
      std::size_t prev = 0;
      for (std::size_t n = 8; n <= 8192; n *= 2) {
        const std::size_t c = count_relative(f, level, n, CountSide::Below);
        CHECK(c >= prev);
        prev = c;
      }
    }
  }
}

TEST_CASE("transition scans on both sides of mu = 1") {
  const auto hi = transition_scan(2.0, {256, 512, 1024, 2048}, {-5, 5});
  for (std::size_t i = 0; i < hi.sizes.size(); ++i) {
    CHECK(hi.smallest_eigs[i] > 0);
    if (i > 0) CHECK(hi.smallest_eigs[i] <= hi.smallest_eigs[i - 1] + 1e-11);
  }
  CHECK(std::abs(hi.smallest_eigs[3] - hi.smallest_eigs[2]) < 1e-6);

  const auto lo = transition_scan(0.5, {512, 1024, 2048, 4096}, {-5, 5});
  for (std::size_t i = 1; i < lo.sizes.size(); ++i) CHECK(lo.window_counts[i] > lo.window_counts[i - 1]);

  const auto neg = transition_scan(1.0, {512, 1024, 2048, 4096}, {-1, -1e-3});
  const auto pos = transition_scan(1.0, {512, 1024, 2048, 4096}, {1e-3, 1});
  for (std::size_t i = 0; i < 4; ++i) CHECK(neg.window_counts[i] == 0);
  for (std::size_t i = 1; i < 4; ++i) CHECK(pos.window_counts[i] > pos.window_counts[i - 1]);

  CHECK_THROWS_AS(transition_scan(1.0, {1024, 512}, {0, 1}), Error);
  CHECK_THROWS_AS(transition_scan(1.0, {512}, {1, 0}), Error);
}
