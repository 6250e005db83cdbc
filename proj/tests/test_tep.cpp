#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "tailcp/error.hpp"
#include "tailcp/lmsv.hpp"
#include "tailcp/random.hpp"
#include "tailcp/tep.hpp"

using namespace tailcp;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected tailcp::Error");
  return ErrorCode::IoError;
}

TimeSeries pareto_series(std::uint64_t seed, std::size_t n, double alpha) {
  UniformStream s(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = pareto_quantile(s.next_uniform(), alpha);
  return TimeSeries(v);
}

void check_monotone(const TepSurface& s) {
  for (std::size_t i = 0; i < s.values.rows(); ++i)
    for (std::size_t j = 0; j < s.values.cols(); ++j) {
      CHECK(s.values(i, j) >= 0.0);
      if (i > 0) CHECK(s.values(i, j) <= s.values(i - 1, j));
      if (j > 0) CHECK(s.values(i, j) >= s.values(i, j - 1));
      if (s.t_grid[j] == 0.0) CHECK(s.values(i, j) == 0.0);
    }
}

LmsvSpec null_spec(std::size_t n, double hurst) {
  LmsvSpec s;
  s.n = n;
  s.hurst = hurst;
  s.alpha = 2.0;
  return s;
}

}  // namespace

TEST_CASE("tail_surface examples") {
  const TimeSeries x({3, 1, 5, 2});
  auto s = tail_surface(x, 2.0, {1.0}, {1.0}, 2.0);
  CHECK(s.values(0, 0) == 1.0);
  CHECK(s.threshold == 2.0);
  CHECK(s.normalizer == 2.0);

  auto z = tail_surface(x, 2.0, {1.0, 2.0}, {0.0, 0.5, 1.0}, 2.0);
  CHECK(z.values(0, 0) == 0.0);
  CHECK(z.values(1, 0) == 0.0);
  CHECK(z.values(0, 1) == 0.5);  // prefix [3, 1]
  CHECK(z.values(1, 2) == 0.5);  // only 5 > 4

  auto high = tail_surface(x, 2.0, {2.6, 10.0}, {0.5, 1.0}, 2.0);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(high.values(i, j) == 0.0);

  CHECK(code_of([&] { tail_surface(x, 2.0, {}, {1.0}, 2.0); }) == ErrorCode::EmptyGrid);
  CHECK(code_of([&] { tail_surface(x, 2.0, {1.0}, {}, 2.0); }) == ErrorCode::EmptyGrid);
  CHECK(code_of([&] { tail_surface(x, 2.0, {0.5}, {1.0}, 2.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { tail_surface(x, 2.0, {1.0}, {1.2}, 2.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { tail_surface(x, 2.0, {2.0, 1.0}, {1.0}, 2.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { tail_surface(x, 0.0, {1.0}, {1.0}, 2.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { tail_surface(x, 2.0, {1.0}, {1.0}, 0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("centered_surface examples") {
  const TimeSeries x({3, 1, 5, 2});
  auto s = tail_surface(x, 2.0, {1.0}, {0.0, 1.0}, 2.0);
  for (double alpha : {0.5, 2.0, 7.0}) {
    auto e = centered_surface(s, alpha);
    CHECK(e(0, 0) == 0.0);
    CHECK(e(0, 1) == 0.0);
  }

  // A surface filled with t s^-alpha centres to zero.
  TepSurface exact;
  exact.s_grid = {1.0, 1.5, 3.0};
  exact.t_grid = {0.0, 0.25, 1.0};
  exact.values = Grid2D(3, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) exact.values(i, j) = exact.t_grid[j] * std::pow(exact.s_grid[i], -1.7);
  auto e = centered_surface(exact, 1.7);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(e(i, j) == 0.0);
}

TEST_CASE("surface monotonicity on simulated data") {
  const std::vector<double> s_grid{1.0, 1.2, 1.5, 2.0, 4.0, 10.0};
  const std::vector<double> t_grid{0.0, 0.1, 0.33, 0.5, 0.9, 1.0};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto lm = null_spec(3000, 0.7);
    lm.seed = seed;
    check_monotone(data_tail_surface(simulate_lmsv(lm), 150, s_grid, t_grid));
    check_monotone(tail_surface(pareto_series(seed, 1000, 1.0), 5.0, s_grid, t_grid, 200.0));
  }
  auto d = data_tail_surface(pareto_series(3, 1000, 2.0), 100, {1.0}, {1.0});
  CHECK(d.values(0, 0) == 1.0);  // exactly k_n values exceed X_{n:n-k_n}
  CHECK(d.normalizer_source == NormalizerSource::ExceedanceCount);
}

TEST_CASE("centred surface is unbiased with the exact normalizer") {
  const std::size_t n = 1000, reps = 500;
  const double alpha = 2.0, expected = 50.0;
  const double u = std::pow(double(n) / expected, 1.0 / alpha);  // n u^-alpha = 50
  const std::vector<double> s_grid{1.0, 1.5, 3.0};
  const std::vector<double> t_grid{0.2, 0.5, 1.0};
  std::vector<double> sum(9, 0.0), sq(9, 0.0);
  for (std::uint64_t r = 0; r < reps; ++r) {
    auto e = centered_surface(tail_surface(pareto_series(mix64(7, r), n, alpha), u, s_grid, t_grid, expected,
                                           NormalizerSource::Exact),
                              alpha);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        sum[i * 3 + j] += e(i, j);
        sq[i * 3 + j] += e(i, j) * e(i, j);
      }
  }
  for (std::size_t c = 0; c < 9; ++c) {
    const double mean = sum[c] / reps;
    const double se = std::sqrt((sq[c] / reps - mean * mean) / (reps - 1));
    CHECK(std::fabs(mean) <= 3.0 * se);
  }
}

TEST_CASE("second-order check on exact power laws is zero") {
  for (double alpha : {0.5, 1.0, 2.0, 3.3}) {
    const SecondOrderFamily pareto{alpha, 1.0, 0.0};
    auto r = second_order_bound_check(pareto, {0.1, 0.5, 1.0, 2.0, 4.0, 30.0}, {1.0, 10.0, 1e3, 1e5});
    CHECK(r.max_ratio == 0.0);
    CHECK(r.epsilon == kSecondOrderEpsilon);
  }
}

TEST_CASE("second-order check agrees with the closed form") {
  // |Fbar(zt)/Fbar(t) - z^-a| / (t^-rho z^(-a-rho) m^eps)
  //   = c |1 - z^rho| / ((1 + c t^-rho) m^eps), m = max(z, 1/z).
  const std::vector<double> z{0.5, 1.0, 2.0, 4.0};
  const std::vector<double> t{10.0, 100.0, 1000.0};
  for (double c : {0.5, 1.0, 3.0}) {
    const SecondOrderFamily fam{2.0, 1.0, c};
    auto r = second_order_bound_check(fam, z, t);
    CHECK(r.rho == 2.0);
    double best = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) {
      double per_t = 0.0;
      for (double zz : z) {
        const double m = std::max(zz, 1.0 / zz);
        per_t = std::max(per_t, c * std::fabs(1.0 - zz * zz) / ((1.0 + c / (t[j] * t[j])) * std::pow(m, 0.01)));
      }
      CHECK(r.max_ratio_per_t[j] == doctest::Approx(per_t).epsilon(1e-8));
      double brute = 0.0;
      for (double zz : z) {
        const double num = std::fabs(fam.survival(zz * t[j]) / fam.survival(t[j]) - std::pow(zz, -2.0));
        const double env = std::pow(t[j], -2.0) * std::pow(zz, -4.0) * std::pow(std::max(zz, 1.0 / zz), 0.01);
        brute = std::max(brute, num / env);
      }
      CHECK(r.max_ratio_per_t[j] == doctest::Approx(brute).epsilon(1e-6));
      best = std::max(best, per_t);
    }
    CHECK(r.max_ratio == doctest::Approx(best).epsilon(1e-8));
    CHECK(r.argmax_z == 4.0);
    CHECK(std::isfinite(r.max_ratio));
    const auto [lo, hi] = std::minmax_element(r.max_ratio_per_t.begin(), r.max_ratio_per_t.end());
    CHECK(*hi <= 2.0 * *lo);
  }
  // z = 1 has a zero numerator.
  auto one = second_order_bound_check({2.0, 1.0, 1.0}, {1.0}, {10.0, 100.0});
  CHECK(one.max_ratio == 0.0);

  CHECK(code_of([] { second_order_bound_check({2.0, 1.0, 1.0}, {}, {10.0}); }) == ErrorCode::EmptyGrid);
  CHECK(code_of([] { second_order_bound_check({2.0, 1.0, 1.0}, {1.0}, {0.5}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { second_order_bound_check({2.0, 0.0, 1.0}, {1.0}, {10.0}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("regime probe preconditions") {
  auto s = null_spec(1000, 0.6);
  CHECK(code_of([&] { regime_probe(s, 30, {1.0, 2.0}, 50, 1); }) == ErrorCode::InvalidArgument);
  auto broken = s;
  broken.change_height = -1.0;
  broken.change_fraction = 0.5;
  CHECK(code_of([&] { regime_probe(broken, 30, {1.0, 2.0}, 100, 1); }) == ErrorCode::InvalidSpec);
  CHECK(code_of([&] { regime_probe(s, 30, {}, 100, 1); }) == ErrorCode::EmptyGrid);
}

TEST_CASE("regime probe, martingale side: Brownian sheet moments") {
  const auto n = 100000;
  const double k = std::floor(std::sqrt(double(n)));
  auto r = regime_probe(null_spec(n, 0.6), k, {1.0, 2.0, 4.0}, 200, 2024);
  CHECK(r.scale == doctest::Approx(std::sqrt(k)));
  CHECK(r.regime.rate_ratio() < 1.0);
  MESSAGE("variances " << r.variance[0] << " " << r.variance[1] << " " << r.variance[2]);
  MESSAGE("corr(1,4) " << r.correlation_with_s1[2]);
  CHECK(std::fabs(r.variance[0] - 1.0) <= 0.25);
  CHECK(std::fabs(r.variance[1] - 0.25) <= 0.25 * 0.25);
  CHECK(r.correlation_with_s1[0] == doctest::Approx(1.0));
  CHECK(std::fabs(r.correlation_with_s1[2] - 0.25) <= 0.15);
}

TEST_CASE("regime probe, long-memory side: separable limit") {
  const auto n = 100000;
  const double k = std::floor(std::pow(double(n), 0.95));
  auto r = regime_probe(null_spec(n, 0.6), k, {2.0}, 200, 2025);
  CHECK(r.regime.regime == Regime::LrdDominant);
  CHECK(r.scale == doctest::Approx(r.regime.lrd_rate));
  MESSAGE("corr(1,2) " << r.correlation_with_s1[0]);
  CHECK(r.correlation_with_s1[0] >= 0.9);
}

TEST_CASE("regime probe is independent of the worker count") {
  auto a = regime_probe(null_spec(5000, 0.7), 70, {1.0, 2.0}, 100, 9, 1);
  auto b = regime_probe(null_spec(5000, 0.7), 70, {1.0, 2.0}, 100, 9, 3);
  CHECK(a.variance == b.variance);
  CHECK(a.correlation_with_s1 == b.correlation_with_s1);
  CHECK(a.mean == b.mean);
}
