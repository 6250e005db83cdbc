#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "tailcp/error.hpp"
#include "tailcp/io.hpp"
#include "tailcp/normal.hpp"
#include "tailcp/random.hpp"
#include "tailcp/series.hpp"

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

std::vector<double> normals(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

}  // namespace

TEST_CASE("TimeSeries rejects empty, non-finite and unordered input") {
  CHECK(code_of([] { TimeSeries(std::vector<double>{}); }) == ErrorCode::TooShort);
  CHECK(code_of([] { TimeSeries({1.0, NAN}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { TimeSeries({1.0, INFINITY}); }) == ErrorCode::InvalidArgument);
  const Date a{2008, 1, 2}, b{2008, 1, 3};
  CHECK(code_of([&] { TimeSeries({1.0, 2.0}, {b, a}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { TimeSeries({1.0, 2.0}, {a, a}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { TimeSeries({1.0, 2.0}, {a}); }) == ErrorCode::InvalidArgument);
  TimeSeries ok({1.0, 2.0}, {a, b});
  CHECK(ok.has_timestamps());
  CHECK(ok.timestamps()[1] == b);
}

TEST_CASE("Date parsing") {
  auto d = Date::parse_iso("2008-09-16");
  REQUIRE(d);
  CHECK(d->iso() == "2008-09-16");
  CHECK(Date::parse_iso("2008-02-29"));
  CHECK_FALSE(Date::parse_iso("2007-02-29"));
  CHECK_FALSE(Date::parse_iso("2008-13-01"));
  CHECK_FALSE(Date::parse_iso("2008-9-16"));
  CHECK_FALSE(Date::parse_iso("abc"));
  CHECK(*Date::parse_iso("2008-01-31") < *Date::parse_iso("2008-02-01"));
}

TEST_CASE("log_returns examples") {
  const double e = std::exp(1.0);
  auto r = log_returns(TimeSeries({1.0, e, e}));
  REQUIRE(r.size() == 2);
  CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r[1] == 0.0);

  auto flat = log_returns(TimeSeries({100.0, 100.0}));
  REQUIRE(flat.size() == 1);
  CHECK(flat[0] == 0.0);

  auto h = log_returns(TimeSeries({2.0, 3.0, 1.5}));
  CHECK(h[0] == doctest::Approx(0.405465).epsilon(1e-6));
  CHECK(h[1] == doctest::Approx(-0.693147).epsilon(1e-6));
}

TEST_CASE("log_returns errors and timestamps") {
  CHECK(code_of([] { log_returns(TimeSeries({1.0, 0.0, 2.0})); }) == ErrorCode::NonPositivePrice);
  CHECK(code_of([] { log_returns(TimeSeries({1.0, -3.0})); }) == ErrorCode::NonPositivePrice);
  CHECK(code_of([] { log_returns(TimeSeries({5.0})); }) == ErrorCode::TooShort);

  const std::vector<Date> dates{{2008, 1, 2}, {2008, 1, 3}, {2008, 1, 4}};
  auto r = log_returns(TimeSeries({10.0, 11.0, 12.0}, dates));
  REQUIRE(r.has_timestamps());
  CHECK(r.timestamps().size() == 2);
  CHECK(r.timestamps()[0] == dates[1]);
  CHECK(r.timestamps()[1] == dates[2]);
}

TEST_CASE("log_returns is invariant under price scaling") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(1.0, 200.0);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> p(50);
    for (auto& v : p) v = u(gen);
    const TimeSeries prices(p);
    const double c = u(gen);
    auto a = log_returns(prices);
    auto b = log_returns(prices.scaled(c));
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("order_statistic examples") {
  const TimeSeries x({4.0, 1.0, 3.0});
  CHECK(order_statistic(x, 1) == 1.0);
  CHECK(order_statistic(x, 3) == 4.0);
  CHECK(order_statistic(TimeSeries({2.0, 2.0, 5.0, 1.0}), 3) == 2.0);
  CHECK(code_of([&] { order_statistic(x, 0); }) == ErrorCode::IndexOutOfRange);
  CHECK(code_of([&] { order_statistic(x, 4); }) == ErrorCode::IndexOutOfRange);
}

TEST_CASE("order_statistic is permutation invariant") {
  std::mt19937_64 gen(11);
  auto v = normals(5, 101);
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int rep = 0; rep < 10; ++rep) {
    std::shuffle(v.begin(), v.end(), gen);
    const TimeSeries x(v);
    for (std::size_t i : {1u, 17u, 51u, 100u, 101u}) CHECK(order_statistic(x, i) == sorted[i - 1]);
  }
}

TEST_CASE("sample_acf alternating series") {
  std::vector<double> v(100);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = i % 2 == 0 ? 1.0 : -1.0;
  auto acf = sample_acf(TimeSeries(v), 3);
  REQUIRE(acf.lags.size() == 4);
  CHECK(acf.correlations[0] == 1.0);
  // Mean is exactly zero, so lag-1 autocovariance is -(n-1)/n.
  CHECK(acf.correlations[1] == doctest::Approx(-0.99).epsilon(1e-12));
  CHECK(acf.correlations[1] >= -1.01);
  CHECK(acf.correlations[1] <= -0.97);
}

TEST_CASE("sample_acf of white noise stays inside the band") {
  const std::size_t n = 10000;
  int inside = 0;
  const int seeds = 400;
  for (int s = 0; s < seeds; ++s) {
    auto acf = sample_acf(TimeSeries(normals(100 + s, n)), 5);
    if (std::fabs(acf.correlations[5]) <= 2.0 / std::sqrt(double(n))) ++inside;
  }
  // Coverage of the 2/sqrt(n) band is 0.954; allow two binomial SEs.
  const double rate = inside / double(seeds);
  MESSAGE("lag-5 band coverage " << rate);
  CHECK(rate >= 0.95 - 2.0 * std::sqrt(0.95 * 0.05 / seeds));
}

TEST_CASE("sample_acf invariants") {
  const TimeSeries x(normals(7, 500));
  auto base = sample_acf(x, 10);
  for (double c : base.correlations) CHECK(std::fabs(c) <= 1.0);
  CHECK(base.correlations[0] == 1.0);

  std::vector<double> affine(x.values().begin(), x.values().end());
  for (auto& v : affine) v = 3.5 * v - 12.0;
  auto moved = sample_acf(TimeSeries(affine), 10);
  for (std::size_t k = 0; k <= 10; ++k)
    CHECK(moved.correlations[k] == doctest::Approx(base.correlations[k]).epsilon(1e-10).scale(1.0));

  CHECK(code_of([] { sample_acf(TimeSeries({2.0, 2.0, 2.0}), 1); }) == ErrorCode::DegenerateSeries);
  CHECK(code_of([] { sample_acf(TimeSeries({1.0, 2.0, 3.0}), 3); }) == ErrorCode::TooShort);
  CHECK(sample_acf(TimeSeries({1.0, 2.0, 3.0}), 0).correlations == std::vector<double>{1.0});
}

TEST_CASE("qq_pairs examples") {
  auto qq = qq_pairs(TimeSeries({5.0, -5.0}));
  CHECK(qq.theoretical_quantiles[0] == doctest::Approx(-0.67449).epsilon(1e-5));
  CHECK(qq.theoretical_quantiles[1] == doctest::Approx(0.67449).epsilon(1e-5));
  CHECK(qq.sample_quantiles == std::vector<double>{-5.0, 5.0});
  CHECK(code_of([] { qq_pairs(TimeSeries({1.0})); }) == ErrorCode::TooShort);

  auto big = qq_pairs(TimeSeries(normals(1, 300)));
  CHECK(std::is_sorted(big.theoretical_quantiles.begin(), big.theoretical_quantiles.end()));
  CHECK(std::is_sorted(big.sample_quantiles.begin(), big.sample_quantiles.end()));
}

TEST_CASE("normal_quantile accuracy") {
  // Oracle: a quantile error dq shows up as Phi(q) - p = phi(q) dq, and the
  // CDF comes from erfc, independent of the rational approximation.
  double worst = 0.0;
  for (int i = 1; i < 20000; ++i) {
    const double p = i / 20000.0;
    const double q = normal_quantile(p);
    worst = std::max(worst, std::fabs(normal_cdf(q) - p) / normal_pdf(q));
  }
  for (double p : {1e-300, 1e-100, 1e-20, 1e-10, 1e-5, 1 - 1e-10}) {
    const double q = normal_quantile(p);
    const double lower = q < 0 ? 0.5 * std::erfc(-q / std::sqrt(2.0)) : 1.0 - 0.5 * std::erfc(q / std::sqrt(2.0));
    const double target = std::min(p, 1.0 - p);
    const double got = q < 0 ? lower : 1.0 - lower;
    CHECK(std::fabs(got - target) / target < 1e-8);
  }
  MESSAGE("worst absolute quantile error on the grid: " << worst);
  CHECK(worst <= 1e-9);
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(std::isinf(normal_quantile(0.0)));
  CHECK(std::isnan(normal_quantile(1.5)));
}

TEST_CASE("counter-based stream") {
  UniformStream a(42), b(42), c(43);
  for (int i = 0; i < 1000; ++i) {
    const double ua = a.next_uniform();
    CHECK(ua == b.next_uniform());
    CHECK(ua > 0.0);
    CHECK(ua < 1.0);
    CHECK(ua != c.next_uniform());
  }
  CHECK(a.position() == 1000);
  CHECK(mix64(1, 0) != mix64(1, 1));
  CHECK(mix64(1, 1) != mix64(2, 1));

  UniformStream g(9);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = g.next_normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::fabs(sum / n) < 4.0 / std::sqrt(double(n)));
  CHECK(std::fabs(sq / n - 1.0) < 0.02);
}

TEST_CASE("error categories") {
  CHECK(category_of(ErrorCode::InvalidSpec) == ErrorCategory::Validation);
  CHECK(category_of(ErrorCode::InvalidConfig) == ErrorCategory::Validation);
  CHECK(category_of(ErrorCode::ParseError) == ErrorCategory::Parse);
  CHECK(category_of(ErrorCode::NoExceedances) == ErrorCategory::Domain);
  CHECK(category_of(ErrorCode::NotFound) == ErrorCategory::Io);
  CHECK(std::string(Error(ErrorCode::TooShort, "x").what()) == "TooShort: x");
}

TEST_CASE("format_double round-trips") {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 2000; ++i) {
    const double v = std::exp(u(gen)) * (i % 2 ? 1 : -1);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(250) == "250");
}

TEST_CASE("parse_series formats") {
  auto plain = parse_series("1.5\n2.5\n\n# comment\n3\n");
  CHECK(plain.size() == 3);
  CHECK_FALSE(plain.has_timestamps());

  auto dated = parse_series("Date,Close\r\n2008-01-02,1447.16\r\n2008-01-03,1447.16\r\n2008-01-04,1411.63\r\n");
  CHECK(dated.size() == 3);
  REQUIRE(dated.has_timestamps());
  CHECK(dated.timestamps()[2].iso() == "2008-01-04");
  CHECK(dated[2] == 1411.63);

  auto by_name = parse_series("Date,Open,Close\n2008-01-02,1,10\n2008-01-03,2,20\n", {"Close"});
  CHECK(by_name[1] == 20.0);
  auto by_index = parse_series("Date,Open,Close\n2008-01-02,1,10\n2008-01-03,2,20\n", {"2"});
  CHECK(by_index[1] == 2.0);
  auto headerless = parse_series("2008-01-02,10\n2008-01-03,20\n");
  CHECK(headerless.size() == 2);
}

TEST_CASE("parse_series reports the failing line") {
  try {
    parse_series("2008-01-02,1447.16\n2008-01-03,abc\n");
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK(code_of([] { parse_series("# only comments\n"); }) == ErrorCode::TooShort);
  CHECK(code_of([] { parse_series("v\n1\n2\n", {"missing"}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { read_series("/nonexistent/file.csv"); }) == ErrorCode::NotFound);
}
