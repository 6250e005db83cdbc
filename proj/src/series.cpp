#include "tailcp/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "tailcp/error.hpp"
#include "tailcp/normal.hpp"

namespace tailcp {

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && is_leap(y) ? 29 : kDays[m - 1];
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

void check_values(const std::vector<double>& values) {
  if (values.empty()) fail(ErrorCode::TooShort, "a time series needs at least one value");
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i]))
      fail(ErrorCode::InvalidArgument, "non-finite value at position " + std::to_string(i + 1));
}

}  // namespace

std::optional<Date> Date::parse_iso(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  Date d;
  if (!parse_int(text.substr(0, 4), d.year) || !parse_int(text.substr(5, 2), d.month) ||
      !parse_int(text.substr(8, 2), d.day))
    return std::nullopt;
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month))
    return std::nullopt;
  return d;
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

TimeSeries::TimeSeries(std::vector<double> values) : values_(std::move(values)) {
  check_values(values_);
}

TimeSeries::TimeSeries(std::vector<double> values, std::vector<Date> timestamps)
    : values_(std::move(values)), timestamps_(std::move(timestamps)) {
  check_values(values_);
  if (!timestamps_.empty()) {
    if (timestamps_.size() != values_.size())
      fail(ErrorCode::InvalidArgument, "timestamps and values differ in length");
    for (std::size_t i = 1; i < timestamps_.size(); ++i)
      if (!(timestamps_[i - 1] < timestamps_[i]))
        fail(ErrorCode::InvalidArgument,
             "timestamps not strictly increasing at " + timestamps_[i].iso());
  }
}

TimeSeries TimeSeries::scaled(double factor) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= factor;
  return timestamps_.empty() ? TimeSeries(std::move(v)) : TimeSeries(std::move(v), timestamps_);
}

TimeSeries TimeSeries::prefix(std::size_t length) const {
  if (length == 0 || length > size())
    fail(ErrorCode::IndexOutOfRange, "prefix length " + std::to_string(length));
  std::vector<double> v(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(length));
  if (timestamps_.empty()) return TimeSeries(std::move(v));
  return TimeSeries(std::move(v), std::vector<Date>(timestamps_.begin(),
                                                    timestamps_.begin() + static_cast<std::ptrdiff_t>(length)));
}

TimeSeries log_returns(const TimeSeries& prices) {
  const auto p = prices.values();
  if (p.size() < 2) fail(ErrorCode::TooShort, "log returns need at least two prices");
  for (std::size_t i = 0; i < p.size(); ++i)
    if (!(p[i] > 0.0))
      fail(ErrorCode::NonPositivePrice, "price at position " + std::to_string(i + 1) + " is not positive");
  std::vector<double> r(p.size() - 1);
  for (std::size_t i = 1; i < p.size(); ++i) r[i - 1] = std::log(p[i]) - std::log(p[i - 1]);
  if (!prices.has_timestamps()) return TimeSeries(std::move(r));
  auto ts = prices.timestamps();
  return TimeSeries(std::move(r), std::vector<Date>(ts.begin() + 1, ts.end()));
}

double order_statistic(const TimeSeries& x, std::size_t i) {
  if (i < 1 || i > x.size())
    fail(ErrorCode::IndexOutOfRange,
         "order statistic " + std::to_string(i) + " of " + std::to_string(x.size()));
  std::vector<double> v(x.values().begin(), x.values().end());
  auto nth = v.begin() + static_cast<std::ptrdiff_t>(i - 1);
  std::nth_element(v.begin(), nth, v.end());
  return *nth;
}

AcfResult sample_acf(const TimeSeries& x, std::size_t max_lag) {
  const auto v = x.values();
  const std::size_t n = v.size();
  if (max_lag >= n)
    fail(ErrorCode::TooShort, "max_lag " + std::to_string(max_lag) + " needs more than " +
                                  std::to_string(n) + " observations");
  double mean = 0.0;
  for (double e : v) mean += e;
  mean /= static_cast<double>(n);
  std::vector<double> centred(n);
  for (std::size_t i = 0; i < n; ++i) centred[i] = v[i] - mean;
  double c0 = 0.0;
  for (double e : centred) c0 += e * e;
  if (!(c0 > 0.0)) fail(ErrorCode::DegenerateSeries, "sample variance is zero");

  AcfResult out;
  out.lags.resize(max_lag + 1);
  out.correlations.resize(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double ck = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) ck += centred[i] * centred[i + k];
    out.lags[k] = k;
    out.correlations[k] = k == 0 ? 1.0 : std::clamp(ck / c0, -1.0, 1.0);
  }
  return out;
}

QqData qq_pairs(const TimeSeries& x) {
  const std::size_t n = x.size();
  if (n < 2) fail(ErrorCode::TooShort, "a Q-Q plot needs at least two observations");
  QqData out;
  out.sample_quantiles.assign(x.values().begin(), x.values().end());
  std::sort(out.sample_quantiles.begin(), out.sample_quantiles.end());
  out.theoretical_quantiles.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.theoretical_quantiles[i] =
        normal_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(n));
  return out;
}

}  // namespace tailcp
