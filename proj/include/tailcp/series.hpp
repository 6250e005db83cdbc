#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tailcp {

/// Calendar date (proleptic Gregorian). Only ordering and ISO-8601
/// formatting are supported.
struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;

  /// Parses `YYYY-MM-DD`; returns nullopt on any malformed or impossible date.
  static std::optional<Date> parse_iso(std::string_view text);
  std::string iso() const;
};

/// Ordered finite observations with optional strictly increasing dates.
class TimeSeries {
 public:
  explicit TimeSeries(std::vector<double> values);
  TimeSeries(std::vector<double> values, std::vector<Date> timestamps);

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  bool has_timestamps() const noexcept { return !timestamps_.empty(); }
  std::span<const Date> timestamps() const noexcept { return timestamps_; }

  double operator[](std::size_t i) const { return values_[i]; }

  TimeSeries scaled(double factor) const;
  TimeSeries prefix(std::size_t length) const;

 private:
  std::vector<double> values_;
  std::vector<Date> timestamps_;
};

struct AcfResult {
  std::vector<std::size_t> lags;
  std::vector<double> correlations;
};

struct QqData {
  std::vector<double> theoretical_quantiles;
  std::vector<double> sample_quantiles;
};

/// L_t = ln(P_t) - ln(P_{t-1}). Timestamps, when present, lose the first date.
TimeSeries log_returns(const TimeSeries& prices);

/// i-th smallest value, 1-based, ties kept with multiplicity.
double order_statistic(const TimeSeries& x, std::size_t i);

/// Mean-centred sample autocorrelation with the biased (1/n) autocovariance.
AcfResult sample_acf(const TimeSeries& x, std::size_t max_lag);

/// Sorted sample against standard normal quantiles at (i - 0.5)/n.
QqData qq_pairs(const TimeSeries& x);

}  // namespace tailcp
