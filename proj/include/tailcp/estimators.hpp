#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "tailcp/series.hpp"

namespace tailcp {

enum class EstimatorVariant { Threshold, Hill };

std::string_view to_string(EstimatorVariant variant) noexcept;
EstimatorVariant parse_estimator_variant(std::string_view text);

struct TailEstimate {
  double gamma = 0.0;
  double t = 1.0;
  std::size_t exceedances = 0;
  double threshold = 0.0;
  EstimatorVariant variant = EstimatorVariant::Hill;
};

/// floor(n * t), snapping to the nearest integer when n * t is within
/// rounding noise of it (t = k/n must give exactly k).
std::size_t floor_fraction(std::size_t n, double t);
std::size_t ceil_fraction(std::size_t n, double t);

/// Mean log-excess over a fixed threshold u_n on the prefix floor(n t).
TailEstimate gamma_threshold(const TimeSeries& x, double u_n, double t);

/// Sequential Hill estimator: the floor(k_n t) largest of the first
/// floor(n t) observations against the next order statistic.
TailEstimate hill_sequential(const TimeSeries& x, std::size_t k_n, double t);

/// Hill estimator of the first m values using the top j order statistics.
TailEstimate hill_prefix(std::span<const double> x, std::size_t m, std::size_t j);

/// Hill estimates for a growing prefix in O(log n) per query after an
/// O(n log n) setup. Observations are inserted in series order; the scanner
/// is immutable once built except for the insertion cursor.
class PrefixHillScanner {
 public:
  explicit PrefixHillScanner(std::span<const double> values);

  /// Inserts observations until the prefix length equals m (m never shrinks).
  void advance_to(std::size_t m);
  std::size_t prefix_length() const noexcept { return inserted_; }

  /// Hill estimate on the current prefix with the top j order statistics.
  TailEstimate estimate(std::size_t j) const;

 private:
  std::span<const double> values_;
  std::vector<std::size_t> rank_of_;     // rank (1-based) of each observation
  std::vector<std::size_t> by_rank_;     // observation index at each rank
  std::vector<std::size_t> count_tree_;  // Fenwick tree of counts
  std::vector<double> log_tree_;         // Fenwick tree of log values
  std::size_t inserted_ = 0;
  double total_log_ = 0.0;
  std::size_t tree_top_bit_ = 1;
};

}  // namespace tailcp
