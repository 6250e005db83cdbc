#include "tailcp/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tailcp/error.hpp"

namespace tailcp {

namespace {

constexpr double kSnapTolerance = 1e-9;

void check_fraction(double t) {
  if (!(t > 0.0 && t <= 1.0)) {
    std::ostringstream os;
    os << "prefix fraction must lie in (0, 1], got " << t;
    fail(ErrorCode::InvalidArgument, os.str());
  }
}

}  // namespace

std::string_view to_string(EstimatorVariant variant) noexcept {
  return variant == EstimatorVariant::Hill ? "hill" : "threshold";
}

EstimatorVariant parse_estimator_variant(std::string_view text) {
  if (text == "hill") return EstimatorVariant::Hill;
  if (text == "threshold") return EstimatorVariant::Threshold;
  fail(ErrorCode::InvalidArgument, "unknown estimator variant '" + std::string(text) + "'");
}

std::size_t floor_fraction(std::size_t n, double t) {
  const double v = static_cast<double>(n) * t;
  const double r = std::round(v);
  if (std::fabs(v - r) <= kSnapTolerance * std::max(1.0, std::fabs(v)))
    return static_cast<std::size_t>(std::max(0.0, r));
  return static_cast<std::size_t>(std::max(0.0, std::floor(v)));
}

std::size_t ceil_fraction(std::size_t n, double t) {
  const double v = static_cast<double>(n) * t;
  const double r = std::round(v);
  if (std::fabs(v - r) <= kSnapTolerance * std::max(1.0, std::fabs(v)))
    return static_cast<std::size_t>(std::max(0.0, r));
  return static_cast<std::size_t>(std::max(0.0, std::ceil(v)));
}

TailEstimate gamma_threshold(const TimeSeries& x, double u_n, double t) {
  if (!(u_n > 0.0)) fail(ErrorCode::InvalidArgument, "threshold must be positive");
  check_fraction(t);
  const std::size_t m = floor_fraction(x.size(), t);
  const auto v = x.values();
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t j = 0; j < m; ++j) {
    if (v[j] > u_n) {
      sum += std::log(v[j] / u_n);
      ++count;
    }
  }
  if (count == 0) {
    std::ostringstream os;
    os << "no observation among the first " << m << " exceeds u_n = " << u_n
       << "; lower the threshold or widen the prefix";
    fail(ErrorCode::NoExceedances, os.str());
  }
  return TailEstimate{sum / static_cast<double>(count), t, count, u_n, EstimatorVariant::Threshold};
}

TailEstimate hill_prefix(std::span<const double> x, std::size_t m, std::size_t j) {
  if (m < 2 || m > x.size())
    fail(ErrorCode::InsufficientPrefix, "Hill estimation needs a prefix of at least 2 observations, got " +
                                            std::to_string(m));
  if (j < 1 || j > m - 1)
    fail(ErrorCode::InsufficientPrefix, "Hill estimation on " + std::to_string(m) +
                                            " observations needs 1 <= k <= m-1, got k = " +
                                            std::to_string(j));
  std::vector<double> v(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(m));
  // Reference X_{m:m-j} sits at ascending position m-j-1.
  auto ref_it = v.begin() + static_cast<std::ptrdiff_t>(m - j - 1);
  std::nth_element(v.begin(), ref_it, v.end());
  const double ref = *ref_it;
  if (!(ref > 0.0)) {
    std::ostringstream os;
    os << "reference order statistic X_{" << m << ":" << m - j << "} = " << ref
       << " is not positive";
    fail(ErrorCode::NonPositiveReference, os.str());
  }
  // Top-j values equal to ref add log(1) = 0; the rest are summed in time order.
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    if (x[i] > ref) sum += std::log(x[i] / ref);
  return TailEstimate{std::max(0.0, sum / static_cast<double>(j)),
                      static_cast<double>(m) / static_cast<double>(x.size()), j, ref,
                      EstimatorVariant::Hill};
}

TailEstimate hill_sequential(const TimeSeries& x, std::size_t k_n, double t) {
  check_fraction(t);
  const std::size_t m = floor_fraction(x.size(), t);
  const std::size_t j = floor_fraction(k_n, t);
  if (j == 0)
    fail(ErrorCode::InsufficientPrefix, "floor(k_n t) = 0; raise t or k_n");
  TailEstimate est = hill_prefix(x.values(), m, j);
  est.t = t;
  return est;
}

PrefixHillScanner::PrefixHillScanner(std::span<const double> values)
    : values_(values),
      rank_of_(values.size()),
      by_rank_(values.size()),
      count_tree_(values.size() + 1, 0),
      log_tree_(values.size() + 1, 0.0) {
  std::iota(by_rank_.begin(), by_rank_.end(), std::size_t{0});
  std::stable_sort(by_rank_.begin(), by_rank_.end(),
                   [&](std::size_t a, std::size_t b) { return values_[a] < values_[b]; });
  for (std::size_t r = 0; r < by_rank_.size(); ++r) rank_of_[by_rank_[r]] = r + 1;
  while (tree_top_bit_ * 2 <= values.size()) tree_top_bit_ *= 2;
}

void PrefixHillScanner::advance_to(std::size_t m) {
  if (m > values_.size()) fail(ErrorCode::IndexOutOfRange, "prefix beyond series length");
  const std::size_t n = values_.size();
  for (; inserted_ < m; ++inserted_) {
    const double v = values_[inserted_];
    const double lv = v > 0.0 ? std::log(v) : 0.0;
    total_log_ += lv;
    for (std::size_t pos = rank_of_[inserted_]; pos <= n; pos += pos & (~pos + 1)) {
      count_tree_[pos] += 1;
      log_tree_[pos] += lv;
    }
  }
}

TailEstimate PrefixHillScanner::estimate(std::size_t j) const {
  const std::size_t m = inserted_;
  if (m < 2) fail(ErrorCode::InsufficientPrefix, "Hill estimation needs a prefix of at least 2 observations");
  if (j < 1 || j > m - 1)
    fail(ErrorCode::InsufficientPrefix, "Hill estimation on " + std::to_string(m) +
                                            " observations needs 1 <= k <= m-1, got k = " +
                                            std::to_string(j));
  // Descend to the (m-j)-th smallest inserted value, accumulating the log
  // mass strictly below it.
  std::size_t pos = 0;
  std::size_t remaining = m - j;
  double below = 0.0;
  for (std::size_t step = tree_top_bit_; step > 0; step >>= 1) {
    const std::size_t next = pos + step;
    if (next < count_tree_.size() && count_tree_[next] < remaining) {
      pos = next;
      remaining -= count_tree_[next];
      below += log_tree_[next];
    }
  }
  const double ref = values_[by_rank_[pos]];
  if (!(ref > 0.0)) {
    std::ostringstream os;
    os << "reference order statistic X_{" << m << ":" << m - j << "} = " << ref
       << " is not positive";
    fail(ErrorCode::NonPositiveReference, os.str());
  }
  const double log_ref = std::log(ref);
  const double top = total_log_ - below - log_ref;
  const double gamma = top / static_cast<double>(j) - log_ref;
  return TailEstimate{std::max(0.0, gamma), static_cast<double>(m) / static_cast<double>(values_.size()),
                      j, ref, EstimatorVariant::Hill};
}

}  // namespace tailcp
