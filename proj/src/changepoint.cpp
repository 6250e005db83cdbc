#include "tailcp/changepoint.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <tuple>

#include "tailcp/error.hpp"
#include "tailcp/parallel.hpp"
#include "tailcp/random.hpp"

namespace tailcp {

namespace {

std::string str(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void check_k_n(std::size_t n, std::size_t k_n) {
  if (k_n < 1 || k_n + 1 > n)
    fail(ErrorCode::InvalidArgument, "k_n must satisfy 1 <= k_n <= n-1, got k_n = " +
                                         std::to_string(k_n) + " with n = " + std::to_string(n));
}

std::size_t smallest_k_with_top(std::size_t n, std::size_t k_n, std::size_t top) {
  // smallest k with floor(k_n k / n) >= top
  return (top * n + k_n - 1) / k_n;
}

}  // namespace

T0Policy T0Policy::parse(std::string_view text) {
  if (text == "default") return {};
  if (text == "auto-min" || text == "auto") return auto_min();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !(v > 0.0 && v < 1.0))
    fail(ErrorCode::InvalidArgument,
         "t0 must be 'default', 'auto-min' or a number in (0, 1), got '" + std::string(text) + "'");
  return fixed(v);
}

std::string T0Policy::describe() const {
  switch (kind) {
    case Kind::Default: return "default";
    case Kind::AutoMin: return "auto-min";
    case Kind::Fixed: return str(value);
  }
  return "default";
}

double resolve_t0(const T0Policy& policy, std::size_t n, std::size_t k_n) {
  check_k_n(n, k_n);
  if (policy.kind == T0Policy::Kind::Fixed) {
    if (!(policy.value > 0.0 && policy.value < 1.0))
      fail(ErrorCode::InvalidArgument, "t0 must lie in (0, 1), got " + str(policy.value));
    return policy.value;
  }
  const std::size_t top = policy.kind == T0Policy::Kind::Default ? kDefaultMinTopOrderStatistics : 1;
  const std::size_t k_min = smallest_k_with_top(n, k_n, top);
  if (k_min >= n)
    fail(ErrorCode::NoAdmissibleK, "no prefix keeps " + std::to_string(top) +
                                       " top order statistics with k_n = " + std::to_string(k_n) +
                                       "; increase p or lower t0");
  return static_cast<double>(k_min) / static_cast<double>(n);
}

GammaPath gamma_path(const TimeSeries& x, std::size_t k_n, double t0, EstimatorVariant variant) {
  const std::size_t n = x.size();
  check_k_n(n, k_n);
  if (!(t0 > 0.0 && t0 < 1.0)) fail(ErrorCode::InvalidArgument, "t0 must lie in (0, 1), got " + str(t0));
  const auto v = x.values();
  const std::size_t k_start = std::max<std::size_t>(1, ceil_fraction(n, t0));

  GammaPath path;
  path.variant = variant;
  path.k_n = k_n;
  path.t0 = t0;
  const double nd = static_cast<double>(n);

  auto push = [&](std::size_t k, double prefix_gamma) {
    path.ks.push_back(k);
    path.prefix_gamma.push_back(prefix_gamma);
    path.values.push_back(static_cast<double>(k) / nd * std::fabs(prefix_gamma / path.full_gamma - 1.0));
  };

  if (variant == EstimatorVariant::Hill) {
    path.full_gamma = hill_prefix(v, n, k_n).gamma;
    if (!(path.full_gamma > 0.0))
      fail(ErrorCode::DegenerateSeries, "full-sample Hill estimate is zero (tied upper tail)");
    PrefixHillScanner scanner(v);
    for (std::size_t k = k_start; k < n; ++k) {
      const std::size_t j = k_n * k / n;
      if (j < 1) continue;
      scanner.advance_to(k);
      push(k, scanner.estimate(j).gamma);
    }
  } else {
    const double u = order_statistic(x, n - k_n);
    if (!(u > 0.0))
      fail(ErrorCode::NonPositiveReference, "threshold X_{n:n-k_n} = " + str(u) + " is not positive");
    path.threshold = u;
    path.full_gamma = gamma_threshold(x, u, 1.0).gamma;
    if (!(path.full_gamma > 0.0))
      fail(ErrorCode::DegenerateSeries, "full-sample threshold estimate is zero");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 1; k < n; ++k) {
      if (v[k - 1] > u) {
        sum += std::log(v[k - 1] / u);
        ++count;
      }
      if (k < k_start || count == 0) continue;
      push(k, sum / static_cast<double>(count));
    }
  }
  if (path.ks.empty())
    fail(ErrorCode::NoAdmissibleK, "no admissible break index for t0 = " + str(t0) +
                                       "; increase p or lower t0");
  return path;
}

TestStatistic test_statistic(const GammaPath& path) {
  if (path.values.empty()) fail(ErrorCode::NoAdmissibleK, "empty Gamma path");
  TestStatistic out{path.values.front(), path.ks.front()};
  for (std::size_t i = 1; i < path.values.size(); ++i) {
    if (path.values[i] > out.raw) {
      out.raw = path.values[i];
      out.argmax_k = path.ks[i];
    }
  }
  return out;
}

TestStatistic test_statistic(const TimeSeries& x, std::size_t k_n, double t0, EstimatorVariant variant) {
  return test_statistic(gamma_path(x, k_n, t0, variant));
}

double kolmogorov_cdf(double x) {
  if (!(x > 0.0)) return 0.0;
  if (std::isinf(x)) return 1.0;
  constexpr double kTermFloor = 1e-12;
  double value;
  if (x < 1.18) {
    // Jacobi-theta form, rapidly convergent for small x.
    const double a = -std::numbers::pi * std::numbers::pi / (8.0 * x * x);
    double sum = 0.0;
    for (int k = 1; k < 1000; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(a * odd * odd);
      sum += term;
      if (term < kTermFloor) break;
    }
    value = std::sqrt(2.0 * std::numbers::pi) / x * sum;
  } else {
    double sum = 0.0;
    for (int k = 1; k < 1000; ++k) {
      const double term = std::exp(-2.0 * k * k * x * x);
      sum += (k % 2 == 1) ? term : -term;
      if (term < kTermFloor) break;
    }
    value = 1.0 - 2.0 * sum;
  }
  return std::clamp(value, 0.0, 1.0);
}

double kolmogorov_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) fail(ErrorCode::InvalidArgument, "quantile level must lie in (0, 1)");
  double lo = 1e-3;
  double hi = 10.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (kolmogorov_cdf(mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

// Random walk with N(0, 1/grid) steps, walk[i] ~ B(i/grid).
void fill_walk(std::uint64_t key, std::vector<double>& walk) {
  const std::size_t grid = walk.size() - 1;
  const double step_sd = 1.0 / std::sqrt(static_cast<double>(grid));
  UniformStream stream(key);
  walk[0] = 0.0;
  for (std::size_t i = 1; i <= grid; ++i) walk[i] = walk[i - 1] + step_sd * stream.next_normal();
}

}  // namespace

std::vector<double> brownian_bridge_path(std::uint64_t seed, std::size_t path, std::size_t n_grid) {
  if (n_grid < 1) fail(ErrorCode::InvalidArgument, "n_grid must be positive");
  std::vector<double> walk(n_grid + 1);
  fill_walk(mix64(seed, path), walk);
  const double end_value = walk[n_grid];
  for (std::size_t i = 0; i <= n_grid; ++i)
    walk[i] -= static_cast<double>(i) / static_cast<double>(n_grid) * end_value;
  return walk;
}

std::vector<double> bridge_sup_samples(const McCriticalValueOptions& o) {
  if (o.n_paths < 1000) fail(ErrorCode::InvalidArgument, "n_paths must be at least 1000");
  if (o.n_grid < 1024) fail(ErrorCode::InvalidArgument, "n_grid must be at least 1024");
  if (!(o.t0 >= 0.0 && o.t0 < 1.0)) fail(ErrorCode::InvalidArgument, "t0 must lie in [0, 1)");

  const std::size_t grid = o.n_grid;
  const std::size_t first = std::max<std::size_t>(1, ceil_fraction(grid, o.t0));
  const double inv_grid = 1.0 / static_cast<double>(grid);
  constexpr std::size_t kChunk = 256;
  const std::size_t chunks = (o.n_paths + kChunk - 1) / kChunk;

  std::vector<double> sups(o.n_paths);
  parallel_for(chunks, o.workers, [&](std::size_t c) {
    std::vector<double> walk(grid + 1);
    const std::size_t end = std::min(o.n_paths, (c + 1) * kChunk);
    for (std::size_t p = c * kChunk; p < end; ++p) {
      fill_walk(mix64(o.seed, p), walk);
      const double end_value = walk[grid];
      double sup = 0.0;
      for (std::size_t i = first; i <= grid; ++i)
        sup = std::max(sup, std::fabs(walk[i] - static_cast<double>(i) * inv_grid * end_value));
      sups[p] = sup;
    }
  });
  return sups;
}

namespace {

double empirical_quantile(const std::vector<double>& sorted, double level) {
  if (!(level > 0.0 && level < 1.0)) fail(ErrorCode::InvalidArgument, "quantile level must lie in (0, 1)");
  const auto n = static_cast<double>(sorted.size());
  auto idx = static_cast<std::size_t>(std::ceil(level * n));
  idx = std::clamp<std::size_t>(idx, 1, sorted.size());
  return sorted[idx - 1];
}

std::vector<double> sorted_sups(const McCriticalValueOptions& o) {
  auto s = bridge_sup_samples(o);
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

double mc_critical_value(const McCriticalValueOptions& options) {
  if (!(options.level > 0.0 && options.level < 1.0))
    fail(ErrorCode::InvalidArgument, "quantile level must lie in (0, 1)");
  return empirical_quantile(sorted_sups(options), options.level);
}

std::vector<double> mc_critical_values(const McCriticalValueOptions& options,
                                       const std::vector<double>& levels) {
  const auto s = sorted_sups(options);
  std::vector<double> out;
  out.reserve(levels.size());
  for (double l : levels) out.push_back(empirical_quantile(s, l));
  return out;
}

double cached_mc_critical_value(const McCriticalValueOptions& o) {
  using Key = std::tuple<double, std::size_t, std::size_t, std::uint64_t>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const std::vector<double>>> cache;
  if (!(o.level > 0.0 && o.level < 1.0))
    fail(ErrorCode::InvalidArgument, "quantile level must lie in (0, 1)");
  const Key key{o.t0, o.n_paths, o.n_grid, o.seed};
  std::shared_ptr<const std::vector<double>> samples;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) samples = it->second;
  }
  if (!samples) {
    auto fresh = std::make_shared<const std::vector<double>>(sorted_sups(o));
    std::lock_guard lock(mutex);
    samples = cache.emplace(key, std::move(fresh)).first->second;
  }
  return empirical_quantile(*samples, o.level);
}

std::string_view to_string(CritvalSource source) noexcept {
  switch (source) {
    case CritvalSource::MonteCarlo: return "monte-carlo";
    case CritvalSource::KolmogorovAnalytic: return "kolmogorov";
    case CritvalSource::UserSupplied: return "user";
  }
  return "unknown";
}

CritvalSource parse_critval_source(std::string_view text) {
  if (text == "monte-carlo" || text == "mc") return CritvalSource::MonteCarlo;
  if (text == "kolmogorov" || text == "analytic") return CritvalSource::KolmogorovAnalytic;
  if (text == "user") return CritvalSource::UserSupplied;
  fail(ErrorCode::InvalidArgument, "unknown critical value source '" + std::string(text) + "'");
}

CriticalValue resolve_critical_value(const DecideOptions& options, double t0) {
  if (!(options.level > 0.0 && options.level < 1.0))
    fail(ErrorCode::InvalidArgument, "significance level must lie in (0, 1), got " + str(options.level));
  switch (options.critval_source) {
    case CritvalSource::MonteCarlo: {
      McCriticalValueOptions mc;
      mc.level = 1.0 - options.level;
      mc.t0 = t0;
      mc.n_paths = options.mc_paths;
      mc.n_grid = options.mc_grid;
      mc.seed = options.mc_seed;
      mc.workers = options.workers;
      return {cached_mc_critical_value(mc), CritvalSource::MonteCarlo};
    }
    case CritvalSource::KolmogorovAnalytic:
      return {kolmogorov_quantile(1.0 - options.level), CritvalSource::KolmogorovAnalytic};
    case CritvalSource::UserSupplied:
      if (!(options.user_critval > 0.0))
        fail(ErrorCode::InvalidArgument, "user critical value must be positive");
      return {options.user_critval, CritvalSource::UserSupplied};
  }
  fail(ErrorCode::InvalidArgument, "unknown critical value source");
}

ChangePointReport decide_with(const TimeSeries& x, const DecideOptions& options,
                              const CriticalValue& critval, GammaPath* path_out) {
  const std::size_t n = x.size();
  const double t0 = resolve_t0(options.t0, n, options.k_n);
  GammaPath path = gamma_path(x, options.k_n, t0, options.variant);
  const TestStatistic stat = test_statistic(path);

  ChangePointReport r;
  r.statistic_raw = stat.raw;
  r.scaling = std::sqrt(static_cast<double>(options.k_n));
  r.statistic_scaled = r.scaling * stat.raw;
  r.critical_value = critval.value;
  r.critval_source = critval.source;
  r.level = options.level;
  r.reject = r.statistic_scaled > critval.value;
  r.change_index = stat.argmax_k;
  r.change_fraction = static_cast<double>(stat.argmax_k) / static_cast<double>(n);
  if (x.has_timestamps()) r.change_date = x.timestamps()[stat.argmax_k - 1];
  r.n = n;
  r.k_n = options.k_n;
  r.t0 = t0;
  r.t0_policy = options.t0.describe();
  r.variant = options.variant;
  if (critval.source == CritvalSource::MonteCarlo) {
    r.mc_seed = options.mc_seed;
    r.mc_paths = options.mc_paths;
    r.mc_grid = options.mc_grid;
  }
  if (path_out) *path_out = std::move(path);
  return r;
}

ChangePointReport decide(const TimeSeries& x, const DecideOptions& options) {
  const double t0 = resolve_t0(options.t0, x.size(), options.k_n);
  return decide_with(x, options, resolve_critical_value(options, t0));
}

std::size_t k_from_proportion(std::size_t n, double p) {
  if (!(p > 0.0 && p < 1.0)) fail(ErrorCode::InvalidArgument, "p must lie in (0, 1), got " + str(p));
  const std::size_t k = floor_fraction(n, p);
  if (k < 1) fail(ErrorCode::InvalidArgument, "floor(n p) = 0; increase p");
  return k;
}

}  // namespace tailcp
