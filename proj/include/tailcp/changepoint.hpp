#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tailcp/estimators.hpp"
#include "tailcp/series.hpp"

namespace tailcp {

inline constexpr double kReferenceCritval95 = 1.3463348;

/// Candidate break k over prefix lengths with Gamma_{k,n} = (k/n)|g(k/n)/g(1) - 1|.
struct GammaPath {
  std::vector<std::size_t> ks;
  std::vector<double> values;
  std::vector<double> prefix_gamma;
  double full_gamma = 0.0;
  EstimatorVariant variant = EstimatorVariant::Hill;
  std::size_t k_n = 0;
  double t0 = 0.0;
  double threshold = 0.0;  // u_n for the Threshold variant
};

/// How the start of the scan is chosen.
struct T0Policy {
  enum class Kind {
    Default,  ///< smallest t with floor(k_n t) >= 10
    AutoMin,  ///< smallest t with floor(k_n t) >= 1
    Fixed,
  };
  Kind kind = Kind::Default;
  double value = 0.0;

  static T0Policy fixed(double t0) { return {Kind::Fixed, t0}; }
  static T0Policy auto_min() { return {Kind::AutoMin, 0.0}; }
  static T0Policy parse(std::string_view text);
  std::string describe() const;
};

inline constexpr std::size_t kDefaultMinTopOrderStatistics = 10;

/// Resolves a policy to a concrete t0 in (0, 1).
double resolve_t0(const T0Policy& policy, std::size_t n, std::size_t k_n);

/// Scan over k = ceil(n t0) .. n-1. The Threshold variant holds
/// u_n = X_{n:n-k_n} fixed and skips prefixes without exceedances; the Hill
/// variant skips prefixes with floor(k_n k/n) = 0.
GammaPath gamma_path(const TimeSeries& x, std::size_t k_n, double t0,
                     EstimatorVariant variant);

struct TestStatistic {
  double raw = 0.0;
  std::size_t argmax_k = 0;
};

/// Maximum of the path; ties go to the earliest k.
TestStatistic test_statistic(const GammaPath& path);
TestStatistic test_statistic(const TimeSeries& x, std::size_t k_n, double t0,
                             EstimatorVariant variant);

/// P(sup |B(t) - tB(1)| <= x) on [0, 1].
double kolmogorov_cdf(double x);
/// Inverse of kolmogorov_cdf for p in (0, 1).
double kolmogorov_quantile(double p);

struct McCriticalValueOptions {
  double level = 0.95;
  double t0 = 0.0;
  std::size_t n_paths = 100000;
  std::size_t n_grid = 4096;
  std::uint64_t seed = 20240601;
  unsigned workers = 0;
};

/// Values B(i/n_grid) - (i/n_grid) B(1), i = 0..n_grid, of path `path` in the
/// same construction the critical values use.
std::vector<double> brownian_bridge_path(std::uint64_t seed, std::size_t path, std::size_t n_grid);

/// Per-path sup over grid points i/n_grid >= t0 of |B - tB(1)|, one stream
/// per path.
std::vector<double> bridge_sup_samples(const McCriticalValueOptions& options);

/// Empirical level-quantile (inverse ECDF) of the simulated bridge sups.
double mc_critical_value(const McCriticalValueOptions& options);

/// Quantiles at several levels from the same simulated sups.
std::vector<double> mc_critical_values(const McCriticalValueOptions& options,
                                       const std::vector<double>& levels);

enum class CritvalSource { MonteCarlo, KolmogorovAnalytic, UserSupplied };

std::string_view to_string(CritvalSource source) noexcept;
CritvalSource parse_critval_source(std::string_view text);

struct CriticalValue {
  double value = 0.0;
  CritvalSource source = CritvalSource::MonteCarlo;
};

struct DecideOptions {
  std::size_t k_n = 0;
  T0Policy t0 = {};
  double level = 0.05;  // significance; the critical value is the (1 - level) quantile
  EstimatorVariant variant = EstimatorVariant::Hill;
  CritvalSource critval_source = CritvalSource::MonteCarlo;
  double user_critval = kReferenceCritval95;
  std::size_t mc_paths = 100000;
  std::size_t mc_grid = 4096;
  std::uint64_t mc_seed = 20240601;
  unsigned workers = 0;
};

/// Process-wide memo for Monte Carlo critical values keyed by every input.
double cached_mc_critical_value(const McCriticalValueOptions& options);

CriticalValue resolve_critical_value(const DecideOptions& options, double t0);

struct ChangePointReport {
  double statistic_raw = 0.0;
  double statistic_scaled = 0.0;
  double scaling = 0.0;  // sqrt(k_n)
  double critical_value = 0.0;
  double level = 0.05;
  bool reject = false;
  std::size_t change_index = 0;
  double change_fraction = 0.0;
  std::optional<Date> change_date;
  std::size_t n = 0;
  std::size_t k_n = 0;
  double t0 = 0.0;
  std::string t0_policy;
  EstimatorVariant variant = EstimatorVariant::Hill;
  CritvalSource critval_source = CritvalSource::MonteCarlo;
  std::uint64_t mc_seed = 0;
  std::size_t mc_paths = 0;
  std::size_t mc_grid = 0;
};

ChangePointReport decide(const TimeSeries& x, const DecideOptions& options);

/// Same as decide() with a pre-resolved critical value; also returns the path.
ChangePointReport decide_with(const TimeSeries& x, const DecideOptions& options,
                              const CriticalValue& critval, GammaPath* path_out = nullptr);

/// k_n = floor(n p).
std::size_t k_from_proportion(std::size_t n, double p);

}  // namespace tailcp
