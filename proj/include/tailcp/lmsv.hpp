#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "tailcp/series.hpp"

namespace tailcp {

enum class InnovationFamily {
  StandardPareto,     ///< P(e > x) = x^-alpha, x >= 1
  GeneralizedPareto,  ///< shape 1/alpha, scale 1, location 0
};

std::string_view to_string(InnovationFamily family) noexcept;
InnovationFamily parse_innovation_family(std::string_view text);

/// Recipe for one LMSV path X_j = exp(Y_j) * e_j. The innovations switch
/// from tail index alpha to alpha + change_height after floor(n * tau)
/// observations.
struct LmsvSpec {
  std::size_t n = 1000;
  double hurst = 0.7;
  double alpha = 2.0;
  double change_height = 0.0;
  double change_fraction = 1.0;
  InnovationFamily family = InnovationFamily::StandardPareto;
  bool center_innovations = false;
  std::uint64_t seed = 0;

  bool has_break() const noexcept { return change_height != 0.0 && change_fraction < 1.0; }
  /// Number of observations drawn with the pre-break index.
  std::size_t break_index() const noexcept;
  /// Throws InvalidSpec when the recipe is outside the model.
  void validate() const;
};

struct LmsvPath {
  std::vector<double> x;
  std::vector<double> volatility_driver;  // Y_j
  std::vector<double> innovations;        // e_j
};

double pareto_quantile(double u, double alpha,
                       InnovationFamily family = InnovationFamily::StandardPareto);

/// Survival function of the innovation law.
double innovation_survival(double x, double alpha, InnovationFamily family);

LmsvPath simulate_lmsv_path(const LmsvSpec& spec);
TimeSeries simulate_lmsv(const LmsvSpec& spec);

/// Sub-stream keys derived from the master seed. The volatility stream does
/// not depend on the innovation parameters and vice versa.
std::uint64_t volatility_stream_seed(std::uint64_t master) noexcept;
std::uint64_t innovation_stream_seed(std::uint64_t master) noexcept;

/// Marginal survival function P(exp(Y) e > x) for Y ~ N(0, 1) independent of
/// an uncentred innovation with tail index alpha.
double lmsv_marginal_survival(double x, double alpha, InnovationFamily family);

/// Threshold u with n * P(X > u) = expected_exceedances for the stationary
/// LMSV marginal.
double lmsv_threshold_for_exceedances(std::size_t n, double expected_exceedances,
                                      double alpha, InnovationFamily family);

/// d_{n,r} with unit slowly varying factor: sqrt(c_r) n^(1 - rD/2),
/// c_r = 2 r! / ((1 - Dr)(2 - Dr)).
double d_n_r(double n, double lrd_d, unsigned hermite_rank);

enum class Regime { LrdDominant, MartingaleDominant, Boundary };

std::string_view to_string(Regime regime) noexcept;

inline constexpr double kDefaultBoundaryBand = 3.0;

struct RegimeReport {
  double lrd_rate = 0.0;  // n / d_{n,1}
  double clt_rate = 0.0;  // sqrt(k_n)
  Regime regime = Regime::Boundary;
  unsigned hermite_rank = 1;
  double lrd_d = 0.0;  // 2 - 2H

  double rate_ratio() const noexcept { return clt_rate / lrd_rate; }
};

RegimeReport classify_regime(std::size_t n, double hurst, double k_n,
                             double boundary_band = kDefaultBoundaryBand);

}  // namespace tailcp
