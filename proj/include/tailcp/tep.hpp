#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tailcp/lmsv.hpp"
#include "tailcp/series.hpp"

namespace tailcp {

/// Dense row-major matrix indexed (s, t).
class Grid2D {
 public:
  Grid2D() = default;
  Grid2D(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class NormalizerSource { Exact, ExceedanceCount, UserSupplied };

/// Two-parameter tail empirical process evaluated on an (s, t) grid.
struct TepSurface {
  std::vector<double> s_grid;
  std::vector<double> t_grid;
  Grid2D values;
  double normalizer = 1.0;  // n * Fbar(u_n) or its estimate
  double threshold = 0.0;   // u_n
  NormalizerSource normalizer_source = NormalizerSource::UserSupplied;
};

/// values(i, j) = #{l <= floor(n t_j) : x_l > u_n s_i} / normalizer.
TepSurface tail_surface(const TimeSeries& x, double u_n, std::vector<double> s_grid,
                        std::vector<double> t_grid, double normalizer,
                        NormalizerSource source = NormalizerSource::UserSupplied);

/// Feasible surface on data: u_n = X_{n:n-k_n}, normalizer = k_n.
TepSurface data_tail_surface(const TimeSeries& x, std::size_t k_n,
                             std::vector<double> s_grid, std::vector<double> t_grid);

/// e_n(s, t) = T_n(s, t) - t s^-alpha.
Grid2D centered_surface(const TepSurface& surface, double alpha);

/// Fbar(x) = x^-alpha (1 + c x^-(alpha beta)) / (1 + c) on x >= 1.
struct SecondOrderFamily {
  double alpha = 1.0;
  double beta = 1.0;
  double c = 0.0;

  double survival(double x) const;
};

inline constexpr double kSecondOrderEpsilon = 0.01;

struct SecondOrderCheck {
  double max_ratio = 0.0;
  double argmax_z = 0.0;
  double argmax_t = 0.0;
  std::vector<double> max_ratio_per_t;  // aligned with the threshold grid
  double epsilon = kSecondOrderEpsilon;
  double rho = 0.0;
};

/// max over (z, t) of |Fbar(zt)/Fbar(t) - z^-alpha| /
/// (eta*(t) z^(-alpha-rho) max(z, 1/z)^eps), eta*(t) = t^-rho, rho = alpha beta.
SecondOrderCheck second_order_bound_check(const SecondOrderFamily& family,
                                          const std::vector<double>& z_grid,
                                          const std::vector<double>& t_grid,
                                          double epsilon = kSecondOrderEpsilon);

struct RegimeProbeResult {
  RegimeReport regime;
  double scale = 0.0;      // a_n
  double threshold = 0.0;  // u_n with n Fbar(u_n) = k_n
  double k_n = 0.0;
  std::vector<double> s_grid;
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<double> correlation_with_s1;
  std::size_t reps = 0;
};

/// Monte Carlo moments of a_n e_n(s, 1) under the stationary LMSV null.
/// a_n = sqrt(k_n) when sqrt(k_n) < n/d_{n,1} (martingale side, including
/// the lower half of the boundary band) and n/d_{n,1} otherwise.
RegimeProbeResult regime_probe(const LmsvSpec& spec, double k_n,
                               const std::vector<double>& s_grid, std::size_t reps,
                               std::uint64_t seed, unsigned workers = 0);

}  // namespace tailcp
