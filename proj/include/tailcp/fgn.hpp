#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tailcp/series.hpp"

namespace tailcp {

struct FgnSpec {
  std::size_t n = 1;
  double hurst = 0.5;
  std::uint64_t seed = 0;
};

/// Autocovariance of unit-variance fractional Gaussian noise at lag k.
double fgn_autocov(std::size_t k, double hurst);

/// Eigenvalues below this are treated as failures of the embedding; values in
/// [-kEigenTolerance, 0) are clipped to zero.
inline constexpr double kEigenTolerance = 1e-10;

/// Smallest m >= target whose only prime factors are 2, 3 and 5.
std::size_t composite_friendly_length(std::size_t target);

/// Eigenvalues of the circulant embedding of the fGn autocovariance with
/// half-length m (embedding size 2m).
std::vector<double> circulant_eigenvalues(std::size_t m, double hurst);

/// Exact-covariance fGn path by circulant embedding (Davies-Harte).
/// Deterministic in (seed, n, hurst).
std::vector<double> generate_fgn_values(const FgnSpec& spec);

TimeSeries generate_fgn(const FgnSpec& spec);

}  // namespace tailcp
