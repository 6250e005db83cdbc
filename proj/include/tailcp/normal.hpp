#pragma once

namespace tailcp {

/// Standard normal CDF.
double normal_cdf(double x) noexcept;

/// Standard normal density.
double normal_pdf(double x) noexcept;

/// Inverse standard normal CDF (Wichura's AS 241, PPND16). Relative error
/// is below 1e-15 over (0, 1); returns -inf/+inf at 0/1 and NaN outside.
double normal_quantile(double p) noexcept;

}  // namespace tailcp
