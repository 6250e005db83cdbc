#include "tailcp/lmsv.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "tailcp/error.hpp"
#include "tailcp/fgn.hpp"
#include "tailcp/normal.hpp"
#include "tailcp/random.hpp"

namespace tailcp {

namespace {

std::string describe(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

double innovation_mean(double alpha) { return alpha / (alpha - 1.0); }

}  // namespace

std::string_view to_string(InnovationFamily family) noexcept {
  return family == InnovationFamily::StandardPareto ? "standard-pareto" : "generalized-pareto";
}

InnovationFamily parse_innovation_family(std::string_view text) {
  if (text == "standard-pareto" || text == "pareto" || text == "sp") return InnovationFamily::StandardPareto;
  if (text == "generalized-pareto" || text == "gpd" || text == "gp") return InnovationFamily::GeneralizedPareto;
  fail(ErrorCode::InvalidArgument, "unknown innovation family '" + std::string(text) + "'");
}

std::size_t LmsvSpec::break_index() const noexcept {
  if (!has_break()) return n;
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * change_fraction));
}

void LmsvSpec::validate() const {
  if (n < 1) fail(ErrorCode::InvalidSpec, "n must be at least 1");
  if (!(hurst > 0.5 && hurst < 1.0))
    fail(ErrorCode::InvalidSpec, "hurst must lie in (0.5, 1) for a long-range dependent driver, got " +
                                     describe(hurst));
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    fail(ErrorCode::InvalidSpec, "alpha must be positive, got " + describe(alpha));
  if (!std::isfinite(change_height))
    fail(ErrorCode::InvalidSpec, "change height must be finite");
  if (!(change_fraction > 0.0 && change_fraction <= 1.0))
    fail(ErrorCode::InvalidSpec, "change fraction must lie in (0, 1], got " + describe(change_fraction));
  if (has_break() && !(alpha + change_height > 0.0))
    fail(ErrorCode::InvalidSpec, "post-break tail index alpha + h = " + describe(alpha + change_height) +
                                     " must be positive");
  if (center_innovations) {
    const double post = has_break() ? alpha + change_height : alpha;
    if (!(alpha > 1.0 && post > 1.0))
      fail(ErrorCode::InvalidSpec, "centred innovations need a finite mean (tail index > 1)");
  }
}

double pareto_quantile(double u, double alpha, InnovationFamily family) {
  if (!(u > 0.0 && u < 1.0)) fail(ErrorCode::InvalidArgument, "u must lie in (0, 1), got " + describe(u));
  if (!(alpha > 0.0)) fail(ErrorCode::InvalidArgument, "alpha must be positive, got " + describe(alpha));
  const double log_tail = std::log1p(-u);  // ln(1 - u)
  if (family == InnovationFamily::StandardPareto) return std::exp(-log_tail / alpha);
  const double xi = 1.0 / alpha;
  return std::expm1(-xi * log_tail) / xi;
}

double innovation_survival(double x, double alpha, InnovationFamily family) {
  if (family == InnovationFamily::StandardPareto) return x <= 1.0 ? 1.0 : std::pow(x, -alpha);
  return x <= 0.0 ? 1.0 : std::pow(1.0 + x / alpha, -alpha);
}

std::uint64_t volatility_stream_seed(std::uint64_t master) noexcept { return mix64(master, 1); }
std::uint64_t innovation_stream_seed(std::uint64_t master) noexcept { return mix64(master, 2); }

LmsvPath simulate_lmsv_path(const LmsvSpec& spec) {
  spec.validate();
  LmsvPath path;
  path.volatility_driver =
      generate_fgn_values(FgnSpec{spec.n, spec.hurst, volatility_stream_seed(spec.seed)});
  path.innovations.resize(spec.n);
  path.x.resize(spec.n);

  const std::size_t k = spec.break_index();
  const double post_alpha = spec.alpha + spec.change_height;
  UniformStream stream(innovation_stream_seed(spec.seed));
  for (std::size_t j = 0; j < spec.n; ++j) {
    const double a = j < k ? spec.alpha : post_alpha;
    double e = pareto_quantile(stream.next_uniform(), a, spec.family);
    if (spec.center_innovations) e -= innovation_mean(a);
    path.innovations[j] = e;
    path.x[j] = std::exp(path.volatility_driver[j]) * e;
  }
  return path;
}

TimeSeries simulate_lmsv(const LmsvSpec& spec) { return TimeSeries(simulate_lmsv_path(spec).x); }

double lmsv_marginal_survival(double x, double alpha, InnovationFamily family) {
  if (!(alpha > 0.0)) fail(ErrorCode::InvalidArgument, "alpha must be positive");
  if (x <= 0.0) return 1.0;
  const double y = std::log(x);
  if (family == InnovationFamily::StandardPareto) {
    // P(Y > ln x) + x^-alpha E[e^{alpha Y}; Y <= ln x]
    return 0.5 * std::erfc(y / std::numbers::sqrt2) +
           std::exp(-alpha * y + 0.5 * alpha * alpha) * normal_cdf(y - alpha);
  }
  // E[(1 + x e^{-Y} / alpha)^-alpha] by composite Simpson on [-12, 12].
  constexpr int kIntervals = 4800;
  constexpr double kLo = -12.0;
  constexpr double kHi = 12.0;
  const double h = (kHi - kLo) / kIntervals;
  double sum = 0.0;
  for (int i = 0; i <= kIntervals; ++i) {
    const double v = kLo + h * i;
    const double w = (i == 0 || i == kIntervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    sum += w * normal_pdf(v) * std::pow(1.0 + x * std::exp(-v) / alpha, -alpha);
  }
  return sum * h / 3.0;
}

double lmsv_threshold_for_exceedances(std::size_t n, double expected_exceedances, double alpha,
                                      InnovationFamily family) {
  const double target = expected_exceedances / static_cast<double>(n);
  if (!(target > 0.0 && target < 1.0))
    fail(ErrorCode::InvalidArgument, "expected exceedances must lie in (0, n)");
  double lo = -30.0;  // log-threshold
  double hi = 1.0;
  while (lmsv_marginal_survival(std::exp(hi), alpha, family) > target) {
    hi *= 2.0;
    if (hi > 700.0) fail(ErrorCode::InvalidArgument, "threshold search diverged");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (lmsv_marginal_survival(std::exp(mid), alpha, family) > target)
      lo = mid;
    else
      hi = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

double d_n_r(double n, double lrd_d, unsigned hermite_rank) {
  const double dr = lrd_d * hermite_rank;
  if (hermite_rank < 1 || !(lrd_d > 0.0) || !(dr < 1.0))
    fail(ErrorCode::InvalidHermiteRegime,
         "d_{n,r} needs 0 < D r < 1, got D r = " + describe(dr));
  const double c_r = 2.0 * std::tgamma(hermite_rank + 1.0) / ((1.0 - dr) * (2.0 - dr));
  return std::sqrt(c_r) * std::pow(n, 1.0 - dr / 2.0);
}

std::string_view to_string(Regime regime) noexcept {
  switch (regime) {
    case Regime::LrdDominant: return "lrd-dominant";
    case Regime::MartingaleDominant: return "martingale-dominant";
    case Regime::Boundary: return "boundary";
  }
  return "unknown";
}

RegimeReport classify_regime(std::size_t n, double hurst, double k_n, double boundary_band) {
  if (!(k_n >= 1.0)) fail(ErrorCode::InvalidArgument, "k_n must be at least 1");
  if (!(hurst > 0.5 && hurst < 1.0)) fail(ErrorCode::InvalidArgument, "hurst must lie in (0.5, 1)");
  if (!(boundary_band >= 1.0)) fail(ErrorCode::InvalidArgument, "boundary band must be at least 1");
  RegimeReport r;
  r.hermite_rank = 1;
  r.lrd_d = 2.0 - 2.0 * hurst;
  r.lrd_rate = static_cast<double>(n) / d_n_r(static_cast<double>(n), r.lrd_d, 1);
  r.clt_rate = std::sqrt(k_n);
  const double ratio = r.rate_ratio();
  if (ratio < 1.0 / boundary_band)
    r.regime = Regime::MartingaleDominant;
  else if (ratio > boundary_band)
    r.regime = Regime::LrdDominant;
  else
    r.regime = Regime::Boundary;
  return r;
}

}  // namespace tailcp
