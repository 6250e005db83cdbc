#include "tailcp/tep.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tailcp/error.hpp"
#include "tailcp/estimators.hpp"
#include "tailcp/parallel.hpp"
#include "tailcp/random.hpp"

namespace tailcp {

namespace {

void check_increasing(const std::vector<double>& grid, const char* name) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i - 1] < grid[i]))
      fail(ErrorCode::InvalidArgument, std::string(name) + " must be strictly increasing");
}

}  // namespace

TepSurface tail_surface(const TimeSeries& x, double u_n, std::vector<double> s_grid,
                        std::vector<double> t_grid, double normalizer, NormalizerSource source) {
  if (s_grid.empty() || t_grid.empty()) fail(ErrorCode::EmptyGrid, "s and t grids must be non-empty");
  if (!(u_n > 0.0)) fail(ErrorCode::InvalidArgument, "threshold u_n must be positive");
  if (!(normalizer > 0.0)) fail(ErrorCode::InvalidArgument, "normalizer must be positive");
  check_increasing(s_grid, "s grid");
  check_increasing(t_grid, "t grid");
  if (s_grid.front() < 1.0) fail(ErrorCode::InvalidArgument, "s grid must lie in [1, inf)");
  if (t_grid.front() < 0.0 || t_grid.back() > 1.0)
    fail(ErrorCode::InvalidArgument, "t grid must lie in [0, 1]");

  const auto v = x.values();
  const std::size_t n = v.size();
  std::vector<std::size_t> cut(t_grid.size());
  for (std::size_t j = 0; j < t_grid.size(); ++j) cut[j] = floor_fraction(n, t_grid[j]);

  TepSurface out;
  out.values = Grid2D(s_grid.size(), t_grid.size());
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    const double level = u_n * s_grid[i];
    std::size_t count = 0;
    std::size_t l = 0;
    for (std::size_t j = 0; j < cut.size(); ++j) {
      for (; l < cut[j]; ++l)
        if (v[l] > level) ++count;
      out.values(i, j) = static_cast<double>(count) / normalizer;
    }
  }
  out.s_grid = std::move(s_grid);
  out.t_grid = std::move(t_grid);
  out.normalizer = normalizer;
  out.threshold = u_n;
  out.normalizer_source = source;
  return out;
}

TepSurface data_tail_surface(const TimeSeries& x, std::size_t k_n, std::vector<double> s_grid,
                             std::vector<double> t_grid) {
  const std::size_t n = x.size();
  if (k_n < 1 || k_n + 1 > n) fail(ErrorCode::InvalidArgument, "k_n must satisfy 1 <= k_n <= n-1");
  const double u = order_statistic(x, n - k_n);
  if (!(u > 0.0)) fail(ErrorCode::NonPositiveReference, "threshold X_{n:n-k_n} is not positive");
  return tail_surface(x, u, std::move(s_grid), std::move(t_grid), static_cast<double>(k_n),
                      NormalizerSource::ExceedanceCount);
}

Grid2D centered_surface(const TepSurface& surface, double alpha) {
  if (!(alpha > 0.0)) fail(ErrorCode::InvalidArgument, "alpha must be positive");
  Grid2D out(surface.values.rows(), surface.values.cols());
  for (std::size_t i = 0; i < out.rows(); ++i) {
    const double tail = std::pow(surface.s_grid[i], -alpha);
    for (std::size_t j = 0; j < out.cols(); ++j)
      out(i, j) = surface.values(i, j) - surface.t_grid[j] * tail;
  }
  return out;
}

double SecondOrderFamily::survival(double x) const {
  return std::pow(x, -alpha) * (1.0 + c * std::pow(x, -alpha * beta)) / (1.0 + c);
}

SecondOrderCheck second_order_bound_check(const SecondOrderFamily& family,
                                          const std::vector<double>& z_grid,
                                          const std::vector<double>& t_grid, double epsilon) {
  if (z_grid.empty() || t_grid.empty()) fail(ErrorCode::EmptyGrid, "z and t grids must be non-empty");
  if (!(family.alpha > 0.0 && family.beta > 0.0))
    fail(ErrorCode::InvalidArgument, "second-order family needs alpha > 0 and beta > 0");
  if (!(family.c > -1.0)) fail(ErrorCode::InvalidArgument, "second-order family needs c > -1");
  if (!(epsilon > 0.0)) fail(ErrorCode::InvalidArgument, "epsilon must be positive");
  for (double z : z_grid)
    if (!(z > 0.0)) fail(ErrorCode::InvalidArgument, "z grid must lie in (0, inf)");
  for (double t : t_grid)
    if (!(t >= 1.0)) fail(ErrorCode::InvalidArgument, "threshold grid must lie in [1, inf)");

  SecondOrderCheck out;
  out.epsilon = epsilon;
  out.rho = family.alpha * family.beta;
  out.max_ratio_per_t.assign(t_grid.size(), 0.0);
  bool first = true;
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    const double t = t_grid[j];
    const double eta = std::pow(t, -out.rho);
    const double damp = 1.0 + family.c * eta;
    for (double z : z_grid) {
      // Fbar(zt)/Fbar(t) - z^-a = z^-a c eta (z^-rho - 1) / (1 + c eta); the
      // factored form keeps the exact power law at exactly zero.
      const double numerator = std::pow(z, -family.alpha) *
                               std::fabs(family.c * eta * std::expm1(-out.rho * std::log(z))) / damp;
      const double envelope =
          eta * std::pow(z, -family.alpha - out.rho) * std::pow(std::max(z, 1.0 / z), epsilon);
      const double ratio = numerator / envelope;
      out.max_ratio_per_t[j] = std::max(out.max_ratio_per_t[j], ratio);
      if (first || ratio > out.max_ratio) {
        out.max_ratio = ratio;
        out.argmax_z = z;
        out.argmax_t = t;
        first = false;
      }
    }
  }
  return out;
}

RegimeProbeResult regime_probe(const LmsvSpec& spec, double k_n, const std::vector<double>& s_grid,
                               std::size_t reps, std::uint64_t seed, unsigned workers) {
  spec.validate();
  if (spec.has_break()) fail(ErrorCode::InvalidSpec, "the regime probe runs under the stationary null (h = 0)");
  if (spec.center_innovations) fail(ErrorCode::InvalidSpec, "the regime probe needs uncentred innovations");
  if (reps < 100) fail(ErrorCode::InvalidArgument, "the regime probe needs at least 100 replications");
  if (s_grid.empty()) fail(ErrorCode::EmptyGrid, "s grid must be non-empty");
  if (!(k_n >= 1.0 && k_n < static_cast<double>(spec.n)))
    fail(ErrorCode::InvalidArgument, "k_n must lie in [1, n)");

  RegimeProbeResult out;
  out.regime = classify_regime(spec.n, spec.hurst, k_n);
  out.scale = out.regime.clt_rate < out.regime.lrd_rate ? out.regime.clt_rate : out.regime.lrd_rate;
  out.threshold = lmsv_threshold_for_exceedances(spec.n, k_n, spec.alpha, spec.family);
  out.k_n = k_n;
  out.s_grid = s_grid;
  out.reps = reps;

  // Column 0 is the reference s = 1; the rest follow the caller's grid.
  std::vector<double> levels{1.0};
  levels.insert(levels.end(), s_grid.begin(), s_grid.end());
  for (double s : levels)
    if (!(s >= 1.0)) fail(ErrorCode::InvalidArgument, "s grid must lie in [1, inf)");
  const std::size_t cols = levels.size();

  std::vector<double> draws(reps * cols);
  parallel_for(reps, workers, [&](std::size_t r) {
    LmsvSpec rep = spec;
    rep.seed = mix64(seed, r);
    const TimeSeries x = simulate_lmsv(rep);
    for (std::size_t c = 0; c < cols; ++c) {
      const TepSurface surface =
          tail_surface(x, out.threshold, {levels[c]}, {1.0}, k_n, NormalizerSource::Exact);
      const Grid2D e = centered_surface(surface, spec.alpha);
      draws[r * cols + c] = out.scale * e(0, 0);
    }
  });

  std::vector<double> mean(cols, 0.0);
  for (std::size_t r = 0; r < reps; ++r)
    for (std::size_t c = 0; c < cols; ++c) mean[c] += draws[r * cols + c];
  for (double& m : mean) m /= static_cast<double>(reps);
  std::vector<double> var(cols, 0.0);
  std::vector<double> cov(cols, 0.0);
  for (std::size_t r = 0; r < reps; ++r) {
    const double d0 = draws[r * cols] - mean[0];
    for (std::size_t c = 0; c < cols; ++c) {
      const double d = draws[r * cols + c] - mean[c];
      var[c] += d * d;
      cov[c] += d * d0;
    }
  }
  const double denom = static_cast<double>(reps - 1);
  for (std::size_t c = 1; c < cols; ++c) {
    out.mean.push_back(mean[c]);
    out.variance.push_back(var[c] / denom);
    const double scale = std::sqrt(var[c] * var[0]);
    out.correlation_with_s1.push_back(scale > 0.0 ? cov[c] / scale : 0.0);
  }
  return out;
}

}  // namespace tailcp
