#include "tailcp/fgn.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <sstream>

#include "tailcp/error.hpp"
#include "tailcp/random.hpp"

namespace tailcp {

namespace {

// FFTW planning and plan destruction are not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

ComplexBuffer allocate(std::size_t size) {
  auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * size));
  if (p == nullptr) throw std::bad_alloc();
  return ComplexBuffer(p);
}

// In-place forward DFT (unnormalised, exp(-2 pi i jk/N) kernel).
void forward_dft(fftw_complex* data, std::size_t size) {
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(size), data, data, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan);
}

void check_hurst(double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0)) {
    std::ostringstream os;
    os << "Hurst parameter must lie in (0, 1), got " << hurst;
    fail(ErrorCode::InvalidSpec, os.str());
  }
}

}  // namespace

double fgn_autocov(std::size_t k, double hurst) {
  if (k == 0) return 1.0;
  const double two_h = 2.0 * hurst;
  const double kd = static_cast<double>(k);
  return 0.5 * (std::pow(kd + 1.0, two_h) - 2.0 * std::pow(kd, two_h) + std::pow(kd - 1.0, two_h));
}

std::size_t composite_friendly_length(std::size_t target) {
  if (target <= 1) return 1;
  for (std::size_t m = target;; ++m) {
    std::size_t r = m;
    for (std::size_t f : {2u, 3u, 5u})
      while (r % f == 0) r /= f;
    if (r == 1) return m;
  }
}

std::vector<double> circulant_eigenvalues(std::size_t m, double hurst) {
  check_hurst(hurst);
  if (m == 0) fail(ErrorCode::InvalidArgument, "embedding half-length must be positive");
  const std::size_t size = 2 * m;
  auto buf = allocate(size);
  for (std::size_t k = 0; k <= m; ++k) {
    buf[k][0] = fgn_autocov(k, hurst);
    buf[k][1] = 0.0;
  }
  for (std::size_t k = m + 1; k < size; ++k) {
    buf[k][0] = buf[size - k][0];
    buf[k][1] = 0.0;
  }
  forward_dft(buf.get(), size);
  std::vector<double> eig(size);
  for (std::size_t k = 0; k < size; ++k) eig[k] = buf[k][0];
  return eig;
}

std::vector<double> generate_fgn_values(const FgnSpec& spec) {
  check_hurst(spec.hurst);
  if (spec.n == 0) fail(ErrorCode::InvalidSpec, "fGn length must be at least 1");

  const std::size_t m = composite_friendly_length(spec.n > 1 ? spec.n - 1 : 1);
  const std::size_t size = 2 * m;
  std::vector<double> eig = circulant_eigenvalues(m, spec.hurst);
  for (std::size_t k = 0; k < size; ++k) {
    if (eig[k] < -kEigenTolerance) {
      std::ostringstream os;
      os << "circulant embedding eigenvalue " << eig[k] << " at frequency " << k
         << " (H=" << spec.hurst << ", m=" << m << ")";
      fail(ErrorCode::EmbeddingNotPSD, os.str());
    }
    if (eig[k] < 0.0) eig[k] = 0.0;
  }

  // Z_k = sqrt(lambda_k / 2m) (A_k + i B_k); the real part of DFT(Z) has
  // covariance exactly fgn_autocov.
  UniformStream stream(spec.seed);
  auto buf = allocate(size);
  const double inv_size = 1.0 / static_cast<double>(size);
  for (std::size_t k = 0; k < size; ++k) {
    const double scale = std::sqrt(eig[k] * inv_size);
    buf[k][0] = scale * stream.next_normal();
    buf[k][1] = scale * stream.next_normal();
  }
  forward_dft(buf.get(), size);
  std::vector<double> out(spec.n);
  for (std::size_t j = 0; j < spec.n; ++j) out[j] = buf[j][0];
  return out;
}

TimeSeries generate_fgn(const FgnSpec& spec) { return TimeSeries(generate_fgn_values(spec)); }

}  // namespace tailcp
