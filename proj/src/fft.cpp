#include "tonelab/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace tonelab {
namespace {

// The FFTW planner is not thread-safe; plan creation is serialized globally.
// Plans and their buffers are cached per thread so execution needs no locks.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanBuffers {
  fftw_plan plan = nullptr;
  double* real = nullptr;
  fftw_complex* cplx = nullptr;
  std::size_t n = 0;

  ~PlanBuffers() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (plan) fftw_destroy_plan(plan);
    if (real) fftw_free(real);
    if (cplx) fftw_free(cplx);
  }
};

PlanBuffers& forward_plan(std::size_t n) {
  thread_local std::map<std::size_t, PlanBuffers> cache;
  auto [it, inserted] = cache.try_emplace(n);
  PlanBuffers& pb = it->second;
  if (inserted) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    pb.n = n;
    pb.real = fftw_alloc_real(n);
    pb.cplx = fftw_alloc_complex(n / 2 + 1);
    pb.plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), pb.real, pb.cplx,
                                   FFTW_ESTIMATE);
    if (!pb.plan) throw std::runtime_error("fftw: r2c plan failed");
  }
  return pb;
}

PlanBuffers& inverse_plan(std::size_t n) {
  thread_local std::map<std::size_t, PlanBuffers> cache;
  auto [it, inserted] = cache.try_emplace(n);
  PlanBuffers& pb = it->second;
  if (inserted) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    pb.n = n;
    pb.real = fftw_alloc_real(n);
    pb.cplx = fftw_alloc_complex(n / 2 + 1);
    pb.plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), pb.cplx, pb.real,
                                   FFTW_ESTIMATE);
    if (!pb.plan) throw std::runtime_error("fftw: c2r plan failed");
  }
  return pb;
}

}  // namespace

std::vector<std::complex<double>> rfft(const std::vector<double>& x,
                                       std::size_t n) {
  if (n == 0) n = x.size();
  if (n == 0) throw std::invalid_argument("rfft: empty input");
  PlanBuffers& pb = forward_plan(n);
  const std::size_t copy = std::min(n, x.size());
  std::memcpy(pb.real, x.data(), copy * sizeof(double));
  if (copy < n) std::memset(pb.real + copy, 0, (n - copy) * sizeof(double));
  fftw_execute(pb.plan);
  std::vector<std::complex<double>> out(n / 2 + 1);
  std::memcpy(out.data(), pb.cplx, out.size() * sizeof(fftw_complex));
  return out;
}

std::vector<double> irfft(const std::vector<std::complex<double>>& spectrum,
                          std::size_t n) {
  if (n == 0) throw std::invalid_argument("irfft: zero length");
  if (spectrum.size() != n / 2 + 1)
    throw std::invalid_argument("irfft: spectrum size does not match length");
  PlanBuffers& pb = inverse_plan(n);
  std::memcpy(pb.cplx, spectrum.data(), spectrum.size() * sizeof(fftw_complex));
  fftw_execute(pb.plan);
  std::vector<double> out(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = pb.real[i] * scale;
  return out;
}

}  // namespace tonelab
