#include "cicontrol/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace cic {

namespace {

// The FFTW planner is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(complex* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

void* fftw_aligned_alloc(std::size_t bytes) { return fftw_malloc(bytes); }
void fftw_aligned_free(void* p) noexcept { fftw_free(p); }

FftPlan2D::FftPlan2D(int nx, int nz, int howmany) : nx_(nx), nz_(nz), howmany_(howmany) {
  const int dims[2] = {nx, nz};
  const int dist = nx * nz;
  ComplexBuffer scratch(static_cast<std::size_t>(dist) * howmany);
  std::lock_guard lock(planner_mutex());
  forward_ = fftw_plan_many_dft(2, dims, howmany, as_fftw(scratch.data()), nullptr, 1, dist,
                                as_fftw(scratch.data()), nullptr, 1, dist, FFTW_FORWARD,
                                FFTW_ESTIMATE);
  backward_ = fftw_plan_many_dft(2, dims, howmany, as_fftw(scratch.data()), nullptr, 1, dist,
                                 as_fftw(scratch.data()), nullptr, 1, dist, FFTW_BACKWARD,
                                 FFTW_ESTIMATE);
  if (!forward_ || !backward_) {
    release();
    throw std::runtime_error("FFTW planning failed");
  }
}

FftPlan2D::~FftPlan2D() { release(); }

FftPlan2D::FftPlan2D(FftPlan2D&& o) noexcept
    : nx_(o.nx_), nz_(o.nz_), howmany_(o.howmany_),
      forward_(std::exchange(o.forward_, nullptr)),
      backward_(std::exchange(o.backward_, nullptr)) {}

FftPlan2D& FftPlan2D::operator=(FftPlan2D&& o) noexcept {
  if (this != &o) {
    release();
    nx_ = o.nx_;
    nz_ = o.nz_;
    howmany_ = o.howmany_;
    forward_ = std::exchange(o.forward_, nullptr);
    backward_ = std::exchange(o.backward_, nullptr);
  }
  return *this;
}

void FftPlan2D::release() noexcept {
  std::lock_guard lock(planner_mutex());
  if (forward_) fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  if (backward_) fftw_destroy_plan(static_cast<fftw_plan>(backward_));
  forward_ = backward_ = nullptr;
}

void FftPlan2D::forward(std::span<complex> data) const {
  if (data.size() != static_cast<std::size_t>(nx_) * nz_ * howmany_)
    throw std::invalid_argument("FFT buffer size mismatch");
  fftw_execute_dft(static_cast<fftw_plan>(forward_), as_fftw(data.data()), as_fftw(data.data()));
}

void FftPlan2D::backward(std::span<complex> data) const {
  if (data.size() != static_cast<std::size_t>(nx_) * nz_ * howmany_)
    throw std::invalid_argument("FFT buffer size mismatch");
  fftw_execute_dft(static_cast<fftw_plan>(backward_), as_fftw(data.data()),
                   as_fftw(data.data()));
}

}  // namespace cic
