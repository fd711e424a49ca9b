#pragma once

#include <span>

#include "cicontrol/wavefunction.hpp"

namespace cic {

/// In-place 2D complex DFT over `howmany` contiguous nx-by-nz blocks.
/// Plans use FFTW_ESTIMATE so the algorithm choice (and hence round-off) is
/// identical across runs. Transforms are unnormalized.
class FftPlan2D {
 public:
  FftPlan2D(int nx, int nz, int howmany);
  ~FftPlan2D();
  FftPlan2D(const FftPlan2D&) = delete;
  FftPlan2D& operator=(const FftPlan2D&) = delete;
  FftPlan2D(FftPlan2D&& other) noexcept;
  FftPlan2D& operator=(FftPlan2D&& other) noexcept;

  void forward(std::span<complex> data) const;
  void backward(std::span<complex> data) const;

  int howmany() const { return howmany_; }

 private:
  void release() noexcept;

  int nx_ = 0, nz_ = 0, howmany_ = 0;
  void* forward_ = nullptr;
  void* backward_ = nullptr;
};

}  // namespace cic
