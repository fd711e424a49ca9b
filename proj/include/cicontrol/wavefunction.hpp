#pragma once

#include <complex>
#include <cstddef>
#include <new>
#include <span>
#include <vector>

#include "cicontrol/grid.hpp"

namespace cic {

using complex = std::complex<double>;

/// Allocator returning SIMD-aligned storage so FFTW plans made on one buffer
/// can be executed on any other.
template <class T>
struct FftwAllocator {
  using value_type = T;
  FftwAllocator() = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U>&) noexcept {}
  T* allocate(std::size_t n);
  void deallocate(T* p, std::size_t) noexcept;
  template <class U>
  bool operator==(const FftwAllocator<U>&) const noexcept { return true; }
};

void* fftw_aligned_alloc(std::size_t bytes);
void fftw_aligned_free(void* p) noexcept;

template <class T>
T* FftwAllocator<T>::allocate(std::size_t n) {
  if (n == 0) return nullptr;
  void* p = fftw_aligned_alloc(n * sizeof(T));
  if (!p) throw std::bad_alloc();
  return static_cast<T*>(p);
}

template <class T>
void FftwAllocator<T>::deallocate(T* p, std::size_t) noexcept {
  fftw_aligned_free(p);
}

using ComplexBuffer = std::vector<complex, FftwAllocator<complex>>;

/// Wavefunction over a Grid2D with one (Born-Oppenheimer) or two (spinor,
/// components on |pi1>, |pi2>) components, stored contiguously component
/// by component.
class WaveFunction {
 public:
  WaveFunction() = default;
  WaveFunction(int components, int nx, int nz)
      : components_(components), nx_(nx), nz_(nz),
        data_(static_cast<std::size_t>(components) * nx * nz) {}

  static WaveFunction spinor(const Grid2D& g) { return {2, g.nx, g.nz}; }
  static WaveFunction scalar(const Grid2D& g) { return {1, g.nx, g.nz}; }

  int components() const { return components_; }
  int nx() const { return nx_; }
  int nz() const { return nz_; }
  std::size_t points() const { return static_cast<std::size_t>(nx_) * nz_; }

  std::span<complex> component(int c) { return {data_.data() + c * points(), points()}; }
  std::span<const complex> component(int c) const {
    return {data_.data() + c * points(), points()};
  }
  std::span<complex> data() { return data_; }
  std::span<const complex> data() const { return data_; }

  bool same_shape(const WaveFunction& o) const {
    return components_ == o.components_ && nx_ == o.nx_ && nz_ == o.nz_;
  }

 private:
  int components_ = 0;
  int nx_ = 0;
  int nz_ = 0;
  ComplexBuffer data_;
};

/// sum |psi|^2 dx dz over all components.
double norm_squared(const WaveFunction& psi, const Grid2D& g);

/// <a|b> = sum conj(a) b dx dz over all components.
complex inner_product(const WaveFunction& a, const WaveFunction& b, const Grid2D& g);

/// Scales psi to unit norm; returns the norm before scaling.
double normalize(WaveFunction& psi, const Grid2D& g);

}  // namespace cic
