#include "cicontrol/wavefunction.hpp"

#include <cmath>
#include <stdexcept>

namespace cic {

double norm_squared(const WaveFunction& psi, const Grid2D& g) {
  double s = 0.0;
  for (const complex& v : psi.data()) s += std::norm(v);
  return s * g.cell_area();
}

complex inner_product(const WaveFunction& a, const WaveFunction& b, const Grid2D& g) {
  if (!a.same_shape(b)) throw std::invalid_argument("inner_product: shape mismatch");
  const auto da = a.data();
  const auto db = b.data();
  complex s = 0.0;
  for (std::size_t n = 0; n < da.size(); ++n) s += std::conj(da[n]) * db[n];
  return s * g.cell_area();
}

double normalize(WaveFunction& psi, const Grid2D& g) {
  const double norm = std::sqrt(norm_squared(psi, g));
  if (norm > 0.0)
    for (complex& v : psi.data()) v /= norm;
  return norm;
}

}  // namespace cic
