#include "spde/rng.hpp"

#include <cmath>
#include <stdexcept>

#include "spde/stats.hpp"

namespace spde {

double StreamHandle::next_gaussian() { return normal_quantile(next_uniform()); }

void fill_slice(StreamHandle& stream, double dt, double dx,
                std::span<double> out) {
  if (!(dt > 0.0)) {
    throw std::domain_error("noise slice requires dt > 0");
  }
  if (!(dx > 0.0)) {
    throw std::domain_error("noise slice requires dx > 0");
  }
  const double scale = std::sqrt(dt * dx);
  for (double& v : out) {
    v = scale * stream.next_gaussian();
  }
}

NoiseSlice sample_slice(StreamHandle& stream, std::size_t count, double dt,
                        double dx) {
  NoiseSlice slice;
  slice.dt = dt;
  slice.dx = dx;
  slice.values.resize(count);
  fill_slice(stream, dt, dx, slice.values);
  return slice;
}

}  // namespace spde
