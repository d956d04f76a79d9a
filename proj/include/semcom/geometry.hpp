#pragma once

#include <cmath>
#include <stdexcept>

namespace semcom {

struct Position {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Uniform planar array with half-wavelength element spacing.
struct UpaGeometry {
  int n_h = 1;
  int n_v = 1;
  double wavelength = 0.1;  // meters

  int elements() const { return n_h * n_v; }
  double wavenumber() const { return 2.0 * M_PI / wavelength; }

  void validate() const {
    if (n_h < 1 || n_v < 1) throw std::invalid_argument("upa: element counts must be >= 1");
    if (!(wavelength > 0.0)) throw std::invalid_argument("upa: wavelength must be positive");
  }
};

}  // namespace semcom
