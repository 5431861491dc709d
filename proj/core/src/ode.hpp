#pragma once

// Internal fixed-step integration helpers on uniform sample grids. Not
// installed. Classical RK4 with midpoint coefficients reconstructed from the
// samples: linear interpolation keeps the step consistent with second-order
// sample resolution, cubic recovers genuine fourth order for smooth tracks.

#include <vector>

#include "cmps/types.hpp"

namespace cmps::detail {

enum class Midpoint { linear, cubic };

inline Matrix midpoint_value(const std::vector<Matrix>& f, int k, Midpoint rule) {
  const int n = static_cast<int>(f.size());
  if (rule == Midpoint::linear || n < 4) return 0.5 * (f[k] + f[k + 1]);
  if (k == 0) return 0.3125 * f[0] + 0.9375 * f[1] - 0.3125 * f[2] + 0.0625 * f[3];
  if (k == n - 2)
    return 0.0625 * f[n - 4] - 0.3125 * f[n - 3] + 0.9375 * f[n - 2] + 0.3125 * f[n - 1];
  return (-f[k - 1] + 9.0 * f[k] + 9.0 * f[k + 1] - f[k + 2]) / 16.0;
}

// Composite Simpson weights for n samples (n-1 intervals) with spacing h;
// falls back to a 3/8 block when the interval count is odd.
inline std::vector<double> simpson_weights(int n, double h) {
  std::vector<double> w(n, 0.0);
  if (n < 2) return w;
  if (n == 2) {
    w[0] = w[1] = h / 2.0;
    return w;
  }
  int even_end = n - 1;          // number of intervals covered by 1-4-2 blocks
  const bool odd = (n - 1) % 2;  // leftover handled by 3/8
  if (odd) even_end -= 3;
  for (int k = 0; k + 2 <= even_end; k += 2) {
    w[k] += h / 3.0;
    w[k + 1] += 4.0 * h / 3.0;
    w[k + 2] += h / 3.0;
  }
  if (odd) {
    const int s = even_end;
    if (s >= 0 && s + 3 < n + 1) {
      w[s] += 3.0 * h / 8.0;
      w[s + 1] += 9.0 * h / 8.0;
      w[s + 2] += 9.0 * h / 8.0;
      w[s + 3] += 3.0 * h / 8.0;
    }
  }
  return w;
}

inline std::vector<double> trapezoid_weights(int n, double h) {
  std::vector<double> w(n, h);
  if (n >= 1) w[0] = h / 2.0;
  if (n >= 2) w[n - 1] = h / 2.0;
  return w;
}

// Second-order first derivative of a sample track, one-sided at the ends.
inline std::vector<Matrix> central_derivative(const std::vector<Matrix>& f, double h) {
  const int n = static_cast<int>(f.size());
  std::vector<Matrix> d(n);
  if (n < 3) {
    for (int k = 0; k < n; ++k) d[k] = Matrix::Zero(f[0].rows(), f[0].cols());
    return d;
  }
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  for (int k = 1; k + 1 < n; ++k) d[k] = (f[k + 1] - f[k - 1]) / (2.0 * h);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  return d;
}

}  // namespace cmps::detail
