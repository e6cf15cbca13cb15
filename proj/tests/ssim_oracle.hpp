#pragma once

#include <cmath>
#include <vector>

#include "kspg/image.hpp"

namespace kspg::testing {

// Local SSIM formula evaluated once over a k x k image with 2-D weights built
// directly (no separable pass).
inline double direct_ssim(const Image& x, const Image& y, bool gaussian, double k1, double k2, double d) {
  const int k = x.height();
  std::vector<double> w(static_cast<std::size_t>(k) * k);
  double total = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const double di = i - (k - 1) / 2.0, dj = j - (k - 1) / 2.0;
      const double v = gaussian ? std::exp(-(di * di + dj * dj) / (2 * 1.5 * 1.5)) : 1.0;
      w[i * k + j] = v;
      total += v;
    }
  double mx = 0, my = 0;
  for (int i = 0; i < k * k; ++i) {
    w[i] /= total;
    mx += w[i] * x.pixels()[i];
    my += w[i] * y.pixels()[i];
  }
  double vx = 0, vy = 0, cxy = 0;
  for (int i = 0; i < k * k; ++i) {
    const double a = x.pixels()[i] - mx, b = y.pixels()[i] - my;
    vx += w[i] * a * a;
    vy += w[i] * b * b;
    cxy += w[i] * a * b;
  }
  const double c1 = (k1 * d) * (k1 * d), c2 = (k2 * d) * (k2 * d);
  return (2 * mx * my + c1) * (2 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
}

}  // namespace kspg::testing
