#pragma once

#include <string>
#include <vector>

#include "kspg/image.hpp"

namespace kspg::metrics {

enum class SsimWindow { gaussian_11_sigma_1_5, uniform_7 };

std::string to_string(SsimWindow w);
SsimWindow parse_ssim_window(const std::string& name);

struct SsimConfig {
  double k1 = 0.01;
  double k2 = 0.03;
  SsimWindow window = SsimWindow::gaussian_11_sigma_1_5;
  double dynamic_range = 1.0;

  void validate() const;
  int window_size() const { return window == SsimWindow::uniform_7 ? 7 : 11; }
};

/// Normalized 1-D window; the 2-D window is its outer product.
std::vector<double> window_weights_1d(SsimWindow w);

/// Mean local SSIM over every valid (unpadded) window position.
double ssim(const Image& reference, const Image& test, const SsimConfig& cfg);

/// 10 log10(d^2 / MSE); +infinity when the images are identical.
double psnr(const Image& reference, const Image& test, double dynamic_range);

/// Improvement in quality from one acquisition step.
inline double reward(double prev_score, double new_score) { return new_score - prev_score; }

}  // namespace kspg::metrics
