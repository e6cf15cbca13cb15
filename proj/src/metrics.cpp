#include "kspg/metrics.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "kspg/errors.hpp"

namespace kspg::metrics {

namespace {

// Valid-mode separable correlation: rows first, then columns.
std::vector<double> filter_valid(std::span<const double> src, int height, int width,
                                 const std::vector<double>& w) {
  const int k = static_cast<int>(w.size());
  const int ow = width - k + 1;
  const int oh = height - k + 1;
  std::vector<double> tmp(static_cast<std::size_t>(height) * ow);
  for (int r = 0; r < height; ++r) {
    const double* row = src.data() + static_cast<std::size_t>(r) * width;
    for (int c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int j = 0; j < k; ++j) acc += w[j] * row[c + j];
      tmp[static_cast<std::size_t>(r) * ow + c] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int j = 0; j < k; ++j) acc += w[j] * tmp[static_cast<std::size_t>(r + j) * ow + c];
      out[static_cast<std::size_t>(r) * ow + c] = acc;
    }
  }
  return out;
}

void check_same_dims(const Image& a, const Image& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw InvalidArgument("image dimensions differ: " + std::to_string(a.height()) + "x" +
                          std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                          std::to_string(b.width()));
  }
}

}  // namespace

std::string to_string(SsimWindow w) {
  return w == SsimWindow::uniform_7 ? "uniform_7" : "gaussian_11_sigma_1_5";
}

SsimWindow parse_ssim_window(const std::string& name) {
  if (name == "gaussian_11_sigma_1_5" || name == "gaussian") return SsimWindow::gaussian_11_sigma_1_5;
  if (name == "uniform_7" || name == "uniform") return SsimWindow::uniform_7;
  throw InvalidArgument("unknown SSIM window '" + name + "'");
}

void SsimConfig::validate() const {
  if (!(k1 > 0) || !(k2 > 0)) throw InvalidArgument("SSIM k1 and k2 must be positive");
  if (!(dynamic_range > 0) || !std::isfinite(dynamic_range)) {
    throw InvalidArgument("SSIM dynamic range must be positive and finite");
  }
}

std::vector<double> window_weights_1d(SsimWindow w) {
  if (w == SsimWindow::uniform_7) return std::vector<double>(7, 1.0 / 7.0);
  constexpr int k = 11;
  constexpr double sigma = 1.5;
  std::vector<double> g(k);
  double sum = 0.0;
  for (int i = 0; i < k; ++i) {
    const double d = i - (k - 1) / 2;
    g[i] = std::exp(-(d * d) / (2 * sigma * sigma));
    sum += g[i];
  }
  for (double& v : g) v /= sum;
  return g;
}

double ssim(const Image& reference, const Image& test, const SsimConfig& cfg) {
  cfg.validate();
  check_same_dims(reference, test);
  const int k = cfg.window_size();
  if (reference.height() < k || reference.width() < k) {
    throw InvalidArgument("image smaller than the " + std::to_string(k) + "x" + std::to_string(k) +
                          " SSIM window");
  }
  const int h = reference.height();
  const int w = reference.width();
  const auto x = reference.pixels();
  const auto y = test.pixels();
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto win = window_weights_1d(cfg.window);
  const auto mx = filter_valid(x, h, w, win);
  const auto my = filter_valid(y, h, w, win);
  const auto exx = filter_valid(xx, h, w, win);
  const auto eyy = filter_valid(yy, h, w, win);
  const auto exy = filter_valid(xy, h, w, win);

  const double c1 = (cfg.k1 * cfg.dynamic_range) * (cfg.k1 * cfg.dynamic_range);
  const double c2 = (cfg.k2 * cfg.dynamic_range) * (cfg.k2 * cfg.dynamic_range);
  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = exx[i] - mx[i] * mx[i];
    const double vy = eyy[i] - my[i] * my[i];
    const double cxy = exy[i] - mx[i] * my[i];
    const double num = (2 * mx[i] * my[i] + c1) * (2 * cxy + c2);
    const double den = (mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2);
    total += num / den;
  }
  return total / static_cast<double>(mx.size());
}

double psnr(const Image& reference, const Image& test, double dynamic_range) {
  check_same_dims(reference, test);
  if (!(dynamic_range > 0)) throw InvalidArgument("dynamic range must be positive");
  double mse = 0.0;
  const auto x = reference.pixels();
  const auto y = test.pixels();
  for (std::size_t i = 0; i < x.size(); ++i) mse += (x[i] - y[i]) * (x[i] - y[i]);
  mse /= static_cast<double>(x.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(dynamic_range * dynamic_range / mse);
}

}  // namespace kspg::metrics
