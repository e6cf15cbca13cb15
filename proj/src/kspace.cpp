#include "kspg/kspace.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>

#include "kspg/errors.hpp"

namespace kspg::kspace {

namespace {

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n)
      : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (!data) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

// Planning is not thread-safe in FFTW; execution on new arrays is.
fftw_plan cached_plan(int height, int width, int sign) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, fftw_plan> plans;
  std::lock_guard lock(mutex);
  auto key = std::make_tuple(height, width, sign);
  if (auto it = plans.find(key); it != plans.end()) return it->second;
  const std::size_t n = static_cast<std::size_t>(height) * width;
  FftwBuffer in(n), out(n);
  fftw_plan plan = fftw_plan_dft_2d(height, width, in.data, out.data, sign, FFTW_ESTIMATE);
  if (!plan) throw NumericalFailure("FFTW failed to create a plan");
  plans.emplace(key, plan);
  return plan;
}

// Centered orthonormal transform of a complex grid. `sign` is the FFTW exponent sign.
KSpaceGrid centered_dft(int height, int width, std::span<const Complex> src, int sign) {
  const std::size_t n = static_cast<std::size_t>(height) * width;
  const int hh = height / 2;
  const int hw = width / 2;
  FftwBuffer in(n), out(n);
  // ifftshift on the way in.
  for (int r = 0; r < height; ++r) {
    const int sr = (r + hh) % height;
    for (int c = 0; c < width; ++c) {
      const int sc = (c + hw) % width;
      const Complex v = src[static_cast<std::size_t>(sr) * width + sc];
      fftw_complex& dst = in.data[static_cast<std::size_t>(r) * width + c];
      dst[0] = v.real();
      dst[1] = v.imag();
    }
  }
  fftw_execute_dft(cached_plan(height, width, sign), in.data, out.data);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  KSpaceGrid result(height, width);
  // fftshift on the way out.
  for (int r = 0; r < height; ++r) {
    const int dr = (r + hh) % height;
    for (int c = 0; c < width; ++c) {
      const int dc = (c + hw) % width;
      const fftw_complex& v = out.data[static_cast<std::size_t>(r) * width + c];
      result.at(dr, dc) = Complex(v[0] * scale, v[1] * scale);
    }
  }
  return result;
}

}  // namespace

KSpaceGrid forward_transform(const Image& img) {
  std::vector<Complex> values(img.pixels().begin(), img.pixels().end());
  return centered_dft(img.height(), img.width(), values, FFTW_FORWARD);
}

KSpaceGrid inverse_transform(const KSpaceGrid& ks) {
  return centered_dft(ks.height(), ks.width(), ks.values(), FFTW_BACKWARD);
}

KSpaceGrid apply_mask(const KSpaceGrid& ks, const ColumnMask& mask) {
  if (mask.width() != ks.width()) {
    throw InvalidArgument("mask width " + std::to_string(mask.width()) +
                          " does not match k-space width " + std::to_string(ks.width()));
  }
  KSpaceGrid out(ks.height(), ks.width());
  const auto& sel = mask.selected();
  for (int r = 0; r < ks.height(); ++r)
    for (int c = 0; c < ks.width(); ++c)
      if (sel[c]) out.at(r, c) = ks.at(r, c);
  return out;
}

ColumnMask init_center_mask(int width, int budget) {
  if (width <= 0) throw InvalidArgument("width must be positive");
  if (budget <= 0 || budget > width) {
    throw InvalidArgument("initial budget " + std::to_string(budget) + " out of range (0, " +
                          std::to_string(width) + "]");
  }
  ColumnMask mask(width);
  const int start = (width - budget) / 2;
  for (int c = start; c < start + budget; ++c) mask = mask.with_column(c);
  return mask;
}

ColumnMask add_column(const ColumnMask& mask, int index) { return mask.with_column(index); }

}  // namespace kspg::kspace
