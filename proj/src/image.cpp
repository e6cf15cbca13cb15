#include "kspg/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kspg/errors.hpp"

namespace kspg {

namespace {

void check_dims(int height, int width, std::size_t n) {
  if (height < Image::kMinSide || width < Image::kMinSide) {
    throw InvalidArgument("image must be at least " + std::to_string(Image::kMinSide) + "x" +
                          std::to_string(Image::kMinSide) + ", got " + std::to_string(height) +
                          "x" + std::to_string(width));
  }
  if (n != static_cast<std::size_t>(height) * width) {
    throw InvalidArgument("pixel count does not match image dimensions");
  }
}

}  // namespace

Image::Image(int height, int width)
    : Image(height, width, std::vector<double>(static_cast<std::size_t>(std::max(height, 0)) *
                                               std::max(width, 0))) {}

Image::Image(int height, int width, std::vector<double> pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
  check_dims(height, width, pixels_.size());
  if (!all_finite()) throw InvalidArgument("image contains non-finite pixels");
}

Image Image::unchecked(int height, int width, std::vector<double> pixels) {
  if (height <= 0 || width <= 0 || pixels.size() != static_cast<std::size_t>(height) * width) {
    throw InvalidArgument("pixel count does not match grid dimensions");
  }
  Image img;
  img.height_ = height;
  img.width_ = width;
  img.pixels_ = std::move(pixels);
  return img;
}

double Image::max_value() const {
  return pixels_.empty() ? 0.0 : *std::max_element(pixels_.begin(), pixels_.end());
}

bool Image::all_finite() const {
  return std::all_of(pixels_.begin(), pixels_.end(), [](double v) { return std::isfinite(v); });
}

KSpaceGrid::KSpaceGrid(int height, int width)
    : KSpaceGrid(height, width,
                 std::vector<Complex>(static_cast<std::size_t>(std::max(height, 0)) *
                                      std::max(width, 0))) {}

KSpaceGrid::KSpaceGrid(int height, int width, std::vector<Complex> values)
    : height_(height), width_(width), values_(std::move(values)) {
  if (height <= 0 || width <= 0 || values_.size() != static_cast<std::size_t>(height) * width) {
    throw InvalidArgument("k-space value count does not match grid dimensions");
  }
}

ColumnMask::ColumnMask(int width) {
  if (width <= 0) throw InvalidArgument("mask width must be positive");
  selected_.assign(static_cast<std::size_t>(width), false);
}

ColumnMask::ColumnMask(int width, std::initializer_list<int> columns) : ColumnMask(width) {
  for (int c : columns) {
    if (c < 0 || c >= width) throw InvalidArgument("mask column out of range: " + std::to_string(c));
    if (!selected_[c]) {
      selected_[c] = true;
      ++count_;
    }
  }
}

ColumnMask ColumnMask::full(int width) {
  ColumnMask m(width);
  m.selected_.assign(static_cast<std::size_t>(width), true);
  m.count_ = width;
  return m;
}

std::vector<int> ColumnMask::columns() const {
  std::vector<int> out;
  out.reserve(count_);
  for (int c = 0; c < width(); ++c)
    if (selected_[c]) out.push_back(c);
  return out;
}

std::vector<int> ColumnMask::unmeasured() const {
  std::vector<int> out;
  out.reserve(width() - count_);
  for (int c = 0; c < width(); ++c)
    if (!selected_[c]) out.push_back(c);
  return out;
}

ColumnMask ColumnMask::with_column(int column) const {
  if (column < 0 || column >= width()) {
    throw InvalidArgument("column " + std::to_string(column) + " out of range for width " +
                          std::to_string(width()));
  }
  if (selected_[column]) {
    throw PreconditionViolation("column " + std::to_string(column) + " is already measured");
  }
  ColumnMask next = *this;
  next.selected_[column] = true;
  ++next.count_;
  return next;
}

ColumnMask ColumnMask::intersect(const ColumnMask& other) const {
  if (other.width() != width()) throw InvalidArgument("mask width mismatch");
  ColumnMask out(width());
  for (int c = 0; c < width(); ++c) {
    if (selected_[c] && other.selected_[c]) {
      out.selected_[c] = true;
      ++out.count_;
    }
  }
  return out;
}

std::string ColumnMask::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  const int bytes = (width() + 7) / 8;
  std::string out;
  out.reserve(static_cast<std::size_t>(bytes) * 2);
  for (int b = 0; b < bytes; ++b) {
    unsigned value = 0;
    for (int bit = 0; bit < 8; ++bit) {
      const int c = b * 8 + bit;
      if (c < width() && selected_[c]) value |= 0x80u >> bit;
    }
    out.push_back(kDigits[value >> 4]);
    out.push_back(kDigits[value & 0xF]);
  }
  return out;
}

}  // namespace kspg
