#pragma once

#include <complex>
#include <initializer_list>
#include <string>
#include <cstddef>
#include <span>
#include <vector>

namespace kspg {

/// Real-valued row-major pixel grid.
class Image {
 public:
  static constexpr int kMinSide = 8;

  Image() = default;
  /// Zero image. Throws InvalidArgument when either side is below kMinSide.
  Image(int height, int width);
  Image(int height, int width, std::vector<double> pixels);

  /// Same as the constructors but without the minimum-side rule; for
  /// intermediate grids (feature maps, test fixtures).
  static Image unchecked(int height, int width, std::vector<double> pixels);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return pixels_.size(); }

  double& at(int row, int col) { return pixels_[static_cast<std::size_t>(row) * width_ + col]; }
  double at(int row, int col) const { return pixels_[static_cast<std::size_t>(row) * width_ + col]; }

  std::span<double> pixels() { return pixels_; }
  std::span<const double> pixels() const { return pixels_; }

  double max_value() const;
  bool all_finite() const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> pixels_;
};

using Complex = std::complex<double>;

/// Complex H x W grid in centered-spectrum layout (DC at floor(H/2), floor(W/2)).
class KSpaceGrid {
 public:
  KSpaceGrid() = default;
  KSpaceGrid(int height, int width);
  KSpaceGrid(int height, int width, std::vector<Complex> values);

  int height() const { return height_; }
  int width() const { return width_; }

  Complex& at(int row, int col) { return values_[static_cast<std::size_t>(row) * width_ + col]; }
  const Complex& at(int row, int col) const { return values_[static_cast<std::size_t>(row) * width_ + col]; }

  std::span<Complex> values() { return values_; }
  std::span<const Complex> values() const { return values_; }

  friend bool operator==(const KSpaceGrid&, const KSpaceGrid&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<Complex> values_;
};

/// Set of acquired k-space columns. Immutable in practice: add_column returns a copy.
class ColumnMask {
 public:
  ColumnMask() = default;
  explicit ColumnMask(int width);
  ColumnMask(int width, std::initializer_list<int> columns);
  static ColumnMask full(int width);

  int width() const { return static_cast<int>(selected_.size()); }
  int count() const { return count_; }
  bool is_full() const { return count_ == width(); }
  bool contains(int column) const { return selected_.at(static_cast<std::size_t>(column)); }

  const std::vector<bool>& selected() const { return selected_; }
  std::vector<int> columns() const;
  std::vector<int> unmeasured() const;

  /// New mask with `column` set. PreconditionViolation if already set.
  ColumnMask with_column(int column) const;

  /// Column-wise intersection.
  ColumnMask intersect(const ColumnMask& other) const;

  /// Big-endian hex of the bit vector: column 0 is the MSB of the first
  /// byte, trailing pad bits are zero.
  std::string hex() const;

  friend bool operator==(const ColumnMask&, const ColumnMask&) = default;

 private:
  std::vector<bool> selected_;
  int count_ = 0;
};

}  // namespace kspg
