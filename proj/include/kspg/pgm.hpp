#pragma once

#include <filesystem>

#include "kspg/image.hpp"

namespace kspg::pgm {

/// Reads a binary (P5) PGM; pixels are scaled to [0, 1] by maxval.
Image read(const std::filesystem::path& path);

/// Writes P5 with maxval 255. Pixels are divided by `dynamic_range` and
/// clamped to [0, 1] before quantization.
void write(const Image& image, const std::filesystem::path& path, double dynamic_range = 1.0);

}  // namespace kspg::pgm
