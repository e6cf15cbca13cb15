#pragma once

#include "kspg/image.hpp"

namespace kspg::kspace {

/// Orthonormal centered 2-D DFT: fftshift(fft2(ifftshift(x))) / sqrt(H*W).
KSpaceGrid forward_transform(const Image& img);

/// Exact inverse of forward_transform; returns the complex image.
KSpaceGrid inverse_transform(const KSpaceGrid& ks);

/// Zero every column not selected by the mask.
KSpaceGrid apply_mask(const KSpaceGrid& ks, const ColumnMask& mask);

/// Contiguous block of `budget` columns starting at floor((width - budget) / 2).
ColumnMask init_center_mask(int width, int budget);

/// Value-semantics wrapper around ColumnMask::with_column with range checks.
ColumnMask add_column(const ColumnMask& mask, int index);

}  // namespace kspg::kspace
