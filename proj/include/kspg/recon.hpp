#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "kspg/image.hpp"

namespace kspg::recon {

enum class ReconKind { zero_filled, external_table };

/// Magnitude of the inverse transform of masked k-space.
Image zero_filled(const KSpaceGrid& ks_masked);

/// The reconstruction operator G. Cheap to copy; the external table is shared
/// and read-only after construction.
class Reconstructor {
 public:
  static Reconstructor zero_filled();

  /// Loads every `<item_id>__<mask_hex>.pgm` in `directory`.
  static Reconstructor external_table(const std::filesystem::path& directory);

  ReconKind kind() const { return kind_; }
  std::size_t table_size() const { return table_ ? table_->size() : 0; }

  /// Throws MissingReconstruction for table misses.
  Image reconstruct(std::string_view item_id, const ColumnMask& mask,
                    const KSpaceGrid& ks_masked) const;

 private:
  ReconKind kind_ = ReconKind::zero_filled;
  std::shared_ptr<const std::map<std::string, Image, std::less<>>> table_;
};

}  // namespace kspg::recon
