#include "kspg/recon.hpp"

#include <cmath>

#include "kspg/errors.hpp"
#include "kspg/kspace.hpp"
#include "kspg/pgm.hpp"

namespace kspg::recon {

Image zero_filled(const KSpaceGrid& ks_masked) {
  const KSpaceGrid img = kspace::inverse_transform(ks_masked);
  std::vector<double> mag(img.values().size());
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(img.values()[i]);
  return Image::unchecked(img.height(), img.width(), std::move(mag));
}

Reconstructor Reconstructor::zero_filled() { return Reconstructor{}; }

Reconstructor Reconstructor::external_table(const std::filesystem::path& directory) {
  if (!std::filesystem::is_directory(directory)) {
    throw IoError("reconstruction table directory not found: " + directory.string());
  }
  auto table = std::make_shared<std::map<std::string, Image, std::less<>>>();
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".pgm") continue;
    const std::string stem = entry.path().stem().string();
    if (stem.find("__") == std::string::npos) {
      throw ParseError(entry.path().string() + ": expected <item_id>__<mask_hex>.pgm");
    }
    table->emplace(stem, pgm::read(entry.path()));
  }
  Reconstructor r;
  r.kind_ = ReconKind::external_table;
  r.table_ = std::move(table);
  return r;
}

Image Reconstructor::reconstruct(std::string_view item_id, const ColumnMask& mask,
                                 const KSpaceGrid& ks_masked) const {
  if (kind_ == ReconKind::zero_filled) return recon::zero_filled(ks_masked);
  std::string key(item_id);
  key += "__";
  key += mask.hex();
  auto it = table_->find(key);
  if (it == table_->end()) {
    throw MissingReconstruction("no precomputed reconstruction for item '" + std::string(item_id) +
                                "' mask " + mask.hex());
  }
  return it->second;
}

}  // namespace kspg::recon
