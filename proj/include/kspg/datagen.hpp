#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kspg/image.hpp"

namespace kspg::data {

enum class Split { unassigned, train, val, test };

std::string to_string(Split s);

struct Item {
  std::string id;
  Image image;
  double dynamic_range = 1.0;
  Split split = Split::unassigned;
};

struct Dataset {
  std::vector<Item> items;

  std::size_t size() const { return items.size(); }
  /// Items assigned to `s`, in dataset order.
  std::vector<const Item*> split(Split s) const;
  std::vector<const Item*> all() const;
};

/// 3-6 random ellipses per image on a zero background, clipped to [0, 1].
/// Item i draws from stream derive_seed(seed, i).
Dataset generate_phantoms(int count, int size, std::uint64_t seed);

/// Seeded shuffle followed by a contiguous train/val/test partition.
Dataset split_dataset(Dataset ds, std::array<double, 3> fractions, std::uint64_t seed);

/// Every *.pgm file in `directory` (sorted by name); ids are the file stems.
Dataset load_pgm_dataset(const std::filesystem::path& directory);

/// CSV with header `id,split,dynamic_range`.
void write_manifest(const Dataset& ds, const std::filesystem::path& path);

/// `<id>.pgm` for every item plus manifest.csv.
void write_dataset(const Dataset& ds, const std::filesystem::path& directory);

}  // namespace kspg::data
