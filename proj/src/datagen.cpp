#include "kspg/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "kspg/errors.hpp"
#include "kspg/pgm.hpp"
#include "kspg/rng.hpp"

namespace kspg::data {

namespace {

struct Ellipse {
  double cx, cy, a, b, theta, intensity;
};

Image render_phantom(int size, Rng& rng) {
  const int count = 3 + static_cast<int>(rng.below(4));
  std::vector<Ellipse> shapes;
  shapes.reserve(count);
  for (int k = 0; k < count; ++k) {
    Ellipse e{};
    if (k == 0) {
      // Forced off-center so every phantom is left-right asymmetric.
      const double side = rng.uniform() < 0.5 ? -1.0 : 1.0;
      e.cx = side * rng.uniform(0.25, 0.6);
    } else {
      e.cx = rng.uniform(-0.6, 0.6);
    }
    e.cy = rng.uniform(-0.6, 0.6);
    e.a = rng.uniform(0.1, 0.5);
    e.b = rng.uniform(0.1, 0.5);
    e.theta = rng.uniform(0.0, std::numbers::pi);
    e.intensity = rng.uniform(0.2, 1.0);
    shapes.push_back(e);
  }
  Image img(size, size);
  for (int r = 0; r < size; ++r) {
    const double y = (r + 0.5) / size * 2.0 - 1.0;
    for (int c = 0; c < size; ++c) {
      const double x = (c + 0.5) / size * 2.0 - 1.0;
      double v = 0.0;
      for (const auto& e : shapes) {
        const double ct = std::cos(e.theta), st = std::sin(e.theta);
        const double u = ((x - e.cx) * ct + (y - e.cy) * st) / e.a;
        const double w = (-(x - e.cx) * st + (y - e.cy) * ct) / e.b;
        if (u * u + w * w <= 1.0) v += e.intensity;
      }
      img.at(r, c) = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

double range_of(const Image& img) {
  const double m = img.max_value();
  return m > 0 ? m : 1.0;
}

}  // namespace

std::string to_string(Split s) {
  switch (s) {
    case Split::train:
      return "train";
    case Split::val:
      return "val";
    case Split::test:
      return "test";
    case Split::unassigned:
      break;
  }
  return "unassigned";
}

std::vector<const Item*> Dataset::split(Split s) const {
  std::vector<const Item*> out;
  for (const auto& it : items)
    if (it.split == s) out.push_back(&it);
  return out;
}

std::vector<const Item*> Dataset::all() const {
  std::vector<const Item*> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(&it);
  return out;
}

Dataset generate_phantoms(int count, int size, std::uint64_t seed) {
  if (count < 1) throw InvalidArgument("phantom count must be at least 1");
  if (size < 16) throw InvalidArgument("phantom size must be at least 16");
  Dataset ds;
  ds.items.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    char id[32];
    std::snprintf(id, sizeof id, "phantom_%05d", i);
    Image img = render_phantom(size, rng);
    const double range = range_of(img);
    ds.items.push_back({id, std::move(img), range, Split::unassigned});
  }
  return ds;
}

Dataset split_dataset(Dataset ds, std::array<double, 3> fractions, std::uint64_t seed) {
  double sum = 0.0;
  for (double f : fractions) {
    if (!(f > 0)) throw InvalidArgument("split fractions must be positive");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("split fractions must sum to 1");
  const std::size_t n = ds.items.size();
  const auto n_train = static_cast<std::size_t>(std::llround(fractions[0] * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::llround(fractions[1] * static_cast<double>(n)));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= n) {
    throw InvalidArgument("split of " + std::to_string(n) + " items leaves an empty partition");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  for (std::size_t k = 0; k < n; ++k) {
    ds.items[order[k]].split = k < n_train ? Split::train : (k < n_train + n_val ? Split::val : Split::test);
  }
  return ds;
}

Dataset load_pgm_dataset(const std::filesystem::path& directory) {
  if (!std::filesystem::is_directory(directory)) {
    throw IoError("dataset directory not found: " + directory.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(directory))
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
  if (files.empty()) throw ParseError("no PGM files in " + directory.string());
  std::sort(files.begin(), files.end());
  Dataset ds;
  for (const auto& f : files) {
    Image img = pgm::read(f);
    if (!ds.items.empty() && (img.height() != ds.items.front().image.height() ||
                              img.width() != ds.items.front().image.width())) {
      throw ParseError(f.string() + ": dimensions differ from " + ds.items.front().id);
    }
    const double range = range_of(img);
    ds.items.push_back({f.stem().string(), std::move(img), range, Split::unassigned});
  }
  return ds;
}

void write_manifest(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "id,split,dynamic_range\n";
  char buf[64];
  for (const auto& it : ds.items) {
    std::snprintf(buf, sizeof buf, "%.17g", it.dynamic_range);
    out << it.id << ',' << to_string(it.split) << ',' << buf << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void write_dataset(const Dataset& ds, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  for (const auto& it : ds.items) pgm::write(it.image, directory / (it.id + ".pgm"));
  write_manifest(ds, directory / "manifest.csv");
}

}  // namespace kspg::data
