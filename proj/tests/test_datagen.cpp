#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "kspg/datagen.hpp"
#include "kspg/errors.hpp"
#include "kspg/pgm.hpp"
#include "kspg/rng.hpp"

using namespace kspg;
namespace fs = std::filesystem;

TEST_CASE("phantoms are deterministic and clipped") {
  const auto a = data::generate_phantoms(20, 32, 7);
  const auto b = data::generate_phantoms(20, 32, 7);
  const auto c = data::generate_phantoms(20, 32, 8);
  REQUIRE(a.size() == 20);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.items[i].image == b.items[i].image);
    CHECK(a.items[i].id == b.items[i].id);
    ids.insert(a.items[i].id);
    for (double v : a.items[i].image.pixels()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(a.items[i].dynamic_range == a.items[i].image.max_value());
  }
  CHECK(ids.size() == 20);
  CHECK_FALSE(a.items[0].image == c.items[0].image);
  CHECK_THROWS_AS(data::generate_phantoms(0, 32, 1), InvalidArgument);
  CHECK_THROWS_AS(data::generate_phantoms(3, 8, 1), InvalidArgument);
}

TEST_CASE("phantom intensity stays in its band") {
  const auto ds = data::generate_phantoms(1000, 32, 1);
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& it : ds.items)
    for (double v : it.image.pixels()) {
      total += v;
      ++n;
    }
  const double mean = total / static_cast<double>(n);
  CHECK(mean > 0.05);
  CHECK(mean < 0.6);
}

TEST_CASE("phantoms are left-right asymmetric") {
  const auto ds = data::generate_phantoms(50, 32, 2);
  for (const auto& it : ds.items) {
    double diff = 0.0;
    for (int r = 0; r < 32; ++r)
      for (int c = 0; c < 32; ++c) diff += std::abs(it.image.at(r, c) - it.image.at(r, 31 - c));
    CHECK(diff > 0.0);
  }
}

TEST_CASE("splits") {
  auto ds = data::split_dataset(data::generate_phantoms(100, 16, 3), {0.6, 0.2, 0.2}, 5);
  CHECK(ds.split(data::Split::train).size() == 60);
  CHECK(ds.split(data::Split::val).size() == 20);
  CHECK(ds.split(data::Split::test).size() == 20);
  for (const auto& it : ds.items) CHECK(it.split != data::Split::unassigned);
  const auto again = data::split_dataset(data::generate_phantoms(100, 16, 3), {0.6, 0.2, 0.2}, 5);
  for (std::size_t i = 0; i < 100; ++i) CHECK(ds.items[i].split == again.items[i].split);

  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const double a = rng.uniform(0.2, 1), b = rng.uniform(0.2, 1), c = rng.uniform(0.2, 1);
    const auto s = data::split_dataset(data::generate_phantoms(30, 16, 3), {a / (a + b + c), b / (a + b + c), c / (a + b + c)}, rng.next_u64());
    CHECK(s.split(data::Split::train).size() + s.split(data::Split::val).size() +
              s.split(data::Split::test).size() ==
          30);
  }
  CHECK_THROWS_AS(data::split_dataset(data::generate_phantoms(3, 16, 3), {0.98, 0.01, 0.01}, 1), InvalidArgument);
}

TEST_CASE("loading PGM directories") {
  const fs::path dir = fs::temp_directory_path() / "kspg_load";
  fs::remove_all(dir);
  fs::create_directories(dir);
  try {
    data::load_pgm_dataset(dir);
    FAIL("empty directory accepted");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(dir.string()) != std::string::npos);
  }

  {
    std::ofstream f(dir / "b.pgm", std::ios::binary);
    f << "P5\n# white\n8 8\n255\n" << std::string(64, '\xff');
  }
  pgm::write(Image(8, 8), dir / "a.pgm");
  const auto ds = data::load_pgm_dataset(dir);
  REQUIRE(ds.size() == 2);
  CHECK(ds.items[0].id == "a");
  CHECK(ds.items[1].id == "b");
  for (double v : ds.items[1].image.pixels()) CHECK(v == 1.0);

  pgm::write(Image(8, 10), dir / "c.pgm");
  CHECK_THROWS_AS(data::load_pgm_dataset(dir), ParseError);
  CHECK_THROWS_AS(data::load_pgm_dataset(dir / "missing"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("dataset writing round trips through the loader") {
  const fs::path dir = fs::temp_directory_path() / "kspg_write";
  fs::remove_all(dir);
  const auto ds = data::split_dataset(data::generate_phantoms(5, 16, 9), {0.6, 0.2, 0.2}, 1);
  data::write_dataset(ds, dir);
  data::write_manifest(ds, dir / "manifest.csv");
  const auto back = data::load_pgm_dataset(dir);
  REQUIRE(back.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(back.items[i].id == ds.items[i].id);
    for (std::size_t k = 0; k < ds.items[i].image.size(); ++k)
      CHECK(std::abs(back.items[i].image.pixels()[k] - ds.items[i].image.pixels()[k]) <= 0.5 / 255 + 1e-12);
  }
  std::ifstream m(dir / "manifest.csv");
  std::string header;
  std::getline(m, header);
  CHECK(header == "id,split,dynamic_range");
  fs::remove_all(dir);
}
