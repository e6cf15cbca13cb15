#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "kspg/errors.hpp"
#include "kspg/kspace.hpp"
#include "kspg/metrics.hpp"
#include "kspg/pgm.hpp"
#include "kspg/recon.hpp"
#include "support.hpp"

using namespace kspg;
namespace fs = std::filesystem;

TEST_CASE("full mask reconstructs a non-negative image") {
  Rng rng(5);
  const Image x = testing::random_image(16, 16, rng);
  const Image r = recon::zero_filled(kspace::apply_mask(kspace::forward_transform(x), ColumnMask::full(16)));
  double err = 0.0;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) err = std::max(err, std::abs(r.at(i, j) - x.at(i, j)));
  CHECK(err < 1e-10);
  CHECK(metrics::ssim(x, r, {}) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("empty mask reconstructs zeros") {
  Rng rng(6);
  const Image x = testing::random_image(8, 8, rng);
  const Image r = recon::zero_filled(kspace::apply_mask(kspace::forward_transform(x), ColumnMask(8)));
  for (double v : r.pixels()) CHECK(v == 0.0);
}

TEST_CASE("DC column alone recovers a constant image") {
  const Image x = testing::constant_image(8, 8, 0.6);
  const Image r = recon::zero_filled(kspace::apply_mask(kspace::forward_transform(x), ColumnMask(8, {4})));
  for (double v : r.pixels()) CHECK(std::abs(v - 0.6) < 1e-10);
}

TEST_CASE("reconstructor dispatch") {
  Rng rng(8);
  const Image x = testing::random_image(8, 8, rng);
  const ColumnMask m(8, {2, 3, 4});
  const auto ks = kspace::apply_mask(kspace::forward_transform(x), m);
  CHECK(recon::Reconstructor::zero_filled().reconstruct("a", m, ks) == recon::zero_filled(ks));

  const fs::path dir = fs::temp_directory_path() / "kspg_recon_table";
  fs::remove_all(dir);
  fs::create_directories(dir);
  pgm::write(testing::constant_image(8, 8, 1.0), dir / ("img__" + m.hex() + ".pgm"));
  const auto table = recon::Reconstructor::external_table(dir);
  CHECK(table.table_size() == 1);
  const Image got = table.reconstruct("img", m, ks);
  for (double v : got.pixels()) CHECK(v == 1.0);
  CHECK_THROWS_AS(table.reconstruct("img", ColumnMask(8, {4}), ks), MissingReconstruction);
  CHECK_THROWS_AS(table.reconstruct("other", m, ks), MissingReconstruction);
  fs::remove_all(dir);
}

TEST_CASE("pgm round trip") {
  const fs::path dir = fs::temp_directory_path() / "kspg_pgm";
  fs::create_directories(dir);
  Rng rng(9);
  const Image x = testing::random_image(10, 12, rng);
  pgm::write(x, dir / "x.pgm");
  const Image y = pgm::read(dir / "x.pgm");
  REQUIRE(y.height() == 10);
  REQUIRE(y.width() == 12);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(x.pixels()[i] - y.pixels()[i]) <= 0.5 / 255 + 1e-15);

  pgm::write(testing::constant_image(8, 8, 1.0), dir / "one.pgm");
  const Image one = pgm::read(dir / "one.pgm");
  for (double v : one.pixels()) CHECK(v == 1.0);
  pgm::write(Image(8, 8), dir / "zero.pgm");
  const Image zero = pgm::read(dir / "zero.pgm");
  for (double v : zero.pixels()) CHECK(v == 0.0);

  CHECK_THROWS_AS(pgm::read(dir / "missing.pgm"), IoError);
  CHECK_THROWS_AS(pgm::write(x, dir / "no" / "such" / "dir.pgm"), IoError);
  fs::remove_all(dir);
}
