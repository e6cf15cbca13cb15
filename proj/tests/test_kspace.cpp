#include <doctest.h>

#include <cmath>

#include "kspg/errors.hpp"
#include "kspg/kspace.hpp"
#include "support.hpp"

using namespace kspg;

TEST_CASE("zero image maps to zero k-space") {
  const auto ks = kspace::forward_transform(Image(8, 8));
  for (const auto& v : ks.values()) CHECK(std::abs(v) == 0.0);
  const auto back = kspace::inverse_transform(ks);
  for (const auto& v : back.values()) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("constant image has a single DC coefficient") {
  const double c = 0.37;
  const auto ks = kspace::forward_transform(testing::constant_image(8, 8, c));
  for (int r = 0; r < 8; ++r)
    for (int col = 0; col < 8; ++col) {
      if (r == 4 && col == 4) {
        CHECK(std::abs(ks.at(r, col) - Complex(8 * c, 0)) < 1e-12);
      } else {
        CHECK(std::abs(ks.at(r, col)) < 1e-12);
      }
    }
}

TEST_CASE("DC sits at floor(H/2), floor(W/2) for odd sides") {
  const auto ks = kspace::forward_transform(testing::constant_image(9, 11, 1.0));
  CHECK(std::abs(ks.at(4, 5) - Complex(std::sqrt(99.0), 0)) < 1e-12);
}

TEST_CASE("round trip and Parseval on random images") {
  Rng rng(7);
  for (auto [h, w] : {std::pair{16, 16}, std::pair{9, 12}, std::pair{13, 8}}) {
    const Image x = testing::random_image(h, w, rng);
    const auto ks = kspace::forward_transform(x);
    const auto back = kspace::inverse_transform(ks);
    double err = 0.0, ex = 0.0, ek = 0.0;
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        err = std::max(err, std::abs(back.at(r, c) - Complex(x.at(r, c), 0)));
        ex += x.at(r, c) * x.at(r, c);
        ek += std::norm(ks.at(r, c));
      }
    CHECK(err < 1e-10);
    CHECK(std::abs(std::sqrt(ex) - std::sqrt(ek)) < 1e-10);
  }
}

TEST_CASE("forward transform matches a direct DFT") {
  Rng rng(3);
  const int h = 8, w = 10;
  const Image x = testing::random_image(h, w, rng);
  const auto ks = kspace::forward_transform(x);
  const double pi = std::acos(-1.0);
  double err = 0.0;
  for (int u = 0; u < h; ++u)
    for (int v = 0; v < w; ++v) {
      // centered frequencies and centered spatial coordinates
      const int fu = u - h / 2, fv = v - w / 2;
      Complex s = 0;
      for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
          const double ph = -2 * pi * (double(fu) * (r - h / 2) / h + double(fv) * (c - w / 2) / w);
          s += x.at(r, c) * Complex(std::cos(ph), std::sin(ph));
        }
      err = std::max(err, std::abs(s / std::sqrt(double(h * w)) - ks.at(u, v)));
    }
  CHECK(err < 1e-12);
}

TEST_CASE("apply_mask") {
  Rng rng(11);
  const auto ks = kspace::forward_transform(testing::random_image(8, 8, rng));
  CHECK(kspace::apply_mask(ks, ColumnMask::full(8)) == ks);
  const auto empty = kspace::apply_mask(ks, ColumnMask(8));
  for (const auto& v : empty.values()) CHECK(v == Complex(0, 0));

  const ColumnMask m1(8, {0, 2, 3, 7}), m2(8, {2, 5, 7});
  const auto once = kspace::apply_mask(ks, m1);
  CHECK(kspace::apply_mask(once, m1) == once);
  CHECK(kspace::apply_mask(once, m2) == kspace::apply_mask(ks, m1.intersect(m2)));
  for (int r = 0; r < 8; ++r) {
    CHECK(once.at(r, 2) == ks.at(r, 2));
    CHECK(once.at(r, 1) == Complex(0, 0));
  }
  CHECK_THROWS_AS(kspace::apply_mask(ks, ColumnMask(9)), InvalidArgument);
}

TEST_CASE("center masks") {
  CHECK(kspace::init_center_mask(8, 2).columns() == std::vector<int>{3, 4});
  CHECK(kspace::init_center_mask(8, 3).columns() == std::vector<int>{2, 3, 4});
  std::vector<int> mid(16);
  for (int i = 0; i < 16; ++i) mid[i] = 56 + i;
  CHECK(kspace::init_center_mask(128, 16).columns() == mid);
  // the DC column is inside every center mask of two or more columns
  for (int w : {8, 9, 16, 17})
    for (int l = 2; l <= 4; ++l) CHECK(kspace::init_center_mask(w, l).contains(w / 2));
  CHECK_THROWS_AS(kspace::init_center_mask(8, 0), InvalidArgument);
  CHECK_THROWS_AS(kspace::init_center_mask(8, 9), InvalidArgument);
}

TEST_CASE("add_column returns a new mask") {
  const ColumnMask m(8, {3, 4});
  const auto n = kspace::add_column(m, 0);
  CHECK(n.columns() == std::vector<int>{0, 3, 4});
  CHECK(n.count() == 3);
  CHECK(m.count() == 2);
  CHECK_THROWS_AS(kspace::add_column(m, 3), PreconditionViolation);
  CHECK_THROWS_AS(kspace::add_column(m, 8), InvalidArgument);
}

TEST_CASE("mask hex is big-endian by column") {
  CHECK(ColumnMask(8, {0}).hex() == "80");
  CHECK(ColumnMask(8, {3, 4}).hex() == "18");
  CHECK(ColumnMask(12, {0, 11}).hex() == "8010");
}

TEST_CASE("image validation") {
  CHECK_THROWS_AS(Image(7, 8), InvalidArgument);
  CHECK_THROWS_AS(Image(8, 8, std::vector<double>(63)), InvalidArgument);
  std::vector<double> px(64, 0.0);
  px[5] = std::nan("");
  CHECK_THROWS_AS(Image(8, 8, px), InvalidArgument);
}
