#pragma once

#include <cmath>
#include <vector>

#include "kspg/environment.hpp"
#include "kspg/image.hpp"
#include "kspg/policynet.hpp"
#include "kspg/rng.hpp"

namespace kspg::testing {

inline Image random_image(int h, int w, Rng& rng) {
  std::vector<double> px(static_cast<std::size_t>(h) * w);
  for (double& v : px) v = rng.uniform();
  return Image(h, w, std::move(px));
}

inline Image constant_image(int h, int w, double c) {
  return Image(h, w, std::vector<double>(static_cast<std::size_t>(h) * w, c));
}

// Small net with a W-wide head on an 8x8 observation.
inline policy::PolicyNetwork small_net(int width, std::uint64_t seed) {
  return policy::PolicyNetwork(policy::Architecture::tiny(8, width), seed);
}

// One-step problem over W columns: score(mask) = sum of per-column values.
inline env::ScoredMaskEnv column_value_env(const Image& obs, std::vector<double> values) {
  const int w = static_cast<int>(values.size());
  return env::ScoredMaskEnv(obs, w, [values](const ColumnMask& m) {
    double s = 0.0;
    for (int c : m.columns()) s += values[static_cast<std::size_t>(c)];
    return s;
  });
}

inline double l2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace kspg::testing
