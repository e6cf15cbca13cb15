#pragma once

#include <filesystem>

#include "kspg/optimizer.hpp"
#include "kspg/policynet.hpp"

namespace kspg::policy {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Layout (little-endian): "KGPN" | u32 version | u32 len + ASCII layer
/// descriptor | u64 n | f64[n] parameters | f64[n] first moments |
/// f64[n] second moments | u64 step count | f64 learning rate.
void save_checkpoint(const std::filesystem::path& path, const PolicyNetwork& net,
                     const OptimizerState& st);

struct Checkpoint {
  PolicyNetwork net;
  OptimizerState optimizer;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace kspg::policy
