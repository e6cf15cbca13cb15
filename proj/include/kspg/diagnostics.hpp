#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kspg/environment.hpp"
#include "kspg/estimators.hpp"
#include "kspg/policynet.hpp"

namespace kspg::diagnostics {

/// Policies pi(.|s) at acquisition step t for every visited state (image-major:
/// state i*replicates + j is replicate j of image i).
struct PolicySnapshot {
  int step = 0;
  int images = 0;
  int replicates = 1;
  std::vector<std::vector<double>> policies;
};

/// -sum_j pbar_j ln pbar_j over the state-averaged policy (nats).
double marginal_entropy(const PolicySnapshot& snap);

/// Mean over states of -sum_j pi_j ln pi_j (nats).
double conditional_entropy(const PolicySnapshot& snap);

/// Unclamped H(A) - H(A|S).
double mutual_information(const PolicySnapshot& snap);

/// MI as reported in tables: clamped at zero from below.
inline double reported_mutual_information(double raw) { return raw < 0.0 ? 0.0 : raw; }

/// Runs `replicates` sampled policy trajectories per image and snapshots the
/// policy at each of the T steps.
std::vector<PolicySnapshot> gather_snapshots(std::span<const env::AcquisitionEnv* const> items,
                                             const policy::PolicyNetwork& net,
                                             const estimators::AcquisitionConfig& cfg,
                                             int replicates, std::uint64_t seed, int workers = 1);

/// Mean over steps of the raw MI.
double mean_mutual_information(std::span<const PolicySnapshot> snaps);

/// Bootstrap standard deviation of mean_mutual_information, resampling images
/// (with all their replicates) with replacement.
double bootstrap_mi_std(std::span<const PolicySnapshot> snaps, int resamples, std::uint64_t seed);

/// ||mu|| / ||sigma_mu|| with mu = mean of the g_i and
/// sigma_mu^2 = sum_i (g_i - mu)^2 / (B (B - 1)) per coordinate.
/// DegenerateVariance if every gradient is identical.
double gradient_snr(const std::vector<std::vector<double>>& gradients);

struct SnrEstimate {
  double snr = 0.0;
  int batches = 0;
  int samples_per_step = 0;
  std::vector<std::vector<double>> gradients;
};

/// Collects `batches` estimator gradients of the final dense layer's weights
/// (no optimizer steps) and returns their SNR. Batches cycle through
/// reshuffled passes over `train`.
SnrEstimate measure_gradient_snr(std::span<const env::AcquisitionEnv* const> train,
                                 const policy::PolicyNetwork& net,
                                 const estimators::AcquisitionConfig& cfg, int batches,
                                 int batch_size, std::uint64_t seed, int workers = 1);

}  // namespace kspg::diagnostics
