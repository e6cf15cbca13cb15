#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "kspg/datagen.hpp"
#include "kspg/environment.hpp"
#include "kspg/estimators.hpp"
#include "kspg/metrics.hpp"
#include "kspg/optimizer.hpp"
#include "kspg/policynet.hpp"

namespace kspg::cli {

struct RunConfig {
  std::string mode = "greedy";
  int width = 32;
  int initial_budget = 4;
  int total_budget = 12;
  int samples_per_step = 8;
  double discount = 1.0;
  int eval_samples = 8;

  std::string data = "generate";  // "generate" or a directory of PGM files
  int count = 200;
  std::uint64_t data_seed = 1234;
  double train_fraction = 0.6;
  double val_fraction = 0.2;
  double test_fraction = 0.2;

  std::string window = "gaussian_11_sigma_1_5";
  std::string recon = "zero_filled";  // or a reconstruction table directory
  std::string arch = "desk";          // "desk", "tiny" or a layer descriptor

  int epochs = 50;
  int batch_size = 16;
  double learning_rate = 5e-5;
  std::string lr_schedule = "auto";

  std::uint64_t seed = 0;
  int workers = 1;
  std::string out = "run";

  std::vector<std::string> checkpoints;
  int snr_batches = 50;
  int bootstrap = 200;
  std::string oracle_split = "test";
  std::string baseline;

  estimators::AcquisitionConfig acquisition() const;
  metrics::SsimConfig ssim() const;
  policy::LrSchedule schedule() const;
  policy::Architecture architecture() const;
};

/// Checks cross-field constraints. `discount_given` is whether gamma was set
/// explicitly (flag or config file).
void validate(const RunConfig& cfg, bool discount_given);

/// Flat `key = value` lines in a fixed order.
std::string serialize(const RunConfig& cfg);

/// Sub-stream seeds fanned out from the run seed.
struct Seeds {
  std::uint64_t init, train, eval, diagnostics, baseline, bootstrap;
  explicit Seeds(std::uint64_t seed);
};

/// Dataset plus one environment per item, in dataset order.
struct Workspace {
  data::Dataset dataset;
  std::vector<std::unique_ptr<env::KSpaceEnv>> envs;

  std::vector<const env::AcquisitionEnv*> split(data::Split s) const;
};

Workspace build_workspace(const RunConfig& cfg);

/// Entry point shared by the executable and the tests. Errors become one
/// line on `err` and a nonzero return.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kspg::cli
