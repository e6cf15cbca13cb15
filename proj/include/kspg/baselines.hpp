#pragma once

#include <span>
#include <string>
#include <vector>

#include "kspg/environment.hpp"
#include "kspg/estimators.hpp"
#include "kspg/rng.hpp"

namespace kspg::baselines {

enum class Provenance { random, equi_one, equi_two, na_oracle };

std::string to_string(Provenance p);

struct MaskSchedule {
  std::vector<int> columns;
  Provenance provenance = Provenance::random;
};

/// T distinct columns drawn uniformly without replacement from the W - L
/// columns outside the center mask.
MaskSchedule random_schedule(int width, int initial_budget, int horizon, Rng& rng);

enum class Side { one, two };

/// Every r-th unmeasured column (positions floor(k r), r = candidates / T).
/// Side::one only considers columns right of the center block.
MaskSchedule equispaced_schedule(int width, int initial_budget, int horizon, Side side);

/// Shared schedule greedily maximizing the mean SSIM gain over `items`;
/// ties go to the lowest column index.
MaskSchedule na_oracle_schedule(std::span<const env::AcquisitionEnv* const> items,
                                const estimators::AcquisitionConfig& cfg, int workers = 1);

/// Per-image argmax of the immediate score gain; ties to the lowest index.
int adaptive_oracle_step(const env::AcquisitionEnv& env, const ColumnMask& mask);

/// Score after applying a fixed schedule on top of the center mask.
double schedule_final_score(const env::AcquisitionEnv& env, const estimators::AcquisitionConfig& cfg,
                            const MaskSchedule& schedule);

/// Adaptive oracle followed for the whole horizon; returns the final score.
double adaptive_oracle_final_score(const env::AcquisitionEnv& env,
                                   const estimators::AcquisitionConfig& cfg);

/// Throws InvalidArgument unless the schedule is legal for (W, L): in range,
/// unique, disjoint from the center mask.
void check_schedule(const MaskSchedule& s, int width, int initial_budget);

}  // namespace kspg::baselines
