#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kspg/policynet.hpp"

namespace kspg::policy {

struct OptimizerState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::int64_t step_count = 0;
  double learning_rate = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  OptimizerState() = default;
  OptimizerState(std::size_t parameter_count, double lr)
      : first_moment(parameter_count, 0.0), second_moment(parameter_count, 0.0), learning_rate(lr) {}
};

/// Adam step in the ascent direction of buf.accum (which already holds an
/// estimate of grad J). Resets the buffer. NumericalFailure on non-finite input.
void optimizer_step(PolicyNetwork& net, GradientBuffer& buf, OptimizerState& st);

enum class LrSchedule { greedy_schedule, nongreedy_schedule };

std::string to_string(LrSchedule s);
LrSchedule parse_lr_schedule(const std::string& name);

/// Call once at the start of every epoch (1-based). Greedy: /10 at epoch 41.
/// Non-greedy: /2 at epochs 11, 21, 31, 41.
void decay_learning_rate(OptimizerState& st, LrSchedule schedule, int epoch);

}  // namespace kspg::policy
