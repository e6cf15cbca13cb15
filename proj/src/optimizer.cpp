#include "kspg/optimizer.hpp"

#include <cmath>

#include "kspg/errors.hpp"

namespace kspg::policy {

void optimizer_step(PolicyNetwork& net, GradientBuffer& buf, OptimizerState& st) {
  const std::size_t n = net.parameter_count();
  if (buf.accum.size() != n || st.first_moment.size() != n || st.second_moment.size() != n) {
    throw InvalidArgument("optimizer state does not match network parameter count");
  }
  if (!buf.all_finite()) throw NumericalFailure("non-finite policy gradient");
  ++st.step_count;
  const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step_count));
  const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step_count));
  auto params = net.parameters();
  for (std::size_t i = 0; i < n; ++i) {
    const double g = buf.accum[i];
    st.first_moment[i] = st.beta1 * st.first_moment[i] + (1.0 - st.beta1) * g;
    st.second_moment[i] = st.beta2 * st.second_moment[i] + (1.0 - st.beta2) * g * g;
    const double m_hat = st.first_moment[i] / c1;
    const double v_hat = st.second_moment[i] / c2;
    params[i] += st.learning_rate * m_hat / (std::sqrt(v_hat) + st.epsilon);
  }
  buf.reset();
}

std::string to_string(LrSchedule s) {
  return s == LrSchedule::greedy_schedule ? "greedy_schedule" : "nongreedy_schedule";
}

LrSchedule parse_lr_schedule(const std::string& name) {
  if (name == "greedy_schedule" || name == "greedy") return LrSchedule::greedy_schedule;
  if (name == "nongreedy_schedule" || name == "nongreedy") return LrSchedule::nongreedy_schedule;
  throw InvalidArgument("unknown learning-rate schedule '" + name + "'");
}

void decay_learning_rate(OptimizerState& st, LrSchedule schedule, int epoch) {
  if (epoch < 1) throw InvalidArgument("epochs are 1-based");
  switch (schedule) {
    case LrSchedule::greedy_schedule:
      if (epoch == 41) st.learning_rate /= 10.0;
      break;
    case LrSchedule::nongreedy_schedule:
      if (epoch == 11 || epoch == 21 || epoch == 31 || epoch == 41) st.learning_rate /= 2.0;
      break;
  }
}

}  // namespace kspg::policy
