#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "kspg/policynet.hpp"

namespace kspg::testing {

struct GradCheck {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
};

inline double log_prob(const policy::PolicyNetwork& net, const Image& obs, const ColumnMask& mask, int a) {
  return std::log(net.forward(obs, mask)[static_cast<std::size_t>(a)]);
}

// Central differences with step h on every parameter against the analytic
// gradient of log pi(a). Relative error |g - f| / max(|g|, |f|, floor).
inline GradCheck check_log_prob_gradient(const policy::PolicyNetwork& net, const Image& obs,
                                         const ColumnMask& mask, int a, double h = 1e-5,
                                         double floor = 1e-3) {
  auto buf = net.make_buffer();
  net.accumulate_log_prob_gradient(obs, mask, a, 1.0, buf);
  policy::PolicyNetwork probe = net;
  GradCheck out;
  for (std::size_t i = 0; i < probe.parameter_count(); ++i) {
    const double p0 = probe.parameters()[i];
    probe.parameters()[i] = p0 + h;
    const double up = log_prob(probe, obs, mask, a);
    probe.parameters()[i] = p0 - h;
    const double down = log_prob(probe, obs, mask, a);
    probe.parameters()[i] = p0;
    const double fd = (up - down) / (2 * h);
    const double g = buf.accum[i];
    const double abs_err = std::abs(g - fd);
    out.max_abs_error = std::max(out.max_abs_error, abs_err);
    out.max_rel_error = std::max(out.max_rel_error, abs_err / std::max({std::abs(g), std::abs(fd), floor}));
  }
  return out;
}

}  // namespace kspg::testing
