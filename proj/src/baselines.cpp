#include "kspg/baselines.hpp"

#include <cmath>
#include <limits>

#include "kspg/errors.hpp"
#include "kspg/kspace.hpp"

namespace kspg::baselines {

namespace {

void check_budget(int width, int initial_budget, int horizon) {
  if (initial_budget <= 0 || horizon < 0 || initial_budget + horizon > width) {
    throw InvalidArgument("infeasible budget: L=" + std::to_string(initial_budget) +
                          " T=" + std::to_string(horizon) + " W=" + std::to_string(width));
  }
}

}  // namespace

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::random:
      return "random";
    case Provenance::equi_one:
      return "equi_one";
    case Provenance::equi_two:
      return "equi_two";
    case Provenance::na_oracle:
      return "na_oracle";
  }
  return "unknown";
}

MaskSchedule random_schedule(int width, int initial_budget, int horizon, Rng& rng) {
  check_budget(width, initial_budget, horizon);
  auto pool = kspace::init_center_mask(width, initial_budget).unmeasured();
  // Partial Fisher-Yates: the first T slots become a uniform T-subset in random order.
  for (int k = 0; k < horizon; ++k) {
    const auto j = static_cast<std::size_t>(k) + rng.below(pool.size() - static_cast<std::size_t>(k));
    std::swap(pool[static_cast<std::size_t>(k)], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(horizon));
  return {std::move(pool), Provenance::random};
}

MaskSchedule equispaced_schedule(int width, int initial_budget, int horizon, Side side) {
  check_budget(width, initial_budget, horizon);
  const ColumnMask center = kspace::init_center_mask(width, initial_budget);
  std::vector<int> candidates;
  if (side == Side::two) {
    candidates = center.unmeasured();
  } else {
    const int right_start = (width - initial_budget) / 2 + initial_budget;
    for (int c = right_start; c < width; ++c) candidates.push_back(c);
  }
  if (static_cast<int>(candidates.size()) < horizon) {
    throw InvalidArgument("only " + std::to_string(candidates.size()) +
                          " candidate columns for a horizon of " + std::to_string(horizon));
  }
  MaskSchedule s{{}, side == Side::one ? Provenance::equi_one : Provenance::equi_two};
  if (horizon == 0) return s;
  const double r = static_cast<double>(candidates.size()) / horizon;
  for (int k = 0; k < horizon; ++k) {
    const auto pos = static_cast<std::size_t>(std::floor(k * r));
    s.columns.push_back(candidates[pos]);
  }
  return s;
}

MaskSchedule na_oracle_schedule(std::span<const env::AcquisitionEnv* const> items,
                                const estimators::AcquisitionConfig& cfg, int workers) {
  if (items.empty()) throw InvalidArgument("NA oracle needs a nonempty dataset");
  cfg.validate();
  ColumnMask mask = kspace::init_center_mask(cfg.width, cfg.initial_budget);
  std::vector<double> current(items.size());
  estimators::parallel_for(items.size(), workers,
                           [&](std::size_t i) { current[i] = items[i]->evaluate(mask).score; });
  MaskSchedule s{{}, Provenance::na_oracle};
  for (int t = 0; t < cfg.horizon(); ++t) {
    const auto candidates = mask.unmeasured();
    // gains[c][i]; reduced in fixed order so the argmax is deterministic.
    std::vector<std::vector<double>> scores(candidates.size(), std::vector<double>(items.size()));
    estimators::parallel_for(candidates.size() * items.size(), workers, [&](std::size_t k) {
      const std::size_t c = k / items.size(), i = k % items.size();
      scores[c][i] = items[i]->evaluate(mask.with_column(candidates[c])).score;
    });
    int best = -1;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      double gain = 0.0;
      for (std::size_t i = 0; i < items.size(); ++i) gain += scores[c][i] - current[i];
      gain /= static_cast<double>(items.size());
      if (gain > best_gain) {
        best_gain = gain;
        best = static_cast<int>(c);
      }
    }
    s.columns.push_back(candidates[static_cast<std::size_t>(best)]);
    mask = mask.with_column(candidates[static_cast<std::size_t>(best)]);
    current = scores[static_cast<std::size_t>(best)];
  }
  return s;
}

int adaptive_oracle_step(const env::AcquisitionEnv& env, const ColumnMask& mask) {
  if (mask.is_full()) throw NoActionsAvailable("every column is already measured");
  const double base = env.evaluate(mask).score;
  int best = -1;
  double best_gain = -std::numeric_limits<double>::infinity();
  for (int c : mask.unmeasured()) {
    const double gain = env.evaluate(mask.with_column(c)).score - base;
    if (gain > best_gain) {
      best_gain = gain;
      best = c;
    }
  }
  return best;
}

double schedule_final_score(const env::AcquisitionEnv& env, const estimators::AcquisitionConfig& cfg,
                            const MaskSchedule& schedule) {
  ColumnMask mask = kspace::init_center_mask(cfg.width, cfg.initial_budget);
  for (int c : schedule.columns) mask = kspace::add_column(mask, c);
  return env.evaluate(mask).score;
}

double adaptive_oracle_final_score(const env::AcquisitionEnv& env,
                                   const estimators::AcquisitionConfig& cfg) {
  ColumnMask mask = kspace::init_center_mask(cfg.width, cfg.initial_budget);
  for (int t = 0; t < cfg.horizon(); ++t) mask = mask.with_column(adaptive_oracle_step(env, mask));
  return env.evaluate(mask).score;
}

void check_schedule(const MaskSchedule& s, int width, int initial_budget) {
  ColumnMask mask = kspace::init_center_mask(width, initial_budget);
  for (int c : s.columns) {
    if (c < 0 || c >= width) throw InvalidArgument("schedule column out of range");
    if (mask.contains(c)) throw InvalidArgument("schedule repeats or overlaps the center mask at " + std::to_string(c));
    mask = mask.with_column(c);
  }
}

}  // namespace kspg::baselines
