#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kspg/environment.hpp"
#include "kspg/optimizer.hpp"
#include "kspg/policynet.hpp"

namespace kspg::estimators {

enum class Mode { greedy, nongreedy };

std::string to_string(Mode m);
Mode parse_mode(const std::string& name);

struct AcquisitionConfig {
  int width = 0;
  int initial_budget = 0;    // L
  int total_budget = 0;      // M
  int samples_per_step = 8;  // q
  double discount = 1.0;     // gamma; unused in greedy mode
  Mode mode = Mode::greedy;

  int horizon() const { return total_budget - initial_budget; }
  /// Requires 0 < L <= M <= W, q >= 2, gamma in [0, 1]. M == L is a legal
  /// zero-horizon problem here; the CLI rejects it.
  void validate() const;
};

struct State {
  ColumnMask mask;
  Image observation;
  double score = 0.0;
};

/// Center mask of L columns and its observation.
State initial_state(const env::AcquisitionEnv& env, const AcquisitionConfig& cfg);

/// Acquire `action`. PreconditionViolation if it is already measured.
State advance(const env::AcquisitionEnv& env, const State& state, int action);

/// sum_{t' >= t} gamma^(t'-t) r_t'.
double discounted_return(std::span<const double> rewards, std::size_t t, double gamma);

/// (1/(q-1)) (r_i - mean_j r_j) for every sample i.
std::vector<double> greedy_weights(std::span<const double> rewards);

/// rewards[i][t] for trajectory i and step t (all of equal length T).
/// Returns w[i][t] = (1/(q-1)) sum_{t'>=t} gamma^(t'-t) (r[i][t'] - mean_j r[j][t']).
std::vector<std::vector<double>> nongreedy_weights(const std::vector<std::vector<double>>& rewards,
                                                   double gamma);

// ---------------------------------------------------------------- greedy

struct GreedyStepRecord {
  State state;
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<State> next;
};

/// Samples q actions in `state` and simulates each of them.
GreedyStepRecord sample_greedy_step(const env::AcquisitionEnv& env, const State& state,
                                    const policy::PolicyNetwork& net, int q, Rng& rng);

/// buf += scale * sum_i greedy_weights(rewards)_i grad log pi(a_i | state).
void accumulate_greedy(const GreedyStepRecord& rec, const policy::PolicyNetwork& net, double scale,
                       policy::GradientBuffer& buf);

/// One greedy acquisition step: sample, accumulate, then continue from one
/// uniformly chosen sample.
State greedy_step(const env::AcquisitionEnv& env, const State& state,
                  const policy::PolicyNetwork& net, const AcquisitionConfig& cfg, Rng& rng,
                  policy::GradientBuffer& buf, double scale = 1.0);

// ---------------------------------------------------------------- non-greedy

struct Transition {
  ColumnMask mask;
  Image observation;
  int action = -1;
  double log_prob = 0.0;
  double reward = 0.0;
  double score_after = 0.0;
};

struct TrajectoryRecord {
  int id = 0;
  std::vector<Transition> steps;
};

struct EpisodeResult {
  double initial_score = 0.0;
  std::vector<TrajectoryRecord> trajectories;
  std::vector<ColumnMask> final_masks;
  std::vector<double> final_scores;

  std::vector<std::vector<double>> reward_table() const;
};

/// Branches q trajectories in the initial state and follows each with one
/// sample per step up to the horizon. Records only; no gradients.
EpisodeResult sample_nongreedy_episode(const env::AcquisitionEnv& env,
                                       const policy::PolicyNetwork& net,
                                       const AcquisitionConfig& cfg, Rng& rng);

/// Replays stored transitions: buf += scale * w[i][t] grad log pi(a_it | s_it).
void accumulate_nongreedy(const EpisodeResult& episode, const std::vector<std::vector<double>>& rewards,
                          const policy::PolicyNetwork& net, double gamma, double scale,
                          policy::GradientBuffer& buf);

EpisodeResult nongreedy_episode(const env::AcquisitionEnv& env, const policy::PolicyNetwork& net,
                                const AcquisitionConfig& cfg, Rng& rng, policy::GradientBuffer& buf,
                                double scale = 1.0);

// ---------------------------------------------------------------- training

struct ItemOutcome {
  double initial_score = 0.0;
  double final_score = 0.0;  // mean over trajectories for non-greedy
};

/// Runs the configured estimator on one item and accumulates into buf.
ItemOutcome run_item(const env::AcquisitionEnv& env, const policy::PolicyNetwork& net,
                     const AcquisitionConfig& cfg, Rng& rng, policy::GradientBuffer& buf,
                     double scale);

struct BatchGradient {
  policy::GradientBuffer buffer;
  std::vector<ItemOutcome> outcomes;
};

/// Mean-over-items estimator gradient for one batch. Item k draws from
/// stream derive_seed(seed, k); per-item buffers are merged in item order, so
/// the result does not depend on `workers`.
BatchGradient batch_gradient(std::span<const env::AcquisitionEnv* const> batch,
                             const policy::PolicyNetwork& net, const AcquisitionConfig& cfg,
                             std::uint64_t seed, int workers = 1);

struct EpochStats {
  double mean_initial_ssim = 0.0;
  double mean_final_ssim = 0.0;
  double mean_return = 0.0;
  int optimizer_steps = 0;
};

struct TrainOptions {
  int batch_size = 16;
  int workers = 1;
};

/// One pass over `train` in a shuffled order, one optimizer step per batch.
EpochStats train_epoch(std::span<const env::AcquisitionEnv* const> train, policy::PolicyNetwork& net,
                       const AcquisitionConfig& cfg, policy::OptimizerState& opt,
                       const TrainOptions& opts, std::uint64_t seed, int epoch);

// ---------------------------------------------------------------- evaluation

/// Final state of one sampled policy trajectory and the actions it took.
struct Rollout {
  State final_state;
  std::vector<int> actions;
};

Rollout policy_rollout(const env::AcquisitionEnv& env, const policy::PolicyNetwork& net,
                       const AcquisitionConfig& cfg, Rng& rng);

struct EvalResult {
  double mean = 0.0;               // mean over images of per-image means
  double std_over_images = 0.0;    // sample std of per-image means
  double mean_trajectory_std = 0.0;
  std::vector<double> per_image_mean;
  std::vector<double> per_image_std;
  std::vector<double> all_finals;  // image-major, q_eval per image
};

/// Summarizes a [image][trajectory] table of final scores.
EvalResult summarize(const std::vector<std::vector<double>>& finals);

EvalResult evaluate(std::span<const env::AcquisitionEnv* const> items,
                    const policy::PolicyNetwork& net, const AcquisitionConfig& cfg, int q_eval,
                    std::uint64_t seed, int workers = 1);

/// Scatters work items [0, n) over `workers` threads.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace kspg::estimators
