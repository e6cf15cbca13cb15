#include "kspg/estimators.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "kspg/errors.hpp"
#include "kspg/kspace.hpp"

namespace kspg::estimators {

std::string to_string(Mode m) { return m == Mode::greedy ? "greedy" : "nongreedy"; }

Mode parse_mode(const std::string& name) {
  if (name == "greedy") return Mode::greedy;
  if (name == "nongreedy") return Mode::nongreedy;
  throw InvalidArgument("unknown mode '" + name + "' (expected greedy or nongreedy)");
}

void AcquisitionConfig::validate() const {
  if (width <= 0) throw InvalidArgument("width must be positive");
  if (initial_budget <= 0) throw InvalidArgument("initial budget L must be positive");
  if (total_budget < initial_budget) throw InvalidArgument("total budget M must be at least L");
  if (total_budget > width) throw InvalidArgument("total budget M exceeds width");
  if (samples_per_step < 2) throw InvalidArgument("q must be at least 2 for the baseline to exist");
  if (!(discount >= 0.0 && discount <= 1.0)) throw InvalidArgument("discount must lie in [0, 1]");
}

State initial_state(const env::AcquisitionEnv& env, const AcquisitionConfig& cfg) {
  if (env.width() != cfg.width) throw InvalidArgument("environment width does not match config");
  ColumnMask mask = kspace::init_center_mask(cfg.width, cfg.initial_budget);
  env::Observation obs = env.evaluate(mask);
  return {std::move(mask), std::move(obs.image), obs.score};
}

State advance(const env::AcquisitionEnv& env, const State& state, int action) {
  ColumnMask mask = kspace::add_column(state.mask, action);
  env::Observation obs = env.evaluate(mask);
  return {std::move(mask), std::move(obs.image), obs.score};
}

double discounted_return(std::span<const double> rewards, std::size_t t, double gamma) {
  if (t >= rewards.size()) throw InvalidArgument("discounted_return: t beyond trajectory length");
  double acc = 0.0;
  for (std::size_t k = rewards.size(); k-- > t;) acc = rewards[k] + gamma * acc;
  return acc;
}

std::vector<double> greedy_weights(std::span<const double> rewards) {
  const std::size_t q = rewards.size();
  if (q < 2) throw InvalidArgument("greedy baseline needs q >= 2");
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(q);
  std::vector<double> w(q);
  for (std::size_t i = 0; i < q; ++i) w[i] = (rewards[i] - mean) / static_cast<double>(q - 1);
  return w;
}

std::vector<std::vector<double>> nongreedy_weights(const std::vector<std::vector<double>>& rewards,
                                                   double gamma) {
  const std::size_t q = rewards.size();
  if (q < 2) throw InvalidArgument("non-greedy baseline needs q >= 2");
  const std::size_t horizon = rewards.front().size();
  for (const auto& r : rewards)
    if (r.size() != horizon) throw InvalidArgument("trajectories differ in length");
  std::vector<double> baseline(horizon, 0.0);
  for (const auto& r : rewards)
    for (std::size_t t = 0; t < horizon; ++t) baseline[t] += r[t];
  for (double& b : baseline) b /= static_cast<double>(q);
  std::vector<std::vector<double>> w(q, std::vector<double>(horizon));
  for (std::size_t i = 0; i < q; ++i) {
    std::vector<double> adv(horizon);
    for (std::size_t t = 0; t < horizon; ++t) adv[t] = rewards[i][t] - baseline[t];
    double acc = 0.0;
    for (std::size_t t = horizon; t-- > 0;) {
      acc = adv[t] + gamma * acc;
      w[i][t] = acc / static_cast<double>(q - 1);
    }
  }
  return w;
}

// ---------------------------------------------------------------- greedy

GreedyStepRecord sample_greedy_step(const env::AcquisitionEnv& env, const State& state,
                                    const policy::PolicyNetwork& net, int q, Rng& rng) {
  GreedyStepRecord rec;
  const auto probs = net.forward(state.observation, state.mask);
  rec.actions = policy::sample_actions(probs, q, rng);
  rec.rewards.reserve(rec.actions.size());
  rec.next.reserve(rec.actions.size());
  for (int a : rec.actions) {
    State next = advance(env, state, a);
    rec.rewards.push_back(metrics::reward(state.score, next.score));
    rec.next.push_back(std::move(next));
  }
  rec.state = state;
  return rec;
}

void accumulate_greedy(const GreedyStepRecord& rec, const policy::PolicyNetwork& net, double scale,
                       policy::GradientBuffer& buf) {
  auto w = greedy_weights(rec.rewards);
  for (double& v : w) v *= scale;
  net.accumulate_log_prob_gradients(rec.state.observation, rec.state.mask, rec.actions, w, buf);
}

State greedy_step(const env::AcquisitionEnv& env, const State& state,
                  const policy::PolicyNetwork& net, const AcquisitionConfig& cfg, Rng& rng,
                  policy::GradientBuffer& buf, double scale) {
  GreedyStepRecord rec = sample_greedy_step(env, state, net, cfg.samples_per_step, rng);
  accumulate_greedy(rec, net, scale, buf);
  const auto pick = rng.below(rec.next.size());
  return std::move(rec.next[pick]);
}

// ---------------------------------------------------------------- non-greedy

std::vector<std::vector<double>> EpisodeResult::reward_table() const {
  std::vector<std::vector<double>> r;
  r.reserve(trajectories.size());
  for (const auto& tr : trajectories) {
    std::vector<double> row;
    row.reserve(tr.steps.size());
    for (const auto& s : tr.steps) row.push_back(s.reward);
    r.push_back(std::move(row));
  }
  return r;
}

EpisodeResult sample_nongreedy_episode(const env::AcquisitionEnv& env,
                                       const policy::PolicyNetwork& net,
                                       const AcquisitionConfig& cfg, Rng& rng) {
  const int q = cfg.samples_per_step;
  const int horizon = cfg.horizon();
  const State start = initial_state(env, cfg);
  EpisodeResult ep;
  ep.initial_score = start.score;
  ep.trajectories.resize(static_cast<std::size_t>(q));
  std::vector<State> states(static_cast<std::size_t>(q), start);
  std::vector<int> first_actions;
  if (horizon > 0) {
    const auto probs = net.forward(start.observation, start.mask);
    first_actions = policy::sample_actions(probs, q, rng);
  }
  for (int i = 0; i < q; ++i) {
    auto& tr = ep.trajectories[static_cast<std::size_t>(i)];
    tr.id = i + 1;
    State& s = states[static_cast<std::size_t>(i)];
    for (int t = 0; t < horizon; ++t) {
      const auto probs = net.forward(s.observation, s.mask);
      const int a = t == 0 ? first_actions[static_cast<std::size_t>(i)]
                           : policy::sample_actions(probs, 1, rng).front();
      State next = advance(env, s, a);
      tr.steps.push_back({s.mask, s.observation, a, std::log(probs[a]),
                          metrics::reward(s.score, next.score), next.score});
      s = std::move(next);
    }
    ep.final_masks.push_back(s.mask);
    ep.final_scores.push_back(s.score);
  }
  return ep;
}

void accumulate_nongreedy(const EpisodeResult& episode, const std::vector<std::vector<double>>& rewards,
                          const policy::PolicyNetwork& net, double gamma, double scale,
                          policy::GradientBuffer& buf) {
  if (rewards.size() != episode.trajectories.size()) {
    throw InvalidArgument("reward table does not match the episode");
  }
  if (episode.trajectories.empty() || episode.trajectories.front().steps.empty()) return;
  const auto w = nongreedy_weights(rewards, gamma);
  for (std::size_t i = 0; i < episode.trajectories.size(); ++i) {
    const auto& steps = episode.trajectories[i].steps;
    for (std::size_t t = 0; t < steps.size(); ++t) {
      net.accumulate_log_prob_gradient(steps[t].observation, steps[t].mask, steps[t].action,
                                       scale * w[i][t], buf);
    }
  }
}

EpisodeResult nongreedy_episode(const env::AcquisitionEnv& env, const policy::PolicyNetwork& net,
                                const AcquisitionConfig& cfg, Rng& rng, policy::GradientBuffer& buf,
                                double scale) {
  EpisodeResult ep = sample_nongreedy_episode(env, net, cfg, rng);
  accumulate_nongreedy(ep, ep.reward_table(), net, cfg.discount, scale, buf);
  return ep;
}

// ---------------------------------------------------------------- training

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  const auto count = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  for (std::size_t t = 0; t < count; ++t) threads.emplace_back(worker);
  for (auto& th : threads) th.join();
  if (failure) std::rethrow_exception(failure);
}

ItemOutcome run_item(const env::AcquisitionEnv& env, const policy::PolicyNetwork& net,
                     const AcquisitionConfig& cfg, Rng& rng, policy::GradientBuffer& buf,
                     double scale) {
  if (cfg.mode == Mode::greedy) {
    State s = initial_state(env, cfg);
    const double initial = s.score;
    for (int t = 0; t < cfg.horizon(); ++t) s = greedy_step(env, s, net, cfg, rng, buf, scale);
    return {initial, s.score};
  }
  const EpisodeResult ep = nongreedy_episode(env, net, cfg, rng, buf, scale);
  const double mean_final = std::accumulate(ep.final_scores.begin(), ep.final_scores.end(), 0.0) /
                            static_cast<double>(ep.final_scores.size());
  return {ep.initial_score, mean_final};
}

BatchGradient batch_gradient(std::span<const env::AcquisitionEnv* const> batch,
                             const policy::PolicyNetwork& net, const AcquisitionConfig& cfg,
                             std::uint64_t seed, int workers) {
  const double scale = batch.empty() ? 0.0 : 1.0 / static_cast<double>(batch.size());
  std::vector<policy::GradientBuffer> buffers(batch.size(), net.make_buffer());
  BatchGradient out{net.make_buffer(), std::vector<ItemOutcome>(batch.size())};
  parallel_for(batch.size(), workers, [&](std::size_t k) {
    Rng rng(derive_seed(seed, k));
    out.outcomes[k] = run_item(*batch[k], net, cfg, rng, buffers[k], scale);
  });
  for (const auto& b : buffers) out.buffer.merge(b);
  return out;
}

EpochStats train_epoch(std::span<const env::AcquisitionEnv* const> train, policy::PolicyNetwork& net,
                       const AcquisitionConfig& cfg, policy::OptimizerState& opt,
                       const TrainOptions& opts, std::uint64_t seed, int epoch) {
  cfg.validate();
  if (train.empty()) throw InvalidArgument("training set is empty");
  if (opts.batch_size < 1) throw InvalidArgument("batch size must be positive");
  const std::uint64_t epoch_seed = derive_seed(seed, static_cast<std::uint64_t>(epoch));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffle(derive_seed(epoch_seed, 0));
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

  EpochStats stats;
  const std::size_t bs = static_cast<std::size_t>(opts.batch_size);
  std::size_t batch_index = 0;
  for (std::size_t start = 0; start < order.size(); start += bs, ++batch_index) {
    std::vector<const env::AcquisitionEnv*> batch;
    for (std::size_t k = start; k < std::min(order.size(), start + bs); ++k) batch.push_back(train[order[k]]);
    BatchGradient g = batch_gradient(batch, net, cfg, derive_seed(epoch_seed, batch_index + 1), opts.workers);
    for (const auto& o : g.outcomes) {
      stats.mean_initial_ssim += o.initial_score;
      stats.mean_final_ssim += o.final_score;
    }
    if (cfg.horizon() > 0) {
      try {
        policy::optimizer_step(net, g.buffer, opt);
      } catch (const NumericalFailure& e) {
        throw NumericalFailure("epoch " + std::to_string(epoch) + " batch " +
                               std::to_string(batch_index) + ": " + e.what());
      }
      ++stats.optimizer_steps;
    }
  }
  const double n = static_cast<double>(train.size());
  stats.mean_initial_ssim /= n;
  stats.mean_final_ssim /= n;
  stats.mean_return = stats.mean_final_ssim - stats.mean_initial_ssim;
  return stats;
}

// ---------------------------------------------------------------- evaluation

Rollout policy_rollout(const env::AcquisitionEnv& env, const policy::PolicyNetwork& net,
                       const AcquisitionConfig& cfg, Rng& rng) {
  Rollout r{initial_state(env, cfg), {}};
  for (int t = 0; t < cfg.horizon(); ++t) {
    const auto probs = net.forward(r.final_state.observation, r.final_state.mask);
    const int a = policy::sample_actions(probs, 1, rng).front();
    r.actions.push_back(a);
    r.final_state = advance(env, r.final_state, a);
  }
  return r;
}

namespace {

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  // shifted by the first value so identical entries give exactly 0
  double s = 0.0, ss = 0.0;
  for (double x : v) {
    s += x - v.front();
    ss += (x - v.front()) * (x - v.front());
  }
  const double n = static_cast<double>(v.size());
  return std::sqrt(std::max(0.0, (ss - s * s / n) / (n - 1)));
}

}  // namespace

EvalResult summarize(const std::vector<std::vector<double>>& finals) {
  EvalResult r;
  for (const auto& per : finals) {
    const double m = std::accumulate(per.begin(), per.end(), 0.0) / static_cast<double>(per.size());
    r.per_image_mean.push_back(m);
    r.per_image_std.push_back(sample_std(per));
    r.all_finals.insert(r.all_finals.end(), per.begin(), per.end());
  }
  if (finals.empty()) return r;
  const double n = static_cast<double>(finals.size());
  r.mean = std::accumulate(r.per_image_mean.begin(), r.per_image_mean.end(), 0.0) / n;
  r.std_over_images = sample_std(r.per_image_mean);
  r.mean_trajectory_std = std::accumulate(r.per_image_std.begin(), r.per_image_std.end(), 0.0) / n;
  return r;
}

EvalResult evaluate(std::span<const env::AcquisitionEnv* const> items,
                    const policy::PolicyNetwork& net, const AcquisitionConfig& cfg, int q_eval,
                    std::uint64_t seed, int workers) {
  if (q_eval < 1) throw InvalidArgument("q_eval must be positive");
  std::vector<std::vector<double>> finals(items.size());
  parallel_for(items.size(), workers, [&](std::size_t k) {
    Rng rng(derive_seed(seed, k));
    for (int j = 0; j < q_eval; ++j) finals[k].push_back(policy_rollout(*items[k], net, cfg, rng).final_state.score);
  });
  return summarize(finals);
}

}  // namespace kspg::estimators
