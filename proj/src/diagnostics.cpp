#include "kspg/diagnostics.hpp"

#include <cmath>
#include <numeric>

#include "kspg/errors.hpp"

namespace kspg::diagnostics {

namespace {

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

void check_nonempty(const PolicySnapshot& snap) {
  if (snap.policies.empty()) throw InvalidArgument("policy snapshot is empty");
}

}  // namespace

double marginal_entropy(const PolicySnapshot& snap) {
  check_nonempty(snap);
  std::vector<double> avg(snap.policies.front().size(), 0.0);
  for (const auto& p : snap.policies) {
    if (p.size() != avg.size()) throw InvalidArgument("policies differ in width");
    for (std::size_t j = 0; j < p.size(); ++j) avg[j] += p[j];
  }
  for (double& v : avg) v /= static_cast<double>(snap.policies.size());
  return entropy(avg);
}

double conditional_entropy(const PolicySnapshot& snap) {
  check_nonempty(snap);
  double h = 0.0;
  for (const auto& p : snap.policies) h += entropy(p);
  return h / static_cast<double>(snap.policies.size());
}

double mutual_information(const PolicySnapshot& snap) {
  return marginal_entropy(snap) - conditional_entropy(snap);
}

std::vector<PolicySnapshot> gather_snapshots(std::span<const env::AcquisitionEnv* const> items,
                                             const policy::PolicyNetwork& net,
                                             const estimators::AcquisitionConfig& cfg,
                                             int replicates, std::uint64_t seed, int workers) {
  if (items.empty()) throw InvalidArgument("no items to snapshot");
  if (replicates < 1) throw InvalidArgument("need at least one replicate");
  const int horizon = cfg.horizon();
  const std::size_t states = items.size() * static_cast<std::size_t>(replicates);
  std::vector<PolicySnapshot> snaps(static_cast<std::size_t>(horizon));
  for (int t = 0; t < horizon; ++t) {
    snaps[t] = {t, static_cast<int>(items.size()), replicates,
                std::vector<std::vector<double>>(states)};
  }
  estimators::parallel_for(items.size(), workers, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    for (int j = 0; j < replicates; ++j) {
      estimators::State s = estimators::initial_state(*items[i], cfg);
      for (int t = 0; t < horizon; ++t) {
        auto probs = net.forward(s.observation, s.mask);
        const int a = policy::sample_actions(probs, 1, rng).front();
        snaps[t].policies[i * replicates + j] = std::move(probs);
        s = estimators::advance(*items[i], s, a);
      }
    }
  });
  return snaps;
}

double mean_mutual_information(std::span<const PolicySnapshot> snaps) {
  if (snaps.empty()) throw InvalidArgument("no snapshots");
  double total = 0.0;
  for (const auto& s : snaps) total += mutual_information(s);
  return total / static_cast<double>(snaps.size());
}

double bootstrap_mi_std(std::span<const PolicySnapshot> snaps, int resamples, std::uint64_t seed) {
  if (snaps.empty()) throw InvalidArgument("no snapshots");
  if (resamples < 2) throw InvalidArgument("need at least two bootstrap resamples");
  const int n = snaps.front().images;
  const int reps = snaps.front().replicates;
  Rng rng(seed);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(resamples));
  std::vector<PolicySnapshot> boot(snaps.size());
  for (int b = 0; b < resamples; ++b) {
    std::vector<std::size_t> pick(static_cast<std::size_t>(n));
    for (auto& p : pick) p = rng.below(static_cast<std::uint64_t>(n));
    for (std::size_t t = 0; t < snaps.size(); ++t) {
      boot[t] = {snaps[t].step, n, reps, {}};
      boot[t].policies.reserve(static_cast<std::size_t>(n) * reps);
      for (std::size_t p : pick)
        for (int j = 0; j < reps; ++j) boot[t].policies.push_back(snaps[t].policies[p * reps + j]);
    }
    values.push_back(mean_mutual_information(boot));
  }
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / resamples;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (resamples - 1));
}

double gradient_snr(const std::vector<std::vector<double>>& gradients) {
  const std::size_t b = gradients.size();
  if (b < 2) throw InvalidArgument("SNR needs at least two batch gradients");
  const std::size_t dim = gradients.front().size();
  std::vector<double> mu(dim, 0.0);
  for (const auto& g : gradients) {
    if (g.size() != dim) throw InvalidArgument("batch gradients differ in length");
    for (std::size_t k = 0; k < dim; ++k) mu[k] += g[k];
  }
  for (double& m : mu) m /= static_cast<double>(b);
  double mu_sq = 0.0, var_sum = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    double ss = 0.0;
    for (const auto& g : gradients) ss += (g[k] - mu[k]) * (g[k] - mu[k]);
    var_sum += ss / (static_cast<double>(b) * static_cast<double>(b - 1));
    mu_sq += mu[k] * mu[k];
  }
  if (var_sum == 0.0) throw DegenerateVariance("all batch gradients are identical");
  return std::sqrt(mu_sq) / std::sqrt(var_sum);
}

SnrEstimate measure_gradient_snr(std::span<const env::AcquisitionEnv* const> train,
                                 const policy::PolicyNetwork& net,
                                 const estimators::AcquisitionConfig& cfg, int batches,
                                 int batch_size, std::uint64_t seed, int workers) {
  if (train.empty()) throw InvalidArgument("training set is empty");
  if (batches < 2 || batch_size < 1) throw InvalidArgument("need B >= 2 batches of positive size");
  const auto range = net.final_dense_weights();
  SnrEstimate est;
  est.batches = batches;
  est.samples_per_step = cfg.samples_per_step;
  std::vector<std::size_t> order(train.size());
  std::size_t cursor = order.size();
  std::uint64_t pass = 0;
  Rng shuffle(derive_seed(seed, 0));
  for (int b = 0; b < batches; ++b) {
    std::vector<const env::AcquisitionEnv*> batch;
    while (static_cast<int>(batch.size()) < batch_size) {
      if (cursor == order.size()) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);
        cursor = 0;
        ++pass;
      }
      batch.push_back(train[order[cursor++]]);
    }
    const auto g = estimators::batch_gradient(batch, net, cfg,
                                              derive_seed(seed, static_cast<std::uint64_t>(b) + 1), workers);
    est.gradients.emplace_back(g.buffer.accum.begin() + static_cast<std::ptrdiff_t>(range.offset),
                               g.buffer.accum.begin() + static_cast<std::ptrdiff_t>(range.offset + range.size));
  }
  est.snr = gradient_snr(est.gradients);
  return est;
}

}  // namespace kspg::diagnostics
