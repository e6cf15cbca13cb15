#include <doctest.h>

#include <cmath>
#include <numeric>

#include "kspg/baselines.hpp"
#include "kspg/datagen.hpp"
#include "kspg/errors.hpp"
#include "kspg/estimators.hpp"
#include "kspg/kspace.hpp"
#include "kspg/recon.hpp"
#include "support.hpp"

using namespace kspg;
using estimators::AcquisitionConfig;
using estimators::Mode;

namespace {

AcquisitionConfig config(int w, int l, int m, int q, Mode mode, double gamma = 1.0) {
  AcquisitionConfig c;
  c.width = w;
  c.initial_budget = l;
  c.total_budget = m;
  c.samples_per_step = q;
  c.mode = mode;
  c.discount = gamma;
  return c;
}

struct PhantomSet {
  data::Dataset ds;
  std::vector<std::unique_ptr<env::KSpaceEnv>> owned;
  std::vector<const env::AcquisitionEnv*> envs;

  PhantomSet(int count, int size, std::uint64_t seed) : ds(data::generate_phantoms(count, size, seed)) {
    for (const auto& it : ds.items) {
      owned.push_back(std::make_unique<env::KSpaceEnv>(it, recon::Reconstructor::zero_filled(), metrics::SsimConfig{}));
      envs.push_back(owned.back().get());
    }
  }
};

// Final dense layer zeroed, then a steep bias ramp so the policy always picks
// the lowest unmeasured column.
policy::PolicyNetwork lowest_column_net(int side) {
  policy::PolicyNetwork net(policy::Architecture::tiny(side, side), 3);
  const auto w = net.final_dense_weights();
  const auto b = net.final_dense_bias();
  for (std::size_t i = 0; i < w.size; ++i) net.parameters()[w.offset + i] = 0.0;
  for (std::size_t i = 0; i < b.size; ++i) net.parameters()[b.offset + i] = -200.0 * static_cast<double>(i);
  return net;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(config(8, 2, 4, 2, Mode::greedy).validate());
  CHECK_NOTHROW(config(8, 2, 2, 2, Mode::greedy).validate());
  CHECK_THROWS_AS(config(8, 2, 4, 1, Mode::greedy).validate(), InvalidArgument);
  CHECK_THROWS_AS(config(8, 4, 2, 2, Mode::greedy).validate(), InvalidArgument);
  CHECK_THROWS_AS(config(8, 2, 9, 2, Mode::greedy).validate(), InvalidArgument);
  CHECK_THROWS_AS(config(8, 2, 4, 2, Mode::nongreedy, 1.5).validate(), InvalidArgument);
  CHECK(estimators::parse_mode("nongreedy") == Mode::nongreedy);
  CHECK_THROWS_AS(estimators::parse_mode("greedyish"), InvalidArgument);
}

TEST_CASE("discounted return") {
  const std::vector<double> ones{1, 1, 1};
  CHECK(estimators::discounted_return(ones, 0, 0.5) == doctest::Approx(1.75).epsilon(1e-15));
  const std::vector<double> r{0.3, -0.1, 0.25};
  CHECK(estimators::discounted_return(r, 1, 0.0) == -0.1);
  CHECK(estimators::discounted_return(r, 1, 1.0) == doctest::Approx(0.15).epsilon(1e-15));
}

TEST_CASE("greedy weights") {
  const std::vector<double> r{0.3, 0.1, 0.2};
  const auto w = estimators::greedy_weights(r);
  CHECK(w[0] == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(-0.05).epsilon(1e-12));
  CHECK(std::abs(w[2]) < 1e-15);
  const std::vector<double> same{0.4, 0.4, 0.4, 0.4};
  for (double v : estimators::greedy_weights(same)) CHECK(v == 0.0);
}

TEST_CASE("non-greedy weights by hand") {
  // q = 2, T = 2, gamma = 0.5
  const std::vector<std::vector<double>> r{{0.2, 0.4}, {0.0, 0.2}};
  const auto w = estimators::nongreedy_weights(r, 0.5);
  CHECK(w[0][0] == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(w[0][1] == doctest::Approx(0.10).epsilon(1e-12));
  CHECK(w[1][0] == doctest::Approx(-0.15).epsilon(1e-12));
  CHECK(w[1][1] == doctest::Approx(-0.10).epsilon(1e-12));

  // gamma = 0 reduces to the per-step advantage
  const std::vector<std::vector<double>> r3{{0.1, 0.5, 0.2}, {0.4, 0.1, 0.0}, {0.1, 0.3, 0.7}};
  const auto w0 = estimators::nongreedy_weights(r3, 0.0);
  for (int t = 0; t < 3; ++t) {
    const double mean = (r3[0][t] + r3[1][t] + r3[2][t]) / 3;
    for (int i = 0; i < 3; ++i) CHECK(w0[i][t] == doctest::Approx((r3[i][t] - mean) / 2).epsilon(1e-12));
  }
}

TEST_CASE("equal rewards leave the buffer untouched") {
  Rng rng(1);
  const auto net = testing::small_net(8, 1);
  const env::ScoredMaskEnv flat(testing::random_image(8, 8, rng), 8, [](const ColumnMask&) { return 0.5; });
  for (Mode mode : {Mode::greedy, Mode::nongreedy}) {
    const auto cfg = config(8, 2, 5, 4, mode);
    auto buf = net.make_buffer();
    estimators::run_item(flat, net, cfg, rng, buf, 1.0);
    for (double v : buf.accum) CHECK(v == 0.0);
  }
}

TEST_CASE("rewards shifted by a constant give the same gradient") {
  Rng rng(2);
  const auto net = testing::small_net(8, 2);
  const Image obs = testing::random_image(8, 8, rng);
  const auto e = testing::column_value_env(obs, {0.1, 0.5, 0.2, 0.0, 0.0, 0.3, 0.05, 0.4});

  const auto gcfg = config(8, 2, 5, 4, Mode::greedy);
  const auto rec = estimators::sample_greedy_step(e, estimators::initial_state(e, gcfg), net, 4, rng);
  auto shifted = rec;
  for (double& r : shifted.rewards) r += 0.37;
  auto b1 = net.make_buffer(), b2 = net.make_buffer();
  estimators::accumulate_greedy(rec, net, 1.0, b1);
  estimators::accumulate_greedy(shifted, net, 1.0, b2);
  double diff = 0.0;
  for (std::size_t i = 0; i < b1.accum.size(); ++i) diff += std::pow(b1.accum[i] - b2.accum[i], 2);
  CHECK(std::sqrt(diff) < 1e-12);

  const auto ncfg = config(8, 2, 6, 4, Mode::nongreedy, 0.8);
  const auto ep = estimators::sample_nongreedy_episode(e, net, ncfg, rng);
  const auto table = ep.reward_table();
  for (int t = 0; t < ncfg.horizon(); ++t) {
    auto moved = table;
    for (auto& row : moved) row[t] -= 1.25;
    auto c1 = net.make_buffer(), c2 = net.make_buffer();
    estimators::accumulate_nongreedy(ep, table, net, 0.8, 1.0, c1);
    estimators::accumulate_nongreedy(ep, moved, net, 0.8, 1.0, c2);
    double d = 0.0;
    for (std::size_t i = 0; i < c1.accum.size(); ++i) d += std::pow(c1.accum[i] - c2.accum[i], 2);
    CHECK(std::sqrt(d) < 1e-12);
  }
}

TEST_CASE("non-greedy episode structure") {
  Rng rng(3);
  const auto net = testing::small_net(8, 3);
  const auto e = testing::column_value_env(testing::random_image(8, 8, rng), {0.1, 0.5, 0.2, 0.0, 0.0, 0.3, 0.05, 0.4});
  const auto cfg = config(8, 2, 6, 3, Mode::nongreedy);
  const auto ep = estimators::sample_nongreedy_episode(e, net, cfg, rng);
  CHECK(ep.trajectories.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(ep.trajectories[i].steps.size() == 4);
    CHECK(ep.final_masks[i].count() == 6);
    double sum = 0.0;
    for (const auto& s : ep.trajectories[i].steps) sum += s.reward;
    CHECK(std::abs(sum - (ep.final_scores[i] - ep.initial_score)) < 1e-12);
  }
}

TEST_CASE("one-step estimators are unbiased") {
  Rng rng(4);
  const auto net = testing::small_net(6, 4);
  const Image obs = testing::random_image(8, 8, rng);
  const std::vector<double> values{0.3, 0.05, 0.0, 0.0, 0.6, 0.2};
  const auto e = testing::column_value_env(obs, values);
  const ColumnMask start = kspace::init_center_mask(6, 2);

  // exact gradient by enumeration
  const auto p = net.forward(obs, start);
  double mean_r = 0.0;
  for (int a : start.unmeasured()) mean_r += p[a] * values[a];
  auto exact = net.make_buffer();
  for (int a : start.unmeasured()) net.accumulate_log_prob_gradient(obs, start, a, p[a] * (values[a] - mean_r), exact);

  for (Mode mode : {Mode::greedy, Mode::nongreedy}) {
    const auto cfg = config(6, 2, 3, 4, mode);
    const int n = 4000;
    std::vector<double> sum(exact.accum.size(), 0.0), sq(exact.accum.size(), 0.0);
    for (int k = 0; k < n; ++k) {
      auto buf = net.make_buffer();
      estimators::run_item(e, net, cfg, rng, buf, 1.0);
      for (std::size_t i = 0; i < sum.size(); ++i) {
        sum[i] += buf.accum[i];
        sq[i] += buf.accum[i] * buf.accum[i];
      }
    }
    int bad = 0;
    for (std::size_t i = 0; i < sum.size(); ++i) {
      const double m = sum[i] / n;
      const double se = std::sqrt(std::max(0.0, sq[i] / n - m * m) / (n - 1));
      if (std::abs(m - exact.accum[i]) > 4 * se + 1e-12) ++bad;
    }
    CHECK(bad == 0);
  }
}

TEST_CASE("zero horizon does nothing") {
  PhantomSet ps(4, 16, 5);
  policy::PolicyNetwork net(policy::Architecture::tiny(16, 16), 5);
  const std::vector<double> before(net.parameters().begin(), net.parameters().end());
  policy::OptimizerState opt(net.parameter_count(), 1e-3);
  const auto cfg = config(16, 4, 4, 2, Mode::greedy);
  const auto stats = estimators::train_epoch(ps.envs, net, cfg, opt, {2, 1}, 1, 1);
  CHECK(stats.optimizer_steps == 0);
  CHECK(stats.mean_return == 0.0);
  double init = 0.0;
  for (const auto* e : ps.envs) init += estimators::initial_state(*e, cfg).score;
  CHECK(stats.mean_final_ssim == doctest::Approx(init / 4).epsilon(1e-15));
  CHECK(std::equal(before.begin(), before.end(), net.parameters().begin()));
}

TEST_CASE("training is deterministic and worker-count invariant") {
  PhantomSet ps(6, 16, 6);
  for (Mode mode : {Mode::greedy, Mode::nongreedy}) {
    const auto cfg = config(16, 4, 7, 3, mode);
    std::vector<std::vector<double>> finals;
    for (int workers : {1, 1, 3}) {
      policy::PolicyNetwork net(policy::Architecture::tiny(16, 16), 7);
      policy::OptimizerState opt(net.parameter_count(), 1e-3);
      estimators::train_epoch(ps.envs, net, cfg, opt, {4, workers}, 11, 1);
      finals.emplace_back(net.parameters().begin(), net.parameters().end());
    }
    CHECK(finals[0] == finals[1]);
    CHECK(finals[0] == finals[2]);
  }

  // single image
  std::vector<const env::AcquisitionEnv*> one{ps.envs[0]};
  std::vector<std::vector<double>> runs;
  for (int k = 0; k < 2; ++k) {
    policy::PolicyNetwork net(policy::Architecture::tiny(16, 16), 8);
    policy::OptimizerState opt(net.parameter_count(), 1e-3);
    estimators::train_epoch(one, net, config(16, 4, 8, 4, Mode::greedy), opt, {16, 1}, 12, 1);
    runs.emplace_back(net.parameters().begin(), net.parameters().end());
  }
  CHECK(runs[0] == runs[1]);
}

TEST_CASE("evaluation") {
  PhantomSet ps(5, 16, 9);
  const auto det = lowest_column_net(16);
  const auto r = estimators::evaluate(ps.envs, det, config(16, 4, 8, 2, Mode::greedy), 6, 1);
  CHECK(r.mean_trajectory_std == 0.0);
  for (double s : r.per_image_std) CHECK(s == 0.0);

  const auto full = estimators::evaluate(ps.envs, det, config(16, 4, 16, 2, Mode::greedy), 3, 2);
  for (double v : full.all_finals) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));

  const auto s = estimators::summarize({{1.0, 3.0}, {2.0, 2.0}, {3.0, 4.0}});
  CHECK(s.per_image_mean == std::vector<double>{2.0, 2.0, 3.5});
  CHECK(s.mean == doctest::Approx(7.5 / 3));
  CHECK(s.mean_trajectory_std == doctest::Approx((std::sqrt(2.0) + 0 + std::sqrt(0.5)) / 3));
}

TEST_CASE("uniform policy matches the random baseline") {
  PhantomSet ps(100, 16, 10);
  policy::PolicyNetwork net(policy::Architecture::tiny(16, 16), 1);
  for (auto range : {net.final_dense_weights(), net.final_dense_bias()})
    for (std::size_t i = 0; i < range.size; ++i) net.parameters()[range.offset + i] = 0.0;
  const auto cfg = config(16, 2, 6, 2, Mode::greedy);
  const auto pol = estimators::evaluate(ps.envs, net, cfg, 1, 21);
  std::vector<double> rnd;
  for (std::size_t i = 0; i < ps.envs.size(); ++i) {
    Rng rng(derive_seed(22, i));
    const auto sched = baselines::random_schedule(16, 2, 4, rng);
    rnd.push_back(baselines::schedule_final_score(*ps.envs[i], cfg, sched));
  }
  const double m = std::accumulate(rnd.begin(), rnd.end(), 0.0) / 100;
  double ss = 0.0;
  for (double v : rnd) ss += (v - m) * (v - m);
  const double sd = std::sqrt(ss / 99);
  const double pooled_se = std::sqrt(pol.std_over_images * pol.std_over_images / 100 + sd * sd / 100);
  CHECK(std::abs(pol.mean - m) < 3 * pooled_se);
}
