#include "kspg/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <regex>
#include <sstream>

#include "kspg/baselines.hpp"
#include "kspg/checkpoint.hpp"
#include "kspg/diagnostics.hpp"
#include "kspg/errors.hpp"
#include "kspg/kspace.hpp"
#include "kspg/recon.hpp"

#ifndef KSPG_VERSION
#define KSPG_VERSION "unknown"
#endif

namespace kspg::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quote(const std::string& s) { return '"' + s + '"'; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  f.close();
  if (!f) throw IoError("cannot write " + path.string());
}

data::Split parse_split(const std::string& name) {
  if (name == "train") return data::Split::train;
  if (name == "val") return data::Split::val;
  if (name == "test") return data::Split::test;
  throw InvalidArgument("unknown split '" + name + "'");
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

// ---------------------------------------------------------------- config

estimators::AcquisitionConfig RunConfig::acquisition() const {
  estimators::AcquisitionConfig a;
  a.width = width;
  a.initial_budget = initial_budget;
  a.total_budget = total_budget;
  a.samples_per_step = samples_per_step;
  a.discount = discount;
  a.mode = estimators::parse_mode(mode);
  return a;
}

metrics::SsimConfig RunConfig::ssim() const {
  metrics::SsimConfig s;
  s.window = metrics::parse_ssim_window(window);
  return s;
}

policy::LrSchedule RunConfig::schedule() const {
  if (lr_schedule == "auto") {
    return estimators::parse_mode(mode) == estimators::Mode::greedy ? policy::LrSchedule::greedy_schedule
                                                                    : policy::LrSchedule::nongreedy_schedule;
  }
  return policy::parse_lr_schedule(lr_schedule);
}

policy::Architecture RunConfig::architecture() const {
  policy::Architecture a;
  if (arch == "desk") {
    a = policy::Architecture::desk_default(width, width);
  } else if (arch == "tiny") {
    a = policy::Architecture::tiny(width, width);
  } else {
    a = policy::Architecture::parse(arch);
  }
  if (a.input_height != width || a.input_width != width || a.width() != width)
    throw InvalidArgument("architecture '" + arch + "' does not match width " + std::to_string(width));
  return a;
}

void validate(const RunConfig& cfg, bool discount_given) {
  const auto acq = cfg.acquisition();
  if (cfg.total_budget <= cfg.initial_budget)
    throw InvalidArgument("total budget M must exceed initial budget L");
  if (discount_given && acq.mode == estimators::Mode::greedy)
    throw InvalidArgument("gamma is only meaningful in nongreedy mode");
  acq.validate();
  cfg.ssim().validate();
  (void)cfg.schedule();
  if (cfg.width < Image::kMinSide) throw InvalidArgument("width must be at least 8");
  (void)cfg.architecture();
  if (cfg.eval_samples < 1) throw InvalidArgument("q_eval must be positive");
  if (cfg.count < 3) throw InvalidArgument("count must be at least 3");
  if (!(cfg.train_fraction > 0) || !(cfg.val_fraction > 0) || !(cfg.test_fraction > 0))
    throw InvalidArgument("split fractions must be positive");
  if (cfg.epochs < 1) throw InvalidArgument("epochs must be positive");
  if (cfg.batch_size < 1) throw InvalidArgument("batch_size must be positive");
  if (!(cfg.learning_rate > 0) || !std::isfinite(cfg.learning_rate))
    throw InvalidArgument("learning rate must be positive");
  if (cfg.workers < 1) throw InvalidArgument("workers must be positive");
  if (cfg.snr_batches < 2) throw InvalidArgument("snr_batches must be at least 2");
  if (cfg.bootstrap < 2) throw InvalidArgument("bootstrap must be at least 2");
  (void)parse_split(cfg.oracle_split);
  if (cfg.out.empty()) throw InvalidArgument("output directory must be set");
}

std::string serialize(const RunConfig& c) {
  std::ostringstream o;
  o << "mode = " << quote(c.mode) << '\n'
    << "width = " << c.width << '\n'
    << "L = " << c.initial_budget << '\n'
    << "M = " << c.total_budget << '\n'
    << "q = " << c.samples_per_step << '\n';
  if (c.mode != "greedy") o << "gamma = " << num(c.discount) << '\n';
  o << "q_eval = " << c.eval_samples << '\n'
    << "data = " << quote(c.data) << '\n'
    << "count = " << c.count << '\n'
    << "data_seed = " << c.data_seed << '\n'
    << "train_fraction = " << num(c.train_fraction) << '\n'
    << "val_fraction = " << num(c.val_fraction) << '\n'
    << "test_fraction = " << num(c.test_fraction) << '\n'
    << "window = " << quote(c.window) << '\n'
    << "recon = " << quote(c.recon) << '\n'
    << "arch = " << quote(c.arch) << '\n'
    << "epochs = " << c.epochs << '\n'
    << "batch_size = " << c.batch_size << '\n'
    << "lr = " << num(c.learning_rate) << '\n'
    << "lr_schedule = " << quote(c.lr_schedule) << '\n'
    << "seed = " << c.seed << '\n'
    << "workers = " << c.workers << '\n'
    << "out = " << quote(c.out) << '\n'
    << "snr_batches = " << c.snr_batches << '\n'
    << "bootstrap = " << c.bootstrap << '\n'
    << "oracle_split = " << quote(c.oracle_split) << '\n';
  if (!c.baseline.empty()) o << "baseline = " << quote(c.baseline) << '\n';
  if (!c.checkpoints.empty()) {
    o << "checkpoint = [";
    for (std::size_t i = 0; i < c.checkpoints.size(); ++i) o << (i ? ", " : "") << quote(c.checkpoints[i]);
    o << "]\n";
  }
  return o.str();
}

Seeds::Seeds(std::uint64_t seed)
    : init(derive_seed(seed, 1)),
      train(derive_seed(seed, 2)),
      eval(derive_seed(seed, 3)),
      diagnostics(derive_seed(seed, 4)),
      baseline(derive_seed(seed, 5)),
      bootstrap(derive_seed(seed, 6)) {}

// ---------------------------------------------------------------- workspace

std::vector<const env::AcquisitionEnv*> Workspace::split(data::Split s) const {
  std::vector<const env::AcquisitionEnv*> out;
  for (std::size_t i = 0; i < envs.size(); ++i)
    if (dataset.items[i].split == s) out.push_back(envs[i].get());
  return out;
}

Workspace build_workspace(const RunConfig& cfg) {
  Workspace ws;
  data::Dataset ds = cfg.data == "generate" ? data::generate_phantoms(cfg.count, cfg.width, cfg.data_seed)
                                            : data::load_pgm_dataset(cfg.data);
  const Image& first = ds.items.front().image;
  if (first.width() != cfg.width || first.height() != cfg.width)
    throw InvalidArgument("dataset images are " + std::to_string(first.height()) + "x" +
                          std::to_string(first.width()) + ", expected " + std::to_string(cfg.width) +
                          "x" + std::to_string(cfg.width));
  ws.dataset = data::split_dataset(std::move(ds), {cfg.train_fraction, cfg.val_fraction, cfg.test_fraction},
                                   derive_seed(mix_seed(cfg.data_seed), 0));
  const auto recon = cfg.recon == "zero_filled" ? recon::Reconstructor::zero_filled()
                                                : recon::Reconstructor::external_table(cfg.recon);
  const auto ssim = cfg.ssim();
  for (const auto& item : ws.dataset.items) ws.envs.push_back(std::make_unique<env::KSpaceEnv>(item, recon, ssim));
  return ws;
}

// ---------------------------------------------------------------- commands

namespace {

struct Context {
  RunConfig cfg;
  Seeds seeds;
  fs::path dir;
  std::ostream& out;
};

void write_run_metadata(const Context& c, const std::string& command) {
  fs::create_directories(c.dir);
  write_text(c.dir / "config.txt", "# kspg " + command + "\n" + serialize(c.cfg));
  std::ostringstream s;
  s << "seed = " << c.cfg.seed << '\n'
    << "data_seed = " << c.cfg.data_seed << '\n'
    << "init = " << c.seeds.init << '\n'
    << "train = " << c.seeds.train << '\n'
    << "eval = " << c.seeds.eval << '\n'
    << "diagnostics = " << c.seeds.diagnostics << '\n'
    << "baseline = " << c.seeds.baseline << '\n'
    << "bootstrap = " << c.seeds.bootstrap << '\n';
  write_text(c.dir / "seeds.txt", s.str());
  write_text(c.dir / "version.txt", std::string(KSPG_VERSION) + "\n");
}

std::string checkpoint_name(int epoch) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "epoch_%02d.kgpn", epoch);
  return buf;
}

policy::PolicyNetwork load_net(const RunConfig& cfg, const std::string& path) {
  auto ck = policy::load_checkpoint(path);
  const auto& a = ck.net.architecture();
  if (a.width() != cfg.width || a.input_width != cfg.width || a.input_height != cfg.width)
    throw InvalidArgument("checkpoint " + path + " does not match width " + std::to_string(cfg.width));
  return std::move(ck.net);
}

void require_checkpoint(const RunConfig& cfg) {
  if (cfg.checkpoints.empty()) throw InvalidArgument("--checkpoint is required");
}

std::vector<double> initial_scores(std::span<const env::AcquisitionEnv* const> items,
                                   const estimators::AcquisitionConfig& acq) {
  std::vector<double> s;
  for (const auto* e : items) s.push_back(estimators::initial_state(*e, acq).score);
  return s;
}

int cmd_train(Context& c) {
  const auto acq = c.cfg.acquisition();
  const auto arch = c.cfg.architecture();
  write_run_metadata(c, "train");
  const Workspace ws = build_workspace(c.cfg);
  const auto train = ws.split(data::Split::train);
  const auto val = ws.split(data::Split::val);
  const auto test = ws.split(data::Split::test);
  data::write_manifest(ws.dataset, c.dir / "manifest.csv");

  policy::PolicyNetwork net(arch, c.seeds.init);
  policy::OptimizerState opt(net.parameter_count(), c.cfg.learning_rate);
  const auto schedule = c.cfg.schedule();
  const double val_initial = mean_of(initial_scores(val, acq));

  std::ofstream metrics(c.dir / "metrics.csv", std::ios::binary);
  metrics << "epoch,split,mean_ssim,mean_return,wall_seconds\n";
  for (int epoch = 1; epoch <= c.cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    policy::decay_learning_rate(opt, schedule, epoch);
    const auto stats = estimators::train_epoch(train, net, acq, opt, {c.cfg.batch_size, c.cfg.workers},
                                               c.seeds.train, epoch);
    const auto t1 = std::chrono::steady_clock::now();
    const auto v = estimators::evaluate(val, net, acq, c.cfg.eval_samples,
                                        derive_seed(c.seeds.eval, static_cast<std::uint64_t>(epoch)),
                                        c.cfg.workers);
    const auto t2 = std::chrono::steady_clock::now();
    policy::save_checkpoint(c.dir / checkpoint_name(epoch), net, opt);
    const double tw = std::chrono::duration<double>(t1 - t0).count();
    const double vw = std::chrono::duration<double>(t2 - t1).count();
    metrics << epoch << ",train," << num(stats.mean_final_ssim) << ',' << num(stats.mean_return) << ','
            << num(tw) << '\n'
            << epoch << ",val," << num(v.mean) << ',' << num(v.mean - val_initial) << ',' << num(vw) << '\n';
    metrics.flush();
    if (!metrics) throw IoError("cannot write metrics.csv");
    c.out << "epoch " << epoch << " train_ssim " << num(stats.mean_final_ssim) << " val_ssim " << num(v.mean)
          << '\n';
  }
  metrics.close();
  if (!metrics) throw IoError("cannot write metrics.csv");

  const auto t = estimators::evaluate(test, net, acq, c.cfg.eval_samples, c.seeds.eval, c.cfg.workers);
  std::ostringstream csv;
  csv << "split,mean_ssim,std_over_images,mean_trajectory_std,images,q_eval\n"
      << "test," << num(t.mean) << ',' << num(t.std_over_images) << ',' << num(t.mean_trajectory_std) << ','
      << test.size() << ',' << c.cfg.eval_samples << '\n';
  write_text(c.dir / "test_eval.csv", csv.str());
  c.out << "test mean_ssim " << num(t.mean) << " std_over_images " << num(t.std_over_images) << '\n';
  return 0;
}

int cmd_eval(Context& c) {
  require_checkpoint(c.cfg);
  const auto acq = c.cfg.acquisition();
  write_run_metadata(c, "eval");
  const Workspace ws = build_workspace(c.cfg);
  const auto test = ws.split(data::Split::test);
  std::ostringstream csv;
  csv << "checkpoint,mean_ssim,std_over_images,mean_trajectory_std\n";
  std::vector<double> means;
  for (const auto& path : c.cfg.checkpoints) {
    const auto net = load_net(c.cfg, path);
    const auto r = estimators::evaluate(test, net, acq, c.cfg.eval_samples, c.seeds.eval, c.cfg.workers);
    csv << quote(path) << ',' << num(r.mean) << ',' << num(r.std_over_images) << ','
        << num(r.mean_trajectory_std) << '\n';
    means.push_back(r.mean);
  }
  write_text(c.dir / "eval.csv", csv.str());
  const double m = mean_of(means), s = sample_std(means);
  write_text(c.dir / "eval_summary.csv",
             "runs,mean_ssim,std_over_runs\n" + std::to_string(means.size()) + ',' + num(m) + ',' + num(s) + '\n');
  c.out << "mean_ssim " << num(m) << " +- " << num(s) << " over " << means.size() << " run(s)\n";
  return 0;
}

int cmd_oracle(Context& c) {
  const auto acq = c.cfg.acquisition();
  write_run_metadata(c, "oracle");
  const Workspace ws = build_workspace(c.cfg);
  const auto test = ws.split(data::Split::test);
  const auto fit = ws.split(parse_split(c.cfg.oracle_split));
  const int T = acq.horizon();

  std::vector<std::pair<std::string, std::vector<double>>> rows;
  auto score_all = [&](const std::string& name, auto&& fn) {
    std::vector<double> v(test.size());
    estimators::parallel_for(test.size(), c.cfg.workers, [&](std::size_t i) { v[i] = fn(i); });
    rows.emplace_back(name, std::move(v));
  };
  score_all("random", [&](std::size_t i) {
    Rng rng(derive_seed(c.seeds.baseline, i));
    const auto s = baselines::random_schedule(acq.width, acq.initial_budget, T, rng);
    return baselines::schedule_final_score(*test[i], acq, s);
  });
  const auto one = baselines::equispaced_schedule(acq.width, acq.initial_budget, T, baselines::Side::one);
  const auto two = baselines::equispaced_schedule(acq.width, acq.initial_budget, T, baselines::Side::two);
  score_all("equi_one", [&](std::size_t i) { return baselines::schedule_final_score(*test[i], acq, one); });
  score_all("equi_two", [&](std::size_t i) { return baselines::schedule_final_score(*test[i], acq, two); });
  const auto na = baselines::na_oracle_schedule(fit, acq, c.cfg.workers);
  score_all("na_oracle", [&](std::size_t i) { return baselines::schedule_final_score(*test[i], acq, na); });
  score_all("adaptive_oracle",
            [&](std::size_t i) { return baselines::adaptive_oracle_final_score(*test[i], acq); });

  std::ostringstream csv;
  csv << "strategy,mean_ssim,std_over_images\n";
  for (const auto& [name, v] : rows) {
    csv << name << ',' << num(mean_of(v)) << ',' << num(sample_std(v)) << '\n';
    c.out << name << ' ' << num(mean_of(v)) << '\n';
  }
  write_text(c.dir / "oracle.csv", csv.str());
  return 0;
}

int cmd_mi(Context& c) {
  require_checkpoint(c.cfg);
  const auto acq = c.cfg.acquisition();
  write_run_metadata(c, "mi");
  const Workspace ws = build_workspace(c.cfg);
  const auto test = ws.split(data::Split::test);
  const auto net = load_net(c.cfg, c.cfg.checkpoints.front());
  const auto snaps =
      diagnostics::gather_snapshots(test, net, acq, acq.samples_per_step, c.seeds.diagnostics, c.cfg.workers);
  std::ostringstream csv;
  csv << "step,marginal_entropy,conditional_entropy,mutual_information,mutual_information_raw\n";
  for (const auto& s : snaps) {
    const double h = diagnostics::marginal_entropy(s), hc = diagnostics::conditional_entropy(s);
    csv << s.step + 1 << ',' << num(h) << ',' << num(hc) << ','
        << num(diagnostics::reported_mutual_information(h - hc)) << ',' << num(h - hc) << '\n';
  }
  write_text(c.dir / "mi.csv", csv.str());
  const double mean = diagnostics::mean_mutual_information(snaps);
  const double sd = diagnostics::bootstrap_mi_std(snaps, c.cfg.bootstrap, c.seeds.bootstrap);
  write_text(c.dir / "mi_summary.csv", "mean_mutual_information,bootstrap_std,resamples,images,replicates\n" +
                                           num(mean) + ',' + num(sd) + ',' + std::to_string(c.cfg.bootstrap) +
                                           ',' + std::to_string(test.size()) + ',' +
                                           std::to_string(acq.samples_per_step) + '\n');
  c.out << "mean_mutual_information " << num(mean) << " bootstrap_std " << num(sd) << '\n';
  return 0;
}

int epoch_of(const std::string& path) {
  static const std::regex re(R"(epoch_(\d+))");
  std::smatch m;
  const std::string stem = fs::path(path).stem().string();
  return std::regex_search(stem, m, re) ? std::stoi(m[1]) : 0;
}

int cmd_snr(Context& c) {
  require_checkpoint(c.cfg);
  const auto acq = c.cfg.acquisition();
  write_run_metadata(c, "snr");
  const Workspace ws = build_workspace(c.cfg);
  const auto train = ws.split(data::Split::train);
  std::ostringstream csv;
  csv << "epoch,snr,B,q,reduction\n";
  for (const auto& path : c.cfg.checkpoints) {
    const auto net = load_net(c.cfg, path);
    const auto r = diagnostics::measure_gradient_snr(train, net, acq, c.cfg.snr_batches, c.cfg.batch_size,
                                                     c.seeds.diagnostics, c.cfg.workers);
    csv << epoch_of(path) << ',' << num(r.snr) << ',' << r.batches << ',' << r.samples_per_step << ",norm_ratio\n";
    c.out << "epoch " << epoch_of(path) << " snr " << num(r.snr) << '\n';
  }
  write_text(c.dir / "snr.csv", csv.str());
  return 0;
}

int cmd_masks(Context& c) {
  const auto acq = c.cfg.acquisition();
  write_run_metadata(c, "masks");
  const Workspace ws = build_workspace(c.cfg);
  const auto test = ws.split(data::Split::test);
  const int T = acq.horizon();
  std::ostringstream csv;
  if (!c.cfg.baseline.empty()) {
    baselines::MaskSchedule s;
    if (c.cfg.baseline == "random") {
      Rng rng(c.seeds.baseline);
      s = baselines::random_schedule(acq.width, acq.initial_budget, T, rng);
    } else if (c.cfg.baseline == "equi_one") {
      s = baselines::equispaced_schedule(acq.width, acq.initial_budget, T, baselines::Side::one);
    } else if (c.cfg.baseline == "equi_two") {
      s = baselines::equispaced_schedule(acq.width, acq.initial_budget, T, baselines::Side::two);
    } else if (c.cfg.baseline == "na_oracle") {
      s = baselines::na_oracle_schedule(ws.split(parse_split(c.cfg.oracle_split)), acq, c.cfg.workers);
    } else {
      throw InvalidArgument("unknown baseline '" + c.cfg.baseline + "'");
    }
    csv << "step,column,provenance\n";
    for (int t = 0; t < T; ++t) csv << t + 1 << ',' << s.columns[t] << ',' << to_string(s.provenance) << '\n';
    write_text(c.dir / "masks.csv", csv.str());
    return 0;
  }
  require_checkpoint(c.cfg);
  const auto net = load_net(c.cfg, c.cfg.checkpoints.front());
  std::vector<estimators::Rollout> rolls(test.size());
  estimators::parallel_for(test.size(), c.cfg.workers, [&](std::size_t i) {
    Rng rng(derive_seed(c.seeds.diagnostics, i));
    rolls[i] = estimators::policy_rollout(*test[i], net, acq, rng);
  });
  const int W = acq.width;
  const double n = static_cast<double>(test.size());
  csv << "step,column,selected_fraction,measured_fraction,provenance\n";
  for (int t = 0; t < T; ++t) {
    std::vector<int> picked(W, 0), measured(W, 0);
    for (const auto& r : rolls) {
      picked[r.actions[t]]++;
      ColumnMask m = kspace::init_center_mask(W, acq.initial_budget);
      for (int k = 0; k <= t; ++k) m = m.with_column(r.actions[k]);
      for (int j = 0; j < W; ++j) measured[j] += m.contains(j) ? 1 : 0;
    }
    for (int j = 0; j < W; ++j)
      csv << t + 1 << ',' << j << ',' << num(picked[j] / n) << ',' << num(measured[j] / n) << ",policy\n";
  }
  write_text(c.dir / "masks.csv", csv.str());
  return 0;
}

int cmd_phantoms(Context& c) {
  write_run_metadata(c, "phantoms");
  auto ds = data::split_dataset(data::generate_phantoms(c.cfg.count, c.cfg.width, c.cfg.data_seed),
                                {c.cfg.train_fraction, c.cfg.val_fraction, c.cfg.test_fraction},
                                derive_seed(mix_seed(c.cfg.data_seed), 0));
  data::write_dataset(ds, c.dir / "images");
  data::write_manifest(ds, c.dir / "manifest.csv");
  c.out << "wrote " << ds.size() << " phantoms to " << (c.dir / "images").string() << '\n';
  return 0;
}

void error_record(std::ostream& err, const std::string& kind, const std::string& message) {
  err << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Adaptive Cartesian k-space sampling policies"};
  app.set_config("--config", "", "Flat key = value config file; flags take precedence");
  app.require_subcommand(1, 1);
  app.fallthrough();

  app.add_option("--mode", cfg.mode, "greedy or nongreedy");
  app.add_option("--width", cfg.width, "Image side and number of k-space columns W");
  app.add_option("--L", cfg.initial_budget, "Initial center columns");
  app.add_option("--M", cfg.total_budget, "Total column budget");
  app.add_option("--q", cfg.samples_per_step, "Samples per step");
  auto* gamma = app.add_option("--gamma", cfg.discount, "Discount (nongreedy only)");
  app.add_option("--q_eval", cfg.eval_samples, "Trajectories per test image");
  app.add_option("--data", cfg.data, "'generate' or a directory of PGM images");
  app.add_option("--count", cfg.count, "Number of generated phantoms");
  app.add_option("--data_seed", cfg.data_seed, "Phantom and split seed");
  app.add_option("--train_fraction", cfg.train_fraction);
  app.add_option("--val_fraction", cfg.val_fraction);
  app.add_option("--test_fraction", cfg.test_fraction);
  app.add_option("--window", cfg.window, "gaussian_11_sigma_1_5 or uniform_7");
  app.add_option("--recon", cfg.recon, "'zero_filled' or a reconstruction table directory");
  app.add_option("--arch", cfg.arch, "'desk', 'tiny' or a layer descriptor");
  app.add_option("--epochs", cfg.epochs);
  app.add_option("--batch_size", cfg.batch_size);
  app.add_option("--lr", cfg.learning_rate, "Initial learning rate");
  app.add_option("--lr_schedule", cfg.lr_schedule, "auto, greedy_schedule or nongreedy_schedule");
  app.add_option("--seed", cfg.seed, "Run seed");
  app.add_option("--workers", cfg.workers, "Worker threads (1 = deterministic default)");
  app.add_option("--out", cfg.out, "Run directory");
  app.add_option("--checkpoint", cfg.checkpoints, "Checkpoint file(s)");
  app.add_option("--snr_batches", cfg.snr_batches, "Batches B for the SNR estimate");
  app.add_option("--bootstrap", cfg.bootstrap, "Bootstrap resamples for MI noise");
  app.add_option("--oracle_split", cfg.oracle_split, "Split the NA oracle is fitted on");
  app.add_option("--baseline", cfg.baseline, "masks: random, equi_one, equi_two or na_oracle");

  std::string command;
  for (const char* name : {"train", "eval", "oracle", "mi", "snr", "masks", "phantoms"})
    app.add_subcommand(name)->callback([&command, name] { command = name; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    error_record(err, "usage", e.what());
    return 2;
  }

  try {
    validate(cfg, gamma->count() > 0);
    Context c{cfg, Seeds(cfg.seed), fs::path(cfg.out), out};
    if (command == "train") return cmd_train(c);
    if (command == "eval") return cmd_eval(c);
    if (command == "oracle") return cmd_oracle(c);
    if (command == "mi") return cmd_mi(c);
    if (command == "snr") return cmd_snr(c);
    if (command == "masks") return cmd_masks(c);
    return cmd_phantoms(c);
  } catch (const fs::filesystem_error& e) {
    error_record(err, "io_error", e.what());
  } catch (const std::exception& e) {
    error_record(err, error_kind(e), e.what());
  }
  return 1;
}

}  // namespace kspg::cli
