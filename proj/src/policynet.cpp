#include "kspg/policynet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kspg/errors.hpp"

namespace kspg::policy {

namespace {

constexpr double kLeakySlope = 0.01;
constexpr double kNormEps = 1e-5;

std::size_t layer_param_count(const LayerSpec& l) {
  switch (l.kind) {
    case LayerKind::conv3x3_pool:
      return static_cast<std::size_t>(l.out) * l.in * 9;
    case LayerKind::dense:
      return static_cast<std::size_t>(l.out) * l.in + l.out;
    case LayerKind::activation:
      return 0;
  }
  return 0;
}

int layer_fan_in(const LayerSpec& l) { return l.kind == LayerKind::conv3x3_pool ? l.in * 9 : l.in; }

}  // namespace

// ---------------------------------------------------------------- Architecture

int Architecture::width() const {
  for (auto it = layers.rbegin(); it != layers.rend(); ++it)
    if (it->kind == LayerKind::dense) return it->out;
  return 0;
}

std::size_t Architecture::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += layer_param_count(l);
  return n;
}

void Architecture::validate() const {
  if (input_height <= 0 || input_width <= 0) throw InvalidArgument("architecture input size must be positive");
  if (layers.empty() || layers.back().kind != LayerKind::dense) {
    throw InvalidArgument("architecture must end with a dense layer");
  }
  int c = 1, h = input_height, w = input_width;
  bool flat = false;
  for (const auto& l : layers) {
    switch (l.kind) {
      case LayerKind::conv3x3_pool:
        if (flat) throw InvalidArgument("conv3x3_pool cannot follow a dense layer");
        if (l.in != c || l.out <= 0) throw InvalidArgument("conv3x3_pool channel mismatch in " + descriptor());
        if (h % 2 != 0 || w % 2 != 0) throw InvalidArgument("conv3x3_pool needs even spatial size");
        c = l.out;
        h /= 2;
        w /= 2;
        break;
      case LayerKind::dense:
        if (l.in != c * h * w || l.out <= 0) throw InvalidArgument("dense size mismatch in " + descriptor());
        c = l.out;
        h = w = 1;
        flat = true;
        break;
      case LayerKind::activation:
        break;
    }
  }
}

std::string Architecture::descriptor() const {
  std::ostringstream os;
  os << "in=" << input_height << 'x' << input_width;
  for (const auto& l : layers) {
    switch (l.kind) {
      case LayerKind::conv3x3_pool:
        os << ";conv3x3_pool=" << l.in << ':' << l.out;
        break;
      case LayerKind::dense:
        os << ";dense=" << l.in << ':' << l.out;
        break;
      case LayerKind::activation:
        os << ";leaky_relu";
        break;
    }
  }
  return os.str();
}

Architecture Architecture::parse(const std::string& descriptor) {
  Architecture arch;
  std::istringstream is(descriptor);
  std::string tok;
  bool first = true;
  auto bad = [&](const std::string& why) {
    return ParseError("bad layer descriptor '" + descriptor + "': " + why);
  };
  auto pair = [&](const std::string& s, char sep) {
    const auto p = s.find(sep);
    if (p == std::string::npos) throw bad("expected '" + std::string(1, sep) + "' in " + s);
    try {
      return std::pair{std::stoi(s.substr(0, p)), std::stoi(s.substr(p + 1))};
    } catch (const std::exception&) {
      throw bad("non-numeric size in " + s);
    }
  };
  while (std::getline(is, tok, ';')) {
    const auto eq = tok.find('=');
    const std::string key = tok.substr(0, eq);
    const std::string val = eq == std::string::npos ? "" : tok.substr(eq + 1);
    if (first) {
      if (key != "in") throw bad("must start with in=HxW");
      std::tie(arch.input_height, arch.input_width) = pair(val, 'x');
      first = false;
    } else if (key == "conv3x3_pool") {
      auto [i, o] = pair(val, ':');
      arch.layers.push_back({LayerKind::conv3x3_pool, i, o});
    } else if (key == "dense") {
      auto [i, o] = pair(val, ':');
      arch.layers.push_back({LayerKind::dense, i, o});
    } else if (key == "leaky_relu") {
      arch.layers.push_back({LayerKind::activation, 0, 0});
    } else {
      throw bad("unknown layer '" + key + "'");
    }
  }
  if (first) throw bad("empty");
  try {
    arch.validate();
  } catch (const InvalidArgument& e) {
    throw bad(e.what());
  }
  return arch;
}

Architecture Architecture::desk_default(int image_side, int width) {
  if (image_side % 4 != 0) throw InvalidArgument("image side must be divisible by 4");
  const int s = image_side / 4;
  Architecture a{image_side, image_side,
                 {{LayerKind::conv3x3_pool, 1, 8},
                  {LayerKind::conv3x3_pool, 8, 16},
                  {LayerKind::dense, 16 * s * s, 64},
                  {LayerKind::activation, 0, 0},
                  {LayerKind::dense, 64, width}}};
  a.validate();
  return a;
}

Architecture Architecture::tiny(int image_side, int width) {
  if (image_side % 2 != 0) throw InvalidArgument("image side must be even");
  const int s = image_side / 2;
  Architecture a{image_side, image_side,
                 {{LayerKind::conv3x3_pool, 1, 2},
                  {LayerKind::dense, 2 * s * s, 8},
                  {LayerKind::activation, 0, 0},
                  {LayerKind::dense, 8, width}}};
  a.validate();
  return a;
}

// ---------------------------------------------------------------- buffers

void GradientBuffer::reset() {
  std::fill(accum.begin(), accum.end(), 0.0);
  sample_count = 0;
}

void GradientBuffer::merge(const GradientBuffer& other) {
  if (other.accum.size() != accum.size()) throw InvalidArgument("gradient buffer size mismatch");
  for (std::size_t i = 0; i < accum.size(); ++i) accum[i] += other.accum[i];
  sample_count += other.sample_count;
}

bool GradientBuffer::all_finite() const {
  return std::all_of(accum.begin(), accum.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------- softmax, sampling

std::vector<double> masked_softmax(std::span<const double> logits, const ColumnMask& mask) {
  if (static_cast<int>(logits.size()) != mask.width()) {
    throw InvalidArgument("logit count does not match mask width");
  }
  if (mask.is_full()) throw NoActionsAvailable("every column is already measured");
  const auto& sel = mask.selected();
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < logits.size(); ++j)
    if (!sel[j]) top = std::max(top, logits[j]);
  std::vector<double> p(logits.size(), 0.0);
  double sum = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    if (sel[j]) continue;
    p[j] = std::exp(logits[j] - top);
    sum += p[j];
  }
  for (double& v : p) v /= sum;
  return p;
}

std::vector<int> sample_actions(std::span<const double> policy, int q, Rng& rng) {
  if (q < 1) throw InvalidArgument("need at least one sample");
  int last_positive = -1;
  for (std::size_t j = 0; j < policy.size(); ++j)
    if (policy[j] > 0) last_positive = static_cast<int>(j);
  if (last_positive < 0) throw InvalidArgument("policy has no positive entries");
  std::vector<int> out(static_cast<std::size_t>(q));
  for (int& a : out) {
    const double u = rng.uniform();
    double cum = 0.0;
    a = last_positive;
    for (std::size_t j = 0; j < policy.size(); ++j) {
      cum += policy[j];
      if (u < cum && policy[j] > 0) {
        a = static_cast<int>(j);
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- network

struct PolicyNetwork::Tape {
  struct Step {
    int c = 0, h = 0, w = 0;          // input shape
    std::vector<double> input;
    std::vector<double> normalized;   // conv: post instance-norm, pre-ReLU
    std::vector<double> inv_std;      // conv: per output channel
    std::vector<int> argmax;          // conv: pool source index per output element
  };
  std::vector<Step> steps;
  std::vector<double> output;
};

PolicyNetwork::PolicyNetwork(Architecture arch, std::uint64_t seed) : arch_(std::move(arch)) {
  arch_.validate();
  params_.resize(arch_.parameter_count());
  Rng rng(seed);
  std::size_t off = 0;
  for (const auto& l : arch_.layers) {
    offsets_.push_back(off);
    const std::size_t n = layer_param_count(l);
    if (n == 0) continue;
    const double bound = std::sqrt(1.0 / layer_fan_in(l));
    for (std::size_t i = 0; i < n; ++i) params_[off + i] = rng.uniform(-bound, bound);
    off += n;
  }
}

PolicyNetwork::PolicyNetwork(Architecture arch, std::vector<double> parameters)
    : arch_(std::move(arch)), params_(std::move(parameters)) {
  arch_.validate();
  if (params_.size() != arch_.parameter_count()) {
    throw InvalidArgument("parameter count " + std::to_string(params_.size()) +
                          " does not match architecture (" +
                          std::to_string(arch_.parameter_count()) + ")");
  }
  std::size_t off = 0;
  for (const auto& l : arch_.layers) {
    offsets_.push_back(off);
    off += layer_param_count(l);
  }
}

ParamRange PolicyNetwork::layer_parameters(std::size_t index) const {
  return {offsets_.at(index), layer_param_count(arch_.layers.at(index))};
}

ParamRange PolicyNetwork::final_dense_weights() const {
  const std::size_t last = arch_.layers.size() - 1;
  const auto& l = arch_.layers[last];
  return {offsets_[last], static_cast<std::size_t>(l.out) * l.in};
}

ParamRange PolicyNetwork::final_dense_bias() const {
  const std::size_t last = arch_.layers.size() - 1;
  const auto& l = arch_.layers[last];
  return {offsets_[last] + static_cast<std::size_t>(l.out) * l.in, static_cast<std::size_t>(l.out)};
}

void PolicyNetwork::forward_tape(const Image& observation, Tape& tape) const {
  if (observation.height() != arch_.input_height || observation.width() != arch_.input_width) {
    throw InvalidArgument("observation is " + std::to_string(observation.height()) + "x" +
                          std::to_string(observation.width()) + ", network expects " +
                          std::to_string(arch_.input_height) + "x" + std::to_string(arch_.input_width));
  }
  std::vector<double> x(observation.pixels().begin(), observation.pixels().end());
  int c = 1, h = arch_.input_height, w = arch_.input_width;
  tape.steps.clear();
  tape.steps.reserve(arch_.layers.size());
  for (std::size_t li = 0; li < arch_.layers.size(); ++li) {
    const auto& l = arch_.layers[li];
    const double* p = params_.data() + offsets_[li];
    Tape::Step step;
    step.c = c;
    step.h = h;
    step.w = w;
    switch (l.kind) {
      case LayerKind::conv3x3_pool: {
        const int hw = h * w;
        std::vector<double> z(static_cast<std::size_t>(l.out) * hw, 0.0);
        for (int o = 0; o < l.out; ++o) {
          double* zo = z.data() + static_cast<std::size_t>(o) * hw;
          for (int i = 0; i < l.in; ++i) {
            const double* xi = x.data() + static_cast<std::size_t>(i) * hw;
            const double* k = p + (static_cast<std::size_t>(o) * l.in + i) * 9;
            for (int ky = 0; ky < 3; ++ky) {
              for (int kx = 0; kx < 3; ++kx) {
                const double kv = k[ky * 3 + kx];
                const int y0 = std::max(0, 1 - ky), y1 = std::min(h, h + 1 - ky);
                const int x0 = std::max(0, 1 - kx), x1 = std::min(w, w + 1 - kx);
                for (int y = y0; y < y1; ++y) {
                  const double* src = xi + (y + ky - 1) * w + (kx - 1);
                  double* dst = zo + y * w;
                  for (int xx = x0; xx < x1; ++xx) dst[xx] += kv * src[xx];
                }
              }
            }
          }
        }
        step.normalized.resize(z.size());
        step.inv_std.resize(static_cast<std::size_t>(l.out));
        for (int o = 0; o < l.out; ++o) {
          const double* zo = z.data() + static_cast<std::size_t>(o) * hw;
          double mean = 0.0;
          for (int k = 0; k < hw; ++k) mean += zo[k];
          mean /= hw;
          double var = 0.0;
          for (int k = 0; k < hw; ++k) var += (zo[k] - mean) * (zo[k] - mean);
          var /= hw;
          const double inv = 1.0 / std::sqrt(var + kNormEps);
          step.inv_std[o] = inv;
          double* no = step.normalized.data() + static_cast<std::size_t>(o) * hw;
          for (int k = 0; k < hw; ++k) no[k] = (zo[k] - mean) * inv;
        }
        const int oh = h / 2, ow = w / 2;
        std::vector<double> pooled(static_cast<std::size_t>(l.out) * oh * ow);
        step.argmax.resize(pooled.size());
        for (int o = 0; o < l.out; ++o) {
          const std::size_t base = static_cast<std::size_t>(o) * hw;
          for (int y = 0; y < oh; ++y) {
            for (int xx = 0; xx < ow; ++xx) {
              int best = static_cast<int>(base) + (2 * y) * w + 2 * xx;
              for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                  const int idx = static_cast<int>(base) + (2 * y + dy) * w + 2 * xx + dx;
                  if (step.normalized[idx] > step.normalized[best]) best = idx;
                }
              const std::size_t out_idx = (static_cast<std::size_t>(o) * oh + y) * ow + xx;
              step.argmax[out_idx] = best;
              pooled[out_idx] = std::max(step.normalized[best], 0.0);
            }
          }
        }
        step.input = std::move(x);
        x = std::move(pooled);
        c = l.out;
        h = oh;
        w = ow;
        break;
      }
      case LayerKind::dense: {
        std::vector<double> y(static_cast<std::size_t>(l.out));
        const double* bias = p + static_cast<std::size_t>(l.out) * l.in;
        for (int o = 0; o < l.out; ++o) {
          const double* row = p + static_cast<std::size_t>(o) * l.in;
          double acc = bias[o];
          for (int i = 0; i < l.in; ++i) acc += row[i] * x[i];
          y[o] = acc;
        }
        step.input = std::move(x);
        x = std::move(y);
        c = l.out;
        h = w = 1;
        break;
      }
      case LayerKind::activation: {
        step.input = x;
        for (double& v : x) v = v > 0 ? v : kLeakySlope * v;
        break;
      }
    }
    tape.steps.push_back(std::move(step));
  }
  tape.output = std::move(x);
}

void PolicyNetwork::backward(const Tape& tape, std::vector<double> g, std::span<double> grad) const {
  for (std::size_t li = arch_.layers.size(); li-- > 0;) {
    const auto& l = arch_.layers[li];
    const auto& step = tape.steps[li];
    const double* p = params_.data() + offsets_[li];
    double* gp = grad.data() + offsets_[li];
    const bool need_input_grad = li > 0;
    switch (l.kind) {
      case LayerKind::dense: {
        double* gb = gp + static_cast<std::size_t>(l.out) * l.in;
        std::vector<double> gx(need_input_grad ? static_cast<std::size_t>(l.in) : 0, 0.0);
        for (int o = 0; o < l.out; ++o) {
          const double go = g[o];
          if (go == 0.0) continue;
          gb[o] += go;
          double* grow = gp + static_cast<std::size_t>(o) * l.in;
          const double* row = p + static_cast<std::size_t>(o) * l.in;
          for (int i = 0; i < l.in; ++i) grow[i] += go * step.input[i];
          if (need_input_grad)
            for (int i = 0; i < l.in; ++i) gx[i] += go * row[i];
        }
        g = std::move(gx);
        break;
      }
      case LayerKind::activation: {
        for (std::size_t i = 0; i < g.size(); ++i)
          if (!(step.input[i] > 0)) g[i] *= kLeakySlope;
        break;
      }
      case LayerKind::conv3x3_pool: {
        const int h = step.h, w = step.w, hw = h * w;
        // Unpool + ReLU.
        std::vector<double> gn(step.normalized.size(), 0.0);
        for (std::size_t k = 0; k < step.argmax.size(); ++k) {
          const int src = step.argmax[k];
          if (step.normalized[src] > 0) gn[src] += g[k];
        }
        // Instance norm: dz = inv_std * (dn - mean(dn) - n * mean(dn * n)).
        std::vector<double> gz(gn.size());
        for (int o = 0; o < l.out; ++o) {
          const std::size_t base = static_cast<std::size_t>(o) * hw;
          double mean_g = 0.0, mean_gn = 0.0;
          for (int k = 0; k < hw; ++k) {
            mean_g += gn[base + k];
            mean_gn += gn[base + k] * step.normalized[base + k];
          }
          mean_g /= hw;
          mean_gn /= hw;
          const double inv = step.inv_std[o];
          for (int k = 0; k < hw; ++k)
            gz[base + k] = inv * (gn[base + k] - mean_g - step.normalized[base + k] * mean_gn);
        }
        // Convolution.
        std::vector<double> gx(need_input_grad ? step.input.size() : 0, 0.0);
        for (int o = 0; o < l.out; ++o) {
          const double* gzo = gz.data() + static_cast<std::size_t>(o) * hw;
          for (int i = 0; i < l.in; ++i) {
            const double* xi = step.input.data() + static_cast<std::size_t>(i) * hw;
            const std::size_t koff = (static_cast<std::size_t>(o) * l.in + i) * 9;
            for (int ky = 0; ky < 3; ++ky) {
              for (int kx = 0; kx < 3; ++kx) {
                const int y0 = std::max(0, 1 - ky), y1 = std::min(h, h + 1 - ky);
                const int x0 = std::max(0, 1 - kx), x1 = std::min(w, w + 1 - kx);
                double acc = 0.0;
                for (int y = y0; y < y1; ++y) {
                  const double* src = xi + (y + ky - 1) * w + (kx - 1);
                  const double* gg = gzo + y * w;
                  for (int xx = x0; xx < x1; ++xx) acc += gg[xx] * src[xx];
                }
                gp[koff + ky * 3 + kx] += acc;
                if (need_input_grad) {
                  const double kv = p[koff + ky * 3 + kx];
                  double* gxi = gx.data() + static_cast<std::size_t>(i) * hw;
                  for (int y = y0; y < y1; ++y) {
                    double* dst = gxi + (y + ky - 1) * w + (kx - 1);
                    const double* gg = gzo + y * w;
                    for (int xx = x0; xx < x1; ++xx) dst[xx] += kv * gg[xx];
                  }
                }
              }
            }
          }
        }
        g = std::move(gx);
        break;
      }
    }
  }
}

std::vector<double> PolicyNetwork::logits(const Image& observation) const {
  Tape tape;
  forward_tape(observation, tape);
  return std::move(tape.output);
}

std::vector<double> PolicyNetwork::forward(const Image& observation, const ColumnMask& mask) const {
  if (mask.width() != width()) throw InvalidArgument("mask width does not match policy width");
  if (mask.is_full()) throw NoActionsAvailable("every column is already measured");
  return masked_softmax(logits(observation), mask);
}

void PolicyNetwork::accumulate_log_prob_gradient(const Image& observation, const ColumnMask& mask,
                                                 int action, double weight,
                                                 GradientBuffer& buf) const {
  const int actions[] = {action};
  const double weights[] = {weight};
  accumulate_log_prob_gradients(observation, mask, actions, weights, buf);
}

void PolicyNetwork::accumulate_log_prob_gradients(const Image& observation, const ColumnMask& mask,
                                                  std::span<const int> actions,
                                                  std::span<const double> weights,
                                                  GradientBuffer& buf) const {
  if (actions.size() != weights.size()) throw InvalidArgument("actions and weights differ in length");
  if (buf.accum.size() != params_.size()) throw InvalidArgument("gradient buffer size mismatch");
  if (mask.width() != width()) throw InvalidArgument("mask width does not match policy width");
  if (mask.is_full()) throw NoActionsAvailable("every column is already measured");
  for (int a : actions) {
    if (a < 0 || a >= width()) throw InvalidArgument("action out of range: " + std::to_string(a));
    if (mask.contains(a)) {
      throw PreconditionViolation("action " + std::to_string(a) + " is an already measured column");
    }
  }
  buf.sample_count += static_cast<std::int64_t>(actions.size());
  double total = 0.0;
  for (double wgt : weights) total += wgt;
  if (std::all_of(weights.begin(), weights.end(), [](double v) { return v == 0.0; })) return;

  Tape tape;
  forward_tape(observation, tape);
  const auto probs = masked_softmax(tape.output, mask);
  // d/dlogit_j of sum_i w_i log pi(a_i) = sum_i w_i [j == a_i] - (sum_i w_i) pi_j, unmeasured j only.
  std::vector<double> g(probs.size(), 0.0);
  for (std::size_t j = 0; j < probs.size(); ++j)
    if (!mask.contains(static_cast<int>(j))) g[j] = -total * probs[j];
  for (std::size_t i = 0; i < actions.size(); ++i) g[actions[i]] += weights[i];
  backward(tape, std::move(g), buf.accum);
}

}  // namespace kspg::policy
