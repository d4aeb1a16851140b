#include "pgps/toynet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include <json.hpp>

#include "pgps/errors.hpp"
#include "pgps/rng.hpp"

namespace pgps {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is raw little-endian float32");

constexpr double kDiceEps = 1e-5;
// Probabilities below this floor contribute a clamped log term with zero
// gradient; keeps saturated float32 runs finite.
constexpr double kLogFloor = 1e-12;

// out[x,y,z] += w * in[x+ox, y+oy, z+oz] restricted to in-range source
// voxels; kernel offsets ox,oy,oz are in {-1,0,1}.
struct KernelSpan {
  std::uint64_t x0, x1, y0, y1, z0, z1;
};

KernelSpan clip(int ox, int oy, int oz, std::uint64_t w, std::uint64_t h,
                std::uint64_t d) {
  KernelSpan s;
  s.x0 = ox < 0 ? static_cast<std::uint64_t>(-ox) : 0;
  s.x1 = ox > 0 ? w - static_cast<std::uint64_t>(ox) : w;
  s.y0 = oy < 0 ? static_cast<std::uint64_t>(-oy) : 0;
  s.y1 = oy > 0 ? h - static_cast<std::uint64_t>(oy) : h;
  s.z0 = oz < 0 ? static_cast<std::uint64_t>(-oz) : 0;
  s.z1 = oz > 0 ? d - static_cast<std::uint64_t>(oz) : d;
  return s;
}

template <typename Scalar>
TensorBatch<Scalar> conv_forward(const ConvLayer<Scalar>& layer,
                                 const TensorBatch<Scalar>& in) {
  const std::uint64_t w = in.shape[0], h = in.shape[1], d = in.shape[2];
  const std::uint64_t plane = w * h * d;
  auto out = TensorBatch<Scalar>::zeros(in.batch, layer.out_channels, in.shape);
  for (std::uint64_t b = 0; b < in.batch; ++b) {
    for (std::uint64_t oc = 0; oc < layer.out_channels; ++oc) {
      Scalar* o = out.data.data() + (b * layer.out_channels + oc) * plane;
      std::fill(o, o + plane, layer.bias[oc]);
      for (std::uint64_t ic = 0; ic < layer.in_channels; ++ic) {
        const Scalar* src =
            in.data.data() + (b * layer.in_channels + ic) * plane;
        const Scalar* wk =
            layer.weights.data() + (oc * layer.in_channels + ic) * 27;
        for (int kx = 0; kx < 3; ++kx)
          for (int ky = 0; ky < 3; ++ky)
            for (int kz = 0; kz < 3; ++kz) {
              const Scalar wv = wk[kx * 9 + ky * 3 + kz];
              const int ox = kx - 1, oy = ky - 1, oz = kz - 1;
              const KernelSpan s = clip(ox, oy, oz, w, h, d);
              const std::uint64_t run = s.z1 - s.z0;
              for (std::uint64_t x = s.x0; x < s.x1; ++x)
                for (std::uint64_t y = s.y0; y < s.y1; ++y) {
                  Scalar* orow = o + (x * h + y) * d + s.z0;
                  const Scalar* irow =
                      src + ((x + ox) * h + (y + oy)) * d + (s.z0 + oz);
                  for (std::uint64_t z = 0; z < run; ++z)
                    orow[z] += wv * irow[z];
                }
            }
      }
    }
  }
  return out;
}

// Accumulates weight/bias gradients into dlayer and, when din is given,
// input gradients into din.
template <typename Scalar>
void conv_backward(const ConvLayer<Scalar>& layer,
                   const TensorBatch<Scalar>& in,
                   const TensorBatch<Scalar>& dout, ConvLayer<Scalar>& dlayer,
                   TensorBatch<Scalar>* din) {
  const std::uint64_t w = in.shape[0], h = in.shape[1], d = in.shape[2];
  const std::uint64_t plane = w * h * d;
  for (std::uint64_t b = 0; b < in.batch; ++b) {
    for (std::uint64_t oc = 0; oc < layer.out_channels; ++oc) {
      const Scalar* dob =
          dout.data.data() + (b * layer.out_channels + oc) * plane;
      double bias_acc = 0.0;
      for (std::uint64_t i = 0; i < plane; ++i) bias_acc += dob[i];
      dlayer.bias[oc] += static_cast<Scalar>(bias_acc);
      for (std::uint64_t ic = 0; ic < layer.in_channels; ++ic) {
        const Scalar* src =
            in.data.data() + (b * layer.in_channels + ic) * plane;
        Scalar* dsrc =
            din ? din->data.data() + (b * layer.in_channels + ic) * plane
                : nullptr;
        const std::uint64_t wbase = (oc * layer.in_channels + ic) * 27;
        for (int kx = 0; kx < 3; ++kx)
          for (int ky = 0; ky < 3; ++ky)
            for (int kz = 0; kz < 3; ++kz) {
              const int ox = kx - 1, oy = ky - 1, oz = kz - 1;
              const KernelSpan s = clip(ox, oy, oz, w, h, d);
              const std::uint64_t run = s.z1 - s.z0;
              const Scalar wv = layer.weights[wbase + kx * 9 + ky * 3 + kz];
              double wacc = 0.0;
              for (std::uint64_t x = s.x0; x < s.x1; ++x)
                for (std::uint64_t y = s.y0; y < s.y1; ++y) {
                  const Scalar* drow = dob + (x * h + y) * d + s.z0;
                  const std::uint64_t src_off =
                      ((x + ox) * h + (y + oy)) * d + (s.z0 + oz);
                  const Scalar* irow = src + src_off;
                  double dot = 0.0;
                  for (std::uint64_t z = 0; z < run; ++z)
                    dot += static_cast<double>(drow[z]) * irow[z];
                  wacc += dot;
                  if (dsrc) {
                    Scalar* grow = dsrc + src_off;
                    for (std::uint64_t z = 0; z < run; ++z)
                      grow[z] += wv * drow[z];
                  }
                }
              dlayer.weights[wbase + kx * 9 + ky * 3 + kz] +=
                  static_cast<Scalar>(wacc);
            }
      }
    }
  }
}

template <typename Scalar>
void relu_inplace(TensorBatch<Scalar>& t) {
  for (Scalar& v : t.data)
    if (v < Scalar(0)) v = Scalar(0);
}

// In-place per-voxel softmax over the channel axis.
template <typename Scalar>
void softmax_inplace(TensorBatch<Scalar>& t) {
  const std::uint64_t plane = t.voxels();
  const std::uint64_t c = t.channels;
  for (std::uint64_t b = 0; b < t.batch; ++b) {
    Scalar* base = t.data.data() + b * c * plane;
    for (std::uint64_t v = 0; v < plane; ++v) {
      Scalar m = base[v];
      for (std::uint64_t k = 1; k < c; ++k)
        m = std::max(m, base[k * plane + v]);
      double sum = 0.0;
      for (std::uint64_t k = 0; k < c; ++k) {
        const double e = std::exp(static_cast<double>(base[k * plane + v] - m));
        base[k * plane + v] = static_cast<Scalar>(e);
        sum += e;
      }
      const double inv = 1.0 / sum;
      for (std::uint64_t k = 0; k < c; ++k)
        base[k * plane + v] = static_cast<Scalar>(base[k * plane + v] * inv);
    }
  }
}

template <typename Scalar>
void require_finite(const TensorBatch<Scalar>& t, const char* where) {
  for (const Scalar& v : t.data)
    if (!std::isfinite(static_cast<double>(v)))
      throw numeric_error(std::string("non-finite activation in ") + where);
}

template <typename Scalar>
void check_net_shapes(const ToyNet<Scalar>& net,
                      const TensorBatch<Scalar>& input) {
  if (input.channels != 1)
    throw contract_error("network input must have exactly 1 channel");
  if (input.batch == 0 || input.voxels() == 0)
    throw contract_error("network input must be non-empty");
  if (net.conv1.in_channels != 1 ||
      net.conv1.out_channels != net.hidden_channels ||
      net.conv2.in_channels != net.hidden_channels ||
      net.conv2.out_channels != net.n_classes)
    throw contract_error("network layer shapes are inconsistent");
}

}  // namespace

template <typename Scalar>
ToyNet<Scalar> ToyNet<Scalar>::zeros(std::uint64_t hidden_channels,
                                     std::uint64_t n_classes) {
  if (hidden_channels == 0 || n_classes < 2)
    throw config_error("network needs hidden channels >= 1 and classes >= 2");
  ToyNet net;
  net.hidden_channels = hidden_channels;
  net.n_classes = n_classes;
  net.conv1 = ConvLayer<Scalar>::zeros(1, hidden_channels);
  net.conv2 = ConvLayer<Scalar>::zeros(hidden_channels, n_classes);
  return net;
}

template <typename Scalar>
ToyNet<Scalar> ToyNet<Scalar>::make(std::uint64_t hidden_channels,
                                    std::uint64_t n_classes,
                                    std::uint64_t seed) {
  ToyNet net = zeros(hidden_channels, n_classes);
  RngStream rng{seed, stream_id("toynet_init"), 0};
  const double std1 = std::sqrt(2.0 / (1.0 * 27.0));
  for (Scalar& v : net.conv1.weights)
    v = static_cast<Scalar>(std1 * rng.next_normal());
  const double std2 = std::sqrt(2.0 / (static_cast<double>(hidden_channels) * 27.0));
  for (Scalar& v : net.conv2.weights)
    v = static_cast<Scalar>(std2 * rng.next_normal());
  return net;
}

template <typename Scalar>
TensorBatch<Scalar> forward(const ToyNet<Scalar>& net,
                            const TensorBatch<Scalar>& input) {
  check_net_shapes(net, input);
  TensorBatch<Scalar> hidden = conv_forward(net.conv1, input);
  relu_inplace(hidden);
  TensorBatch<Scalar> probs = conv_forward(net.conv2, hidden);
  softmax_inplace(probs);
  require_finite(probs, "forward pass");
  return probs;
}

template <typename Scalar>
ForwardTrace<Scalar> forward_trace(const ToyNet<Scalar>& net,
                                   const TensorBatch<Scalar>& input) {
  check_net_shapes(net, input);
  ForwardTrace<Scalar> trace;
  trace.input = input;
  trace.hidden = conv_forward(net.conv1, input);
  relu_inplace(trace.hidden);
  trace.probs = conv_forward(net.conv2, trace.hidden);
  softmax_inplace(trace.probs);
  require_finite(trace.probs, "forward pass");
  return trace;
}

template <typename Scalar>
LossResult<Scalar> dice_ce_loss(const TensorBatch<Scalar>& probs,
                                const LabelBatch& labels) {
  if (probs.batch != labels.batch || probs.shape != labels.shape)
    throw contract_error("probabilities and labels have different shapes");
  const std::uint64_t c = probs.channels;
  if (c < 2) throw contract_error("loss needs at least 2 classes");
  const std::uint64_t plane = probs.voxels();
  const std::uint64_t n = probs.batch * plane;

  for (std::uint8_t g : labels.labels)
    if (g >= c)
      throw contract_error("label " + std::to_string(g) +
                           " out of range for " + std::to_string(c) +
                           " classes");

  // Whole-batch soft Dice per foreground class.
  std::vector<double> inter(c, 0.0), psum(c, 0.0), gsum(c, 0.0);
  double ce = 0.0;
  for (std::uint64_t b = 0; b < probs.batch; ++b) {
    const Scalar* base = probs.data.data() + b * c * plane;
    const std::uint8_t* lab = labels.labels.data() + b * plane;
    for (std::uint64_t k = 1; k < c; ++k) {
      const Scalar* p = base + k * plane;
      double i_acc = 0.0, p_acc = 0.0, g_acc = 0.0;
      for (std::uint64_t v = 0; v < plane; ++v) {
        p_acc += p[v];
        if (lab[v] == k) {
          i_acc += p[v];
          g_acc += 1.0;
        }
      }
      inter[k] += i_acc;
      psum[k] += p_acc;
      gsum[k] += g_acc;
    }
    for (std::uint64_t v = 0; v < plane; ++v) {
      const double pg = base[lab[v] * plane + v];
      ce -= std::log(std::max(pg, kLogFloor));
    }
  }
  ce /= static_cast<double>(n);

  const std::uint64_t n_fg = c - 1;
  double dice_sum = 0.0;
  std::vector<double> denom(c, 0.0);
  for (std::uint64_t k = 1; k < c; ++k) {
    denom[k] = psum[k] + gsum[k] + kDiceEps;
    dice_sum += (2.0 * inter[k] + kDiceEps) / denom[k];
  }

  LossResult<Scalar> out;
  out.dice_part = 1.0 - dice_sum / static_cast<double>(n_fg);
  out.ce_part = ce;
  out.loss = out.dice_part + out.ce_part;
  out.dprobs = TensorBatch<Scalar>::zeros(probs.batch, c, probs.shape);

  const double inv_n = 1.0 / static_cast<double>(n);
  const double inv_fg = 1.0 / static_cast<double>(n_fg);
  for (std::uint64_t b = 0; b < probs.batch; ++b) {
    const Scalar* base = probs.data.data() + b * c * plane;
    Scalar* dbase = out.dprobs.data.data() + b * c * plane;
    const std::uint8_t* lab = labels.labels.data() + b * plane;
    for (std::uint64_t k = 1; k < c; ++k) {
      const double num = 2.0 * inter[k] + kDiceEps;
      const double d2 = denom[k] * denom[k];
      Scalar* dp = dbase + k * plane;
      for (std::uint64_t v = 0; v < plane; ++v) {
        const double g = lab[v] == k ? 1.0 : 0.0;
        dp[v] = static_cast<Scalar>(-inv_fg * (2.0 * g * denom[k] - num) / d2);
      }
    }
    for (std::uint64_t v = 0; v < plane; ++v) {
      const std::size_t gi = lab[v] * plane + v;
      const double pg = base[gi];
      if (pg > kLogFloor)
        dbase[gi] += static_cast<Scalar>(-inv_n / pg);
    }
  }
  return out;
}

template <typename Scalar>
NetGrads<Scalar> backward(const ToyNet<Scalar>& net,
                          const ForwardTrace<Scalar>& trace,
                          const TensorBatch<Scalar>& dprobs) {
  const std::uint64_t c = trace.probs.channels;
  const std::uint64_t plane = trace.probs.voxels();

  // Softmax Jacobian: dlogit_k = p_k * (dp_k - sum_j p_j dp_j).
  TensorBatch<Scalar> dlogits =
      TensorBatch<Scalar>::zeros(trace.probs.batch, c, trace.probs.shape);
  for (std::uint64_t b = 0; b < trace.probs.batch; ++b) {
    const Scalar* p = trace.probs.data.data() + b * c * plane;
    const Scalar* dp = dprobs.data.data() + b * c * plane;
    Scalar* dl = dlogits.data.data() + b * c * plane;
    for (std::uint64_t v = 0; v < plane; ++v) {
      double dot = 0.0;
      for (std::uint64_t k = 0; k < c; ++k)
        dot += static_cast<double>(p[k * plane + v]) * dp[k * plane + v];
      for (std::uint64_t k = 0; k < c; ++k)
        dl[k * plane + v] = static_cast<Scalar>(
            p[k * plane + v] * (static_cast<double>(dp[k * plane + v]) - dot));
    }
  }

  NetGrads<Scalar> grads;
  grads.conv1 = ConvLayer<Scalar>::zeros(net.conv1.in_channels,
                                         net.conv1.out_channels);
  grads.conv2 = ConvLayer<Scalar>::zeros(net.conv2.in_channels,
                                         net.conv2.out_channels);
  TensorBatch<Scalar> dhidden = TensorBatch<Scalar>::zeros(
      trace.hidden.batch, trace.hidden.channels, trace.hidden.shape);
  conv_backward(net.conv2, trace.hidden, dlogits, grads.conv2, &dhidden);
  for (std::size_t i = 0; i < dhidden.data.size(); ++i)
    if (!(trace.hidden.data[i] > Scalar(0))) dhidden.data[i] = Scalar(0);
  conv_backward(net.conv1, trace.input, dhidden, grads.conv1,
                static_cast<TensorBatch<Scalar>*>(nullptr));
  return grads;
}

template <typename Scalar>
OptimState<Scalar> OptimState<Scalar>::make(const ToyNet<Scalar>& net,
                                            double learning_rate,
                                            double momentum,
                                            std::uint64_t max_epochs) {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw config_error("learning rate must be a non-negative finite number");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw config_error("momentum must lie in [0, 1)");
  if (max_epochs == 0)
    throw config_error("optimizer needs max_epochs >= 1 for the decay schedule");
  OptimState s;
  s.learning_rate = learning_rate;
  s.momentum = momentum;
  s.max_epochs = max_epochs;
  s.velocity1 =
      ConvLayer<Scalar>::zeros(net.conv1.in_channels, net.conv1.out_channels);
  s.velocity2 =
      ConvLayer<Scalar>::zeros(net.conv2.in_channels, net.conv2.out_channels);
  return s;
}

template <typename Scalar>
double OptimState<Scalar>::decayed_lr(std::uint64_t epoch) const {
  const double base =
      1.0 - static_cast<double>(epoch) / static_cast<double>(max_epochs);
  if (base <= 0.0) return 0.0;
  return learning_rate * std::pow(base, poly_power);
}

template <typename Scalar>
double train_step(ToyNet<Scalar>& net, OptimState<Scalar>& optim,
                  const TensorBatch<Scalar>& input, const LabelBatch& labels,
                  std::uint64_t epoch) {
  ForwardTrace<Scalar> trace = forward_trace(net, input);
  LossResult<Scalar> loss = dice_ce_loss(trace.probs, labels);
  if (!std::isfinite(loss.loss))
    throw numeric_error("non-finite training loss at epoch " +
                        std::to_string(epoch) +
                        " (dice=" + std::to_string(loss.dice_part) +
                        ", ce=" + std::to_string(loss.ce_part) + ")");
  NetGrads<Scalar> grads = backward(net, trace, loss.dprobs);

  const double lr = optim.decayed_lr(epoch);
  auto params = net.param_views();
  auto gview = grads.param_views();
  auto vview = optim.velocity_views();
  for (std::size_t k = 0; k < params.size(); ++k)
    for (std::size_t i = 0; i < params[k].size(); ++i) {
      vview[k][i] = static_cast<Scalar>(optim.momentum * vview[k][i]) +
                    gview[k][i];
      params[k][i] -= static_cast<Scalar>(lr * vview[k][i]);
    }
  return loss.loss;
}

template <typename Scalar>
LabelBatch argmax_labels(const TensorBatch<Scalar>& probs) {
  LabelBatch out;
  out.batch = probs.batch;
  out.shape = probs.shape;
  const std::uint64_t plane = probs.voxels();
  out.labels.assign(probs.batch * plane, 0);
  for (std::uint64_t b = 0; b < probs.batch; ++b) {
    const Scalar* base = probs.data.data() + b * probs.channels * plane;
    std::uint8_t* lab = out.labels.data() + b * plane;
    for (std::uint64_t v = 0; v < plane; ++v) {
      Scalar best = base[v];
      std::uint8_t arg = 0;
      for (std::uint64_t k = 1; k < probs.channels; ++k)
        if (base[k * plane + v] > best) {
          best = base[k * plane + v];
          arg = static_cast<std::uint8_t>(k);
        }
      lab[v] = arg;
    }
  }
  return out;
}

DiceScores dice_score(std::span<const std::uint8_t> predicted,
                      std::span<const std::uint8_t> truth,
                      std::uint64_t n_classes) {
  if (predicted.size() != truth.size())
    throw contract_error("dice: prediction and truth sizes differ");
  if (n_classes < 2) throw contract_error("dice needs at least 2 classes");
  std::vector<std::uint64_t> np(n_classes, 0), ng(n_classes, 0),
      ni(n_classes, 0);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const std::uint8_t p = predicted[i], g = truth[i];
    if (p < n_classes) ++np[p];
    if (g < n_classes) ++ng[g];
    if (p == g && p < n_classes) ++ni[p];
  }
  DiceScores out;
  out.per_class.resize(n_classes);
  for (std::uint64_t k = 0; k < n_classes; ++k) {
    const std::uint64_t denom = np[k] + ng[k];
    out.per_class[k] =
        denom == 0 ? 1.0 : 2.0 * static_cast<double>(ni[k]) / denom;
  }
  double sum = 0.0;
  for (std::uint64_t k = 1; k < n_classes; ++k) sum += out.per_class[k];
  out.mean = sum / static_cast<double>(n_classes - 1);
  return out;
}

namespace {

constexpr char kCheckpointMagic[16] = {'P', 'G', 'P', 'S', 'C', 'K', 'P', '1',
                                       0,   0,   0,   0,   0,   0,   0,   0};

void write_bytes(std::ofstream& f, const void* p, std::size_t n) {
  f.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt,
                     const std::filesystem::path& path) {
  nlohmann::json header{{"epoch", ckpt.epoch},
                        {"hidden_channels", ckpt.net.hidden_channels},
                        {"n_classes", ckpt.net.n_classes},
                        {"learning_rate", ckpt.learning_rate},
                        {"momentum", ckpt.momentum},
                        {"max_epochs", ckpt.max_epochs},
                        {"param_count", ckpt.net.parameter_count()}};
  const std::string head = header.dump();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw format_error("cannot open checkpoint for writing: " +
                             path.string());
  write_bytes(f, kCheckpointMagic, sizeof(kCheckpointMagic));
  const std::uint64_t len = head.size();
  write_bytes(f, &len, sizeof(len));
  write_bytes(f, head.data(), head.size());
  for (const auto& view : ckpt.net.param_views())
    write_bytes(f, view.data(), view.size() * sizeof(float));
  if (!f) throw format_error("short write to checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw format_error("cannot open checkpoint: " + path.string());
  char magic[16];
  if (!f.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw format_error("bad checkpoint magic at byte offset 0: " +
                       path.string());
  std::uint64_t len = 0;
  if (!f.read(reinterpret_cast<char*>(&len), sizeof(len)))
    throw format_error("truncated checkpoint header length at byte offset 16");
  if (len > (1u << 20))
    throw format_error("implausible checkpoint header length at byte offset 16");
  std::string head(len, '\0');
  if (!f.read(head.data(), static_cast<std::streamsize>(len)))
    throw format_error("truncated checkpoint header at byte offset 24");
  nlohmann::json j = nlohmann::json::parse(head, nullptr, false);
  if (j.is_discarded())
    throw format_error("checkpoint header is not valid JSON");

  Checkpoint ckpt;
  ckpt.epoch = j.at("epoch").get<std::uint64_t>();
  ckpt.learning_rate = j.at("learning_rate").get<double>();
  ckpt.momentum = j.at("momentum").get<double>();
  ckpt.max_epochs = j.at("max_epochs").get<std::uint64_t>();
  ckpt.net = ToyNet<float>::zeros(j.at("hidden_channels").get<std::uint64_t>(),
                                  j.at("n_classes").get<std::uint64_t>());
  const std::uint64_t expect = j.at("param_count").get<std::uint64_t>();
  if (expect != ckpt.net.parameter_count())
    throw format_error("checkpoint parameter count " + std::to_string(expect) +
                       " does not match declared shapes");
  const std::uint64_t payload_at = 24 + len;
  std::uint64_t read_so_far = 0;
  for (auto view : ckpt.net.param_views()) {
    if (!f.read(reinterpret_cast<char*>(view.data()),
                static_cast<std::streamsize>(view.size() * sizeof(float))))
      throw format_error("truncated checkpoint payload at byte offset " +
                         std::to_string(payload_at +
                                        read_so_far * sizeof(float)));
    read_so_far += view.size();
  }
  return ckpt;
}

template struct ToyNet<float>;
template struct ToyNet<double>;
template struct OptimState<float>;
template struct OptimState<double>;

template TensorBatch<float> forward(const ToyNet<float>&,
                                    const TensorBatch<float>&);
template TensorBatch<double> forward(const ToyNet<double>&,
                                     const TensorBatch<double>&);
template ForwardTrace<float> forward_trace(const ToyNet<float>&,
                                           const TensorBatch<float>&);
template ForwardTrace<double> forward_trace(const ToyNet<double>&,
                                            const TensorBatch<double>&);
template LossResult<float> dice_ce_loss(const TensorBatch<float>&,
                                        const LabelBatch&);
template LossResult<double> dice_ce_loss(const TensorBatch<double>&,
                                         const LabelBatch&);
template NetGrads<float> backward(const ToyNet<float>&,
                                  const ForwardTrace<float>&,
                                  const TensorBatch<float>&);
template NetGrads<double> backward(const ToyNet<double>&,
                                   const ForwardTrace<double>&,
                                   const TensorBatch<double>&);
template double train_step(ToyNet<float>&, OptimState<float>&,
                           const TensorBatch<float>&, const LabelBatch&,
                           std::uint64_t);
template double train_step(ToyNet<double>&, OptimState<double>&,
                           const TensorBatch<double>&, const LabelBatch&,
                           std::uint64_t);
template LabelBatch argmax_labels(const TensorBatch<float>&);
template LabelBatch argmax_labels(const TensorBatch<double>&);

}  // namespace pgps
