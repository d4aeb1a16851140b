#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace pgps {

/// Batch of multi-channel 3D tensors, layout [b][c][x][y][z] with z
/// fastest. Shape order matches Volume: (w, h, d).
template <typename Scalar>
struct TensorBatch {
  std::uint64_t batch = 0;
  std::uint64_t channels = 0;
  std::array<std::uint64_t, 3> shape{0, 0, 0};
  std::vector<Scalar> data;

  static TensorBatch zeros(std::uint64_t batch, std::uint64_t channels,
                           const std::array<std::uint64_t, 3>& shape) {
    TensorBatch t;
    t.batch = batch;
    t.channels = channels;
    t.shape = shape;
    t.data.assign(batch * channels * shape[0] * shape[1] * shape[2],
                  Scalar(0));
    return t;
  }

  std::uint64_t voxels() const { return shape[0] * shape[1] * shape[2]; }
  std::size_t index(std::uint64_t b, std::uint64_t c, std::uint64_t x,
                    std::uint64_t y, std::uint64_t z) const {
    return static_cast<std::size_t>(
        ((((b * channels + c) * shape[0] + x) * shape[1] + y) * shape[2]) + z);
  }
  Scalar at(std::uint64_t b, std::uint64_t c, std::uint64_t x, std::uint64_t y,
            std::uint64_t z) const {
    return data[index(b, c, x, y, z)];
  }
  Scalar& at(std::uint64_t b, std::uint64_t c, std::uint64_t x,
             std::uint64_t y, std::uint64_t z) {
    return data[index(b, c, x, y, z)];
  }
};

/// Per-voxel class ids for a batch, layout [b][x][y][z].
struct LabelBatch {
  std::uint64_t batch = 0;
  std::array<std::uint64_t, 3> shape{0, 0, 0};
  std::vector<std::uint8_t> labels;

  std::uint64_t voxels() const { return shape[0] * shape[1] * shape[2]; }
  std::size_t index(std::uint64_t b, std::uint64_t x, std::uint64_t y,
                    std::uint64_t z) const {
    return static_cast<std::size_t>(
        (((b * shape[0] + x) * shape[1] + y) * shape[2]) + z);
  }
};

/// 3x3x3 zero-padded convolution parameters (or their gradients).
/// Weight layout: [out][in][dx][dy][dz].
template <typename Scalar>
struct ConvLayer {
  std::uint64_t in_channels = 0;
  std::uint64_t out_channels = 0;
  std::vector<Scalar> weights;
  std::vector<Scalar> bias;

  static ConvLayer zeros(std::uint64_t in_channels,
                         std::uint64_t out_channels) {
    ConvLayer l;
    l.in_channels = in_channels;
    l.out_channels = out_channels;
    l.weights.assign(out_channels * in_channels * 27, Scalar(0));
    l.bias.assign(out_channels, Scalar(0));
    return l;
  }
};

/// Minimal fully convolutional segmentation network: two zero-padded 3x3x3
/// convolutions (1 -> hidden, ReLU, hidden -> n_classes) and a per-voxel
/// softmax. Output spatial shape always equals input shape, so one
/// instance handles every patch size in a curriculum. Instantiate with
/// float for training and double for gradient verification.
template <typename Scalar>
struct ToyNet {
  std::uint64_t hidden_channels = 8;
  std::uint64_t n_classes = 2;
  ConvLayer<Scalar> conv1;
  ConvLayer<Scalar> conv2;

  /// He-initialized weights (zero biases) drawn from a counter-based
  /// stream, so the same seed always yields the same network.
  static ToyNet make(std::uint64_t hidden_channels, std::uint64_t n_classes,
                     std::uint64_t seed);
  static ToyNet zeros(std::uint64_t hidden_channels, std::uint64_t n_classes);

  std::uint64_t parameter_count() const {
    return conv1.weights.size() + conv1.bias.size() + conv2.weights.size() +
           conv2.bias.size();
  }

  /// Fixed traversal order (conv1 weights, conv1 bias, conv2 weights,
  /// conv2 bias) shared by the optimizer, gradient checks and checkpoints.
  std::vector<std::span<Scalar>> param_views() {
    return {conv1.weights, conv1.bias, conv2.weights, conv2.bias};
  }
  std::vector<std::span<const Scalar>> param_views() const {
    return {conv1.weights, conv1.bias, conv2.weights, conv2.bias};
  }

  template <typename Other>
  ToyNet<Other> cast() const {
    ToyNet<Other> out = ToyNet<Other>::zeros(hidden_channels, n_classes);
    auto src = param_views();
    auto dst = out.param_views();
    for (std::size_t v = 0; v < src.size(); ++v)
      for (std::size_t i = 0; i < src[v].size(); ++i)
        dst[v][i] = static_cast<Other>(src[v][i]);
    return out;
  }
};

/// Parameter gradients, congruent with ToyNet's layers.
template <typename Scalar>
struct NetGrads {
  ConvLayer<Scalar> conv1;
  ConvLayer<Scalar> conv2;

  std::vector<std::span<Scalar>> param_views() {
    return {conv1.weights, conv1.bias, conv2.weights, conv2.bias};
  }
};

/// Activations kept from a forward pass for the backward pass.
template <typename Scalar>
struct ForwardTrace {
  TensorBatch<Scalar> input;
  TensorBatch<Scalar> hidden;  ///< conv1 output after ReLU
  TensorBatch<Scalar> probs;
};

/// Per-voxel class probabilities; sums to 1 per voxel. Throws
/// numeric_error on any non-finite activation.
template <typename Scalar>
TensorBatch<Scalar> forward(const ToyNet<Scalar>& net,
                            const TensorBatch<Scalar>& input);

template <typename Scalar>
ForwardTrace<Scalar> forward_trace(const ToyNet<Scalar>& net,
                                   const TensorBatch<Scalar>& input);

template <typename Scalar>
struct LossResult {
  double loss = 0.0;       ///< dice_part + ce_part
  double dice_part = 0.0;  ///< 1 - mean soft Dice over foreground classes
  double ce_part = 0.0;    ///< mean per-voxel cross-entropy
  TensorBatch<Scalar> dprobs;  ///< gradient of loss w.r.t. probabilities
};

/// Soft-Dice + cross-entropy. Soft Dice per foreground class is
/// (2*sum(p*g) + eps) / (sum(p) + sum(g) + eps) with eps = 1e-5,
/// accumulated over the whole batch. Throws contract_error on shape
/// mismatch or a label >= probs.channels.
template <typename Scalar>
LossResult<Scalar> dice_ce_loss(const TensorBatch<Scalar>& probs,
                                const LabelBatch& labels);

/// Exact reverse-mode gradients for forward_trace + dice_ce_loss.
template <typename Scalar>
NetGrads<Scalar> backward(const ToyNet<Scalar>& net,
                          const ForwardTrace<Scalar>& trace,
                          const TensorBatch<Scalar>& dprobs);

/// Momentum SGD with polynomial learning-rate decay
/// lr * (1 - epoch/max_epochs)^0.9.
template <typename Scalar>
struct OptimState {
  double learning_rate = 0.01;
  double momentum = 0.9;
  double poly_power = 0.9;
  std::uint64_t max_epochs = 1;
  ConvLayer<Scalar> velocity1;
  ConvLayer<Scalar> velocity2;

  static OptimState make(const ToyNet<Scalar>& net, double learning_rate,
                         double momentum, std::uint64_t max_epochs);
  double decayed_lr(std::uint64_t epoch) const;

  std::vector<std::span<Scalar>> velocity_views() {
    return {velocity1.weights, velocity1.bias, velocity2.weights,
            velocity2.bias};
  }
};

/// One update: v = momentum*v + grad; w -= lr(epoch)*v. Returns the batch
/// loss. Throws numeric_error with a diagnostic if the loss is not finite.
template <typename Scalar>
double train_step(ToyNet<Scalar>& net, OptimState<Scalar>& optim,
                  const TensorBatch<Scalar>& input, const LabelBatch& labels,
                  std::uint64_t epoch);

/// Per-voxel argmax over channels.
template <typename Scalar>
LabelBatch argmax_labels(const TensorBatch<Scalar>& probs);

struct DiceScores {
  /// Indexed by class id; [0] is background and excluded from mean.
  std::vector<double> per_class;
  double mean = 0.0;
};

/// Hard Dice 2|P&G| / (|P| + |G|) per class; a class empty in both maps
/// scores 1. mean averages foreground classes only. n_classes must be >= 2
/// and the spans congruent.
DiceScores dice_score(std::span<const std::uint8_t> predicted,
                      std::span<const std::uint8_t> truth,
                      std::uint64_t n_classes);

/// Checkpoint file: 16-byte magic "PGPSCKP1" (zero padded), u64 header
/// length, JSON header (shapes, optimizer hyperparameters, epoch), then
/// all parameters as little-endian float32 in param_views order.
struct Checkpoint {
  ToyNet<float> net;
  std::uint64_t epoch = 0;
  double learning_rate = 0.0;
  double momentum = 0.0;
  std::uint64_t max_epochs = 0;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace pgps
