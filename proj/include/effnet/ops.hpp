#ifndef EFFNET_OPS_HPP
#define EFFNET_OPS_HPP

#include <cstdint>
#include <vector>

#include "effnet/tensor.hpp"

namespace effnet {

enum class Mode { kTrain, kInfer };

enum class Padding { kSame, kValid };

enum class ActKind { kRelu, kLeakyRelu, kLinear };

// Counts multiply-accumulates actually executed by the convolution and
// fully-connected kernels (zero-padding taps included; bias adds excluded).
struct MacCounter {
    std::uint64_t macs = 0;
};

struct ConvGeom {
    std::int64_t kernel_h = 1;
    std::int64_t kernel_w = 1;
    std::int64_t in_channels = 1;
    std::int64_t out_channels = 1;
    std::int64_t stride_h = 1;
    std::int64_t stride_w = 1;
    Padding padding = Padding::kSame;
    std::int64_t groups = 1;

    bool depthwise() const { return groups == in_channels; }
    std::int64_t weight_count() const {
        return out_channels * (in_channels / groups) * kernel_h * kernel_w;
    }
    Shape4 weight_shape() const {
        return {out_channels, in_channels / groups, kernel_h, kernel_w};
    }
};

struct PoolGeom {
    std::int64_t kernel_h = 1;
    std::int64_t kernel_w = 1;
    std::int64_t stride_h = 1;
    std::int64_t stride_w = 1;
};

struct BnParams {
    std::vector<double> gamma;
    std::vector<double> beta;
    double epsilon = 1e-5;
    double momentum = 0.9; // retention factor for the running averages
};

struct BnState {
    std::vector<double> running_mean;
    std::vector<double> running_var;
};

// Per-channel batch statistics saved by the training forward pass.
struct BnCache {
    std::vector<double> mean;
    std::vector<double> inv_std;
};

// Output extents for a convolution; same padding gives ceil(in/stride),
// valid padding gives floor((in-k)/stride)+1. Throws on degenerate output.
Shape4 conv_output_shape(Shape4 in, const ConvGeom& g);

// Pool output requires full window coverage: kernel <= extent and
// (extent - kernel) divisible by stride. Partial windows are rejected.
Shape4 pool_output_shape(Shape4 in, const PoolGeom& g);

// weights laid out [out_channels, in_channels/groups, kernel_h, kernel_w];
// bias is per output channel and may be empty. Grouped and depthwise forms
// are both expressed through `groups`.
Tensor conv2d(const Tensor& input, const ConvGeom& g, const Tensor& weights,
              const std::vector<double>& bias, MacCounter* macs = nullptr);

// groups == in_channels, out_channels == in_channels * depth_multiplier;
// output channel c*m+k depends only on input channel c.
Tensor depthwise_conv2d(const Tensor& input, const ConvGeom& g, const Tensor& weights,
                        const std::vector<double>& bias, MacCounter* macs = nullptr);

// argmax_out, when non-null, receives the flat input index of each window
// maximum (first occurrence wins on ties) for gradient routing.
Tensor max_pool2d(const Tensor& input, const PoolGeom& g,
                  std::vector<std::int64_t>* argmax_out = nullptr);

// Train mode normalizes by batch statistics (biased variance) and updates the
// running averages: running = momentum*running + (1-momentum)*batch.
// Infer mode uses the running statistics.
Tensor batch_norm(const Tensor& input, const BnParams& p, BnState& state, Mode mode,
                  BnCache* cache = nullptr);

Tensor activation(const Tensor& input, ActKind kind, double leaky_alpha = 0.01);

// Channel g*(C/groups)+i moves to i*groups+g; spatial data untouched.
Tensor channel_shuffle(const Tensor& input, std::int64_t groups);

// input must be flattened to (N, D, 1, 1); weights [D, out]; bias [out].
Tensor fully_connected(const Tensor& input, const Tensor& weights,
                       const std::vector<double>& bias, MacCounter* macs = nullptr);

// Inverted dropout: train mode zeroes with probability p_drop and scales
// survivors by 1/(1-p_drop); infer mode is the identity. mask_out, when
// non-null, receives the applied elementwise factors.
Tensor dropout(const Tensor& input, double p_drop, Mode mode, Rng* rng,
               Tensor* mask_out = nullptr);

struct LossResult {
    double loss = 0.0;
    Tensor probs;
};

// logits (N, K, 1, 1); labels in [0, K). Stabilized by max subtraction;
// loss is the batch mean of -log softmax(logits)[label].
LossResult softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels);

// d loss / d logits = (probs - onehot) / N.
Tensor softmax_cross_entropy_backward(const Tensor& probs, const std::vector<int>& labels);

// ---- backward kernels ----

struct ConvGrads {
    Tensor d_input;
    Tensor d_weights;
    std::vector<double> d_bias;
};

ConvGrads conv2d_backward(const Tensor& input, const ConvGeom& g, const Tensor& weights,
                          bool has_bias, const Tensor& d_out);

Tensor max_pool2d_backward(Shape4 input_shape, const std::vector<std::int64_t>& argmax,
                           const Tensor& d_out);

struct BnGrads {
    Tensor d_input;
    std::vector<double> d_gamma;
    std::vector<double> d_beta;
};

BnGrads batch_norm_backward(const Tensor& input, const BnParams& p, const BnState& state,
                            Mode mode, const BnCache& cache, const Tensor& d_out);

// ReLU subgradient at 0 is 0; the leaky slope applies for x < 0.
Tensor activation_backward(const Tensor& input, ActKind kind, double leaky_alpha,
                           const Tensor& d_out);

// Gradient of the shuffle is the inverse channel permutation.
Tensor channel_shuffle_backward(const Tensor& d_out, std::int64_t groups);

struct FcGrads {
    Tensor d_input;
    Tensor d_weights;
    std::vector<double> d_bias;
};

FcGrads fully_connected_backward(const Tensor& input, const Tensor& weights, const Tensor& d_out);

Tensor dropout_backward(const Tensor& mask, const Tensor& d_out);

} // namespace effnet

#endif // EFFNET_OPS_HPP
