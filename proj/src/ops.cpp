#include "effnet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace effnet {

namespace {

// TF-style same padding: total pad so that output = ceil(in/stride).
std::int64_t same_pad_before(std::int64_t in, std::int64_t kernel, std::int64_t stride) {
    const std::int64_t out = (in + stride - 1) / stride;
    const std::int64_t total = std::max<std::int64_t>((out - 1) * stride + kernel - in, 0);
    return total / 2;
}

void check_bias(const std::vector<double>& bias, std::int64_t out_channels, const char* op) {
    if (!bias.empty() && static_cast<std::int64_t>(bias.size()) != out_channels) {
        throw ShapeError(std::string(op) + ": bias length does not match output channels");
    }
}

} // namespace

Shape4 conv_output_shape(Shape4 in, const ConvGeom& g) {
    if (in.c != g.in_channels) {
        std::ostringstream os;
        os << "conv2d: input has " << in.c << " channels, geometry expects " << g.in_channels;
        throw ShapeError(os.str());
    }
    if (g.groups < 1 || g.in_channels % g.groups != 0 || g.out_channels % g.groups != 0) {
        throw ShapeError("conv2d: channel counts must be divisible by groups");
    }
    std::int64_t oh = 0;
    std::int64_t ow = 0;
    if (g.padding == Padding::kSame) {
        oh = (in.h + g.stride_h - 1) / g.stride_h;
        ow = (in.w + g.stride_w - 1) / g.stride_w;
    } else {
        oh = (in.h - g.kernel_h) / g.stride_h + 1;
        ow = (in.w - g.kernel_w) / g.stride_w + 1;
    }
    if (oh < 1 || ow < 1) {
        throw ShapeError("conv2d: output extent < 1 for input " + in.str());
    }
    return {in.n, g.out_channels, oh, ow};
}

Shape4 pool_output_shape(Shape4 in, const PoolGeom& g) {
    if (g.kernel_h < 1 || g.kernel_w < 1 || g.stride_h < 1 || g.stride_w < 1) {
        throw ShapeError("max_pool2d: kernel and stride extents must be >= 1");
    }
    if (g.kernel_h > in.h || g.kernel_w > in.w) {
        throw ShapeError("max_pool2d: window larger than input " + in.str());
    }
    if ((in.h - g.kernel_h) % g.stride_h != 0 || (in.w - g.kernel_w) % g.stride_w != 0) {
        throw ShapeError("max_pool2d: partial windows rejected for input " + in.str());
    }
    return {in.n, in.c, (in.h - g.kernel_h) / g.stride_h + 1, (in.w - g.kernel_w) / g.stride_w + 1};
}

Tensor conv2d(const Tensor& input, const ConvGeom& g, const Tensor& weights,
              const std::vector<double>& bias, MacCounter* macs) {
    const Shape4 out_shape = conv_output_shape(input.shape, g);
    if (weights.shape != g.weight_shape()) {
        throw ShapeError("conv2d: weight shape " + weights.shape.str() + " does not match geometry " +
                         g.weight_shape().str());
    }
    check_bias(bias, g.out_channels, "conv2d");

    const std::int64_t N = input.shape.n, H = input.shape.h, W = input.shape.w;
    const std::int64_t OH = out_shape.h, OW = out_shape.w;
    const std::int64_t cpg_in = g.in_channels / g.groups;
    const std::int64_t cpg_out = g.out_channels / g.groups;
    const std::int64_t pad_h = g.padding == Padding::kSame ? same_pad_before(H, g.kernel_h, g.stride_h) : 0;
    const std::int64_t pad_w = g.padding == Padding::kSame ? same_pad_before(W, g.kernel_w, g.stride_w) : 0;

    Tensor out(out_shape);
    std::uint64_t taps = 0;

    // Each (n, oc) plane is owned by one thread; tap accumulation within an
    // output element is strictly serial, so results are thread-count invariant.
#pragma omp parallel for collapse(2) reduction(+ : taps) schedule(static)
    for (std::int64_t n = 0; n < N; ++n) {
        for (std::int64_t oc = 0; oc < g.out_channels; ++oc) {
            const std::int64_t grp = oc / cpg_out;
            const std::int64_t ic0 = grp * cpg_in;
            const double b = bias.empty() ? 0.0 : bias[static_cast<std::size_t>(oc)];
            for (std::int64_t oy = 0; oy < OH; ++oy) {
                for (std::int64_t ox = 0; ox < OW; ++ox) {
                    double acc = 0.0;
                    for (std::int64_t ic = 0; ic < cpg_in; ++ic) {
                        for (std::int64_t ky = 0; ky < g.kernel_h; ++ky) {
                            const std::int64_t iy = oy * g.stride_h + ky - pad_h;
                            for (std::int64_t kx = 0; kx < g.kernel_w; ++kx) {
                                const std::int64_t ix = ox * g.stride_w + kx - pad_w;
                                const bool inside = iy >= 0 && iy < H && ix >= 0 && ix < W;
                                const double v = inside ? input.at(n, ic0 + ic, iy, ix) : 0.0;
                                acc += v * weights.at(oc, ic, ky, kx);
                                ++taps;
                            }
                        }
                    }
                    out.at(n, oc, oy, ox) = acc + b;
                }
            }
        }
    }
    if (macs != nullptr) {
        macs->macs += taps;
    }
    return out;
}

Tensor depthwise_conv2d(const Tensor& input, const ConvGeom& g, const Tensor& weights,
                        const std::vector<double>& bias, MacCounter* macs) {
    if (!g.depthwise() || g.out_channels % g.in_channels != 0) {
        throw ShapeError("depthwise_conv2d: geometry must have groups == in_channels and "
                         "out_channels a multiple of in_channels");
    }
    return conv2d(input, g, weights, bias, macs);
}

Tensor max_pool2d(const Tensor& input, const PoolGeom& g, std::vector<std::int64_t>* argmax_out) {
    const Shape4 out_shape = pool_output_shape(input.shape, g);
    Tensor out(out_shape);
    if (argmax_out != nullptr) {
        argmax_out->assign(static_cast<std::size_t>(out_shape.count()), -1);
    }
    const std::int64_t N = input.shape.n, C = input.shape.c;
    const std::int64_t OH = out_shape.h, OW = out_shape.w;

#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t n = 0; n < N; ++n) {
        for (std::int64_t c = 0; c < C; ++c) {
            for (std::int64_t oy = 0; oy < OH; ++oy) {
                for (std::int64_t ox = 0; ox < OW; ++ox) {
                    double best = -std::numeric_limits<double>::infinity();
                    std::int64_t best_idx = -1;
                    for (std::int64_t ky = 0; ky < g.kernel_h; ++ky) {
                        for (std::int64_t kx = 0; kx < g.kernel_w; ++kx) {
                            const std::int64_t iy = oy * g.stride_h + ky;
                            const std::int64_t ix = ox * g.stride_w + kx;
                            const double v = input.at(n, c, iy, ix);
                            if (v > best) { // first occurrence wins on ties
                                best = v;
                                best_idx = input.index(n, c, iy, ix);
                            }
                        }
                    }
                    out.at(n, c, oy, ox) = best;
                    if (argmax_out != nullptr) {
                        (*argmax_out)[static_cast<std::size_t>(out.index(n, c, oy, ox))] = best_idx;
                    }
                }
            }
        }
    }
    return out;
}

Tensor batch_norm(const Tensor& input, const BnParams& p, BnState& state, Mode mode,
                  BnCache* cache) {
    const std::int64_t C = input.shape.c;
    if (static_cast<std::int64_t>(p.gamma.size()) != C ||
        static_cast<std::int64_t>(p.beta.size()) != C ||
        static_cast<std::int64_t>(state.running_mean.size()) != C ||
        static_cast<std::int64_t>(state.running_var.size()) != C) {
        throw ShapeError("batch_norm: parameter arrays do not match channel count");
    }
    const std::int64_t N = input.shape.n, H = input.shape.h, W = input.shape.w;
    const std::int64_t per_channel = N * H * W;
    Tensor out(input.shape);
    if (cache != nullptr) {
        cache->mean.assign(static_cast<std::size_t>(C), 0.0);
        cache->inv_std.assign(static_cast<std::size_t>(C), 0.0);
    }

#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < C; ++c) {
        double mean = 0.0;
        double var = 0.0;
        if (mode == Mode::kTrain) {
            double sum = 0.0;
            for (std::int64_t n = 0; n < N; ++n)
                for (std::int64_t y = 0; y < H; ++y)
                    for (std::int64_t x = 0; x < W; ++x)
                        sum += input.at(n, c, y, x);
            mean = sum / static_cast<double>(per_channel);
            double sq = 0.0;
            for (std::int64_t n = 0; n < N; ++n)
                for (std::int64_t y = 0; y < H; ++y)
                    for (std::int64_t x = 0; x < W; ++x) {
                        const double d = input.at(n, c, y, x) - mean;
                        sq += d * d;
                    }
            var = sq / static_cast<double>(per_channel);
            state.running_mean[static_cast<std::size_t>(c)] =
                p.momentum * state.running_mean[static_cast<std::size_t>(c)] + (1.0 - p.momentum) * mean;
            state.running_var[static_cast<std::size_t>(c)] =
                p.momentum * state.running_var[static_cast<std::size_t>(c)] + (1.0 - p.momentum) * var;
        } else {
            mean = state.running_mean[static_cast<std::size_t>(c)];
            var = state.running_var[static_cast<std::size_t>(c)];
        }
        const double inv_std = 1.0 / std::sqrt(var + p.epsilon);
        const double gamma = p.gamma[static_cast<std::size_t>(c)];
        const double beta = p.beta[static_cast<std::size_t>(c)];
        for (std::int64_t n = 0; n < N; ++n)
            for (std::int64_t y = 0; y < H; ++y)
                for (std::int64_t x = 0; x < W; ++x)
                    out.at(n, c, y, x) = gamma * (input.at(n, c, y, x) - mean) * inv_std + beta;
        if (cache != nullptr) {
            cache->mean[static_cast<std::size_t>(c)] = mean;
            cache->inv_std[static_cast<std::size_t>(c)] = inv_std;
        }
    }
    return out;
}

Tensor activation(const Tensor& input, ActKind kind, double leaky_alpha) {
    if (kind == ActKind::kLinear) {
        return input;
    }
    Tensor out(input.shape);
    const std::int64_t total = input.size();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < total; ++i) {
        const double x = input.data[static_cast<std::size_t>(i)];
        out.data[static_cast<std::size_t>(i)] =
            kind == ActKind::kRelu ? std::max(x, 0.0) : (x >= 0.0 ? x : leaky_alpha * x);
    }
    return out;
}

Tensor channel_shuffle(const Tensor& input, std::int64_t groups) {
    const std::int64_t C = input.shape.c;
    if (groups < 1 || C % groups != 0) {
        throw ShapeError("channel_shuffle: channel count not divisible by groups");
    }
    if (groups == 1) {
        return input;
    }
    const std::int64_t cpg = C / groups;
    const std::int64_t plane = input.shape.h * input.shape.w;
    Tensor out(input.shape);
#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t n = 0; n < input.shape.n; ++n) {
        for (std::int64_t g = 0; g < groups; ++g) {
            for (std::int64_t i = 0; i < cpg; ++i) {
                const std::int64_t src = g * cpg + i;
                const std::int64_t dst = i * groups + g;
                const double* s = input.data.data() + (n * C + src) * plane;
                double* d = out.data.data() + (n * C + dst) * plane;
                std::copy(s, s + plane, d);
            }
        }
    }
    return out;
}

Tensor fully_connected(const Tensor& input, const Tensor& weights,
                       const std::vector<double>& bias, MacCounter* macs) {
    if (input.shape.h != 1 || input.shape.w != 1) {
        throw ShapeError("fully_connected: input must be flattened to (N, D, 1, 1)");
    }
    const std::int64_t N = input.shape.n, D = input.shape.c;
    if (weights.shape.n != D || weights.shape.h != 1 || weights.shape.w != 1) {
        throw ShapeError("fully_connected: weight rows do not match flattened input length");
    }
    const std::int64_t O = weights.shape.c;
    check_bias(bias, O, "fully_connected");

    Tensor out({N, O, 1, 1});
    std::uint64_t taps = 0;
#pragma omp parallel for collapse(2) reduction(+ : taps) schedule(static)
    for (std::int64_t n = 0; n < N; ++n) {
        for (std::int64_t o = 0; o < O; ++o) {
            double acc = bias.empty() ? 0.0 : bias[static_cast<std::size_t>(o)];
            for (std::int64_t d = 0; d < D; ++d) {
                acc += input.data[static_cast<std::size_t>(n * D + d)] *
                       weights.data[static_cast<std::size_t>(d * O + o)];
                ++taps;
            }
            out.data[static_cast<std::size_t>(n * O + o)] = acc;
        }
    }
    if (macs != nullptr) {
        macs->macs += taps;
    }
    return out;
}

Tensor dropout(const Tensor& input, double p_drop, Mode mode, Rng* rng, Tensor* mask_out) {
    if (p_drop < 0.0 || p_drop >= 1.0) {
        throw Error("dropout: p_drop must be in [0, 1)");
    }
    if (mode == Mode::kInfer || p_drop == 0.0) {
        if (mask_out != nullptr) {
            *mask_out = Tensor::constant(input.shape, 1.0);
        }
        return input;
    }
    if (rng == nullptr) {
        throw Error("dropout: train mode requires an rng");
    }
    const double keep_scale = 1.0 / (1.0 - p_drop);
    Tensor out(input.shape);
    Tensor mask(input.shape);
    // Serial draw keeps the stream identical regardless of thread count.
    for (std::size_t i = 0; i < input.data.size(); ++i) {
        const double m = rng->next_uniform() < p_drop ? 0.0 : keep_scale;
        mask.data[i] = m;
        out.data[i] = input.data[i] * m;
    }
    if (mask_out != nullptr) {
        *mask_out = std::move(mask);
    }
    return out;
}

LossResult softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
    if (logits.shape.h != 1 || logits.shape.w != 1) {
        throw ShapeError("softmax_cross_entropy: logits must be (N, K, 1, 1)");
    }
    const std::int64_t N = logits.shape.n, K = logits.shape.c;
    if (static_cast<std::int64_t>(labels.size()) != N) {
        throw ShapeError("softmax_cross_entropy: label count does not match batch");
    }
    LossResult res;
    res.probs = Tensor(logits.shape);
    double loss_sum = 0.0;
    for (std::int64_t n = 0; n < N; ++n) {
        const int label = labels[static_cast<std::size_t>(n)];
        if (label < 0 || label >= K) {
            throw Error("softmax_cross_entropy: label out of range");
        }
        const double* row = logits.data.data() + n * K;
        double mx = row[0];
        for (std::int64_t k = 1; k < K; ++k) {
            mx = std::max(mx, row[k]);
        }
        double denom = 0.0;
        for (std::int64_t k = 0; k < K; ++k) {
            denom += std::exp(row[k] - mx);
        }
        double* prow = res.probs.data.data() + n * K;
        for (std::int64_t k = 0; k < K; ++k) {
            prow[k] = std::exp(row[k] - mx) / denom;
        }
        loss_sum += -(row[label] - mx - std::log(denom));
    }
    res.loss = loss_sum / static_cast<double>(N);
    return res;
}

Tensor softmax_cross_entropy_backward(const Tensor& probs, const std::vector<int>& labels) {
    const std::int64_t N = probs.shape.n, K = probs.shape.c;
    Tensor d(probs.shape);
    for (std::int64_t n = 0; n < N; ++n) {
        for (std::int64_t k = 0; k < K; ++k) {
            const double onehot = labels[static_cast<std::size_t>(n)] == k ? 1.0 : 0.0;
            d.data[static_cast<std::size_t>(n * K + k)] =
                (probs.data[static_cast<std::size_t>(n * K + k)] - onehot) / static_cast<double>(N);
        }
    }
    return d;
}

ConvGrads conv2d_backward(const Tensor& input, const ConvGeom& g, const Tensor& weights,
                          bool has_bias, const Tensor& d_out) {
    const Shape4 out_shape = conv_output_shape(input.shape, g);
    if (d_out.shape != out_shape) {
        throw ShapeError("conv2d_backward: upstream gradient shape mismatch");
    }
    const std::int64_t N = input.shape.n, H = input.shape.h, W = input.shape.w;
    const std::int64_t OH = out_shape.h, OW = out_shape.w;
    const std::int64_t cpg_in = g.in_channels / g.groups;
    const std::int64_t cpg_out = g.out_channels / g.groups;
    const std::int64_t pad_h = g.padding == Padding::kSame ? same_pad_before(H, g.kernel_h, g.stride_h) : 0;
    const std::int64_t pad_w = g.padding == Padding::kSame ? same_pad_before(W, g.kernel_w, g.stride_w) : 0;

    ConvGrads grads;
    grads.d_input = Tensor(input.shape);
    grads.d_weights = Tensor(weights.shape);
    if (has_bias) {
        grads.d_bias.assign(static_cast<std::size_t>(g.out_channels), 0.0);
    }

    // d_weights and d_bias: each thread owns one output channel.
#pragma omp parallel for schedule(static)
    for (std::int64_t oc = 0; oc < g.out_channels; ++oc) {
        const std::int64_t grp = oc / cpg_out;
        const std::int64_t ic0 = grp * cpg_in;
        double db = 0.0;
        for (std::int64_t n = 0; n < N; ++n) {
            for (std::int64_t oy = 0; oy < OH; ++oy) {
                for (std::int64_t ox = 0; ox < OW; ++ox) {
                    const double go = d_out.at(n, oc, oy, ox);
                    db += go;
                    for (std::int64_t ic = 0; ic < cpg_in; ++ic) {
                        for (std::int64_t ky = 0; ky < g.kernel_h; ++ky) {
                            const std::int64_t iy = oy * g.stride_h + ky - pad_h;
                            if (iy < 0 || iy >= H) continue;
                            for (std::int64_t kx = 0; kx < g.kernel_w; ++kx) {
                                const std::int64_t ix = ox * g.stride_w + kx - pad_w;
                                if (ix < 0 || ix >= W) continue;
                                grads.d_weights.at(oc, ic, ky, kx) +=
                                    go * input.at(n, ic0 + ic, iy, ix);
                            }
                        }
                    }
                }
            }
        }
        if (has_bias) {
            grads.d_bias[static_cast<std::size_t>(oc)] = db;
        }
    }

    // d_input: each thread owns one (n, ic) plane.
#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t n = 0; n < N; ++n) {
        for (std::int64_t ic_full = 0; ic_full < g.in_channels; ++ic_full) {
            const std::int64_t grp = ic_full / cpg_in;
            const std::int64_t ic = ic_full - grp * cpg_in;
            for (std::int64_t oc = grp * cpg_out; oc < (grp + 1) * cpg_out; ++oc) {
                for (std::int64_t oy = 0; oy < OH; ++oy) {
                    for (std::int64_t ox = 0; ox < OW; ++ox) {
                        const double go = d_out.at(n, oc, oy, ox);
                        for (std::int64_t ky = 0; ky < g.kernel_h; ++ky) {
                            const std::int64_t iy = oy * g.stride_h + ky - pad_h;
                            if (iy < 0 || iy >= H) continue;
                            for (std::int64_t kx = 0; kx < g.kernel_w; ++kx) {
                                const std::int64_t ix = ox * g.stride_w + kx - pad_w;
                                if (ix < 0 || ix >= W) continue;
                                grads.d_input.at(n, ic_full, iy, ix) +=
                                    go * weights.at(oc, ic, ky, kx);
                            }
                        }
                    }
                }
            }
        }
    }
    return grads;
}

Tensor max_pool2d_backward(Shape4 input_shape, const std::vector<std::int64_t>& argmax,
                           const Tensor& d_out) {
    Tensor d_in(input_shape);
    if (argmax.size() != d_out.data.size()) {
        throw ShapeError("max_pool2d_backward: argmax record does not match gradient");
    }
    // Scatter within one (n, c) plane stays on one thread; with non-overlapping
    // windows the planes never alias.
    const std::int64_t planes = d_out.shape.n * d_out.shape.c;
    const std::int64_t out_plane = d_out.shape.h * d_out.shape.w;
#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < planes; ++p) {
        for (std::int64_t i = 0; i < out_plane; ++i) {
            const std::int64_t flat = p * out_plane + i;
            d_in.data[static_cast<std::size_t>(argmax[static_cast<std::size_t>(flat)])] +=
                d_out.data[static_cast<std::size_t>(flat)];
        }
    }
    return d_in;
}

BnGrads batch_norm_backward(const Tensor& input, const BnParams& p, const BnState& state,
                            Mode mode, const BnCache& cache, const Tensor& d_out) {
    const std::int64_t N = input.shape.n, C = input.shape.c, H = input.shape.h, W = input.shape.w;
    const double m = static_cast<double>(N * H * W);
    BnGrads grads;
    grads.d_input = Tensor(input.shape);
    grads.d_gamma.assign(static_cast<std::size_t>(C), 0.0);
    grads.d_beta.assign(static_cast<std::size_t>(C), 0.0);

#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < C; ++c) {
        const double mean = mode == Mode::kTrain ? cache.mean[static_cast<std::size_t>(c)]
                                                 : state.running_mean[static_cast<std::size_t>(c)];
        const double inv_std = mode == Mode::kTrain
                                   ? cache.inv_std[static_cast<std::size_t>(c)]
                                   : 1.0 / std::sqrt(state.running_var[static_cast<std::size_t>(c)] +
                                                     p.epsilon);
        const double gamma = p.gamma[static_cast<std::size_t>(c)];
        double sum_dy = 0.0;
        double sum_dy_xhat = 0.0;
        for (std::int64_t n = 0; n < N; ++n)
            for (std::int64_t y = 0; y < H; ++y)
                for (std::int64_t x = 0; x < W; ++x) {
                    const double dy = d_out.at(n, c, y, x);
                    const double xhat = (input.at(n, c, y, x) - mean) * inv_std;
                    sum_dy += dy;
                    sum_dy_xhat += dy * xhat;
                }
        grads.d_beta[static_cast<std::size_t>(c)] = sum_dy;
        grads.d_gamma[static_cast<std::size_t>(c)] = sum_dy_xhat;
        for (std::int64_t n = 0; n < N; ++n)
            for (std::int64_t y = 0; y < H; ++y)
                for (std::int64_t x = 0; x < W; ++x) {
                    const double dy = d_out.at(n, c, y, x);
                    if (mode == Mode::kTrain) {
                        const double xhat = (input.at(n, c, y, x) - mean) * inv_std;
                        grads.d_input.at(n, c, y, x) =
                            gamma * inv_std * (dy - sum_dy / m - xhat * sum_dy_xhat / m);
                    } else {
                        grads.d_input.at(n, c, y, x) = gamma * inv_std * dy;
                    }
                }
    }
    return grads;
}

Tensor activation_backward(const Tensor& input, ActKind kind, double leaky_alpha,
                           const Tensor& d_out) {
    if (kind == ActKind::kLinear) {
        return d_out;
    }
    Tensor d_in(input.shape);
    const std::int64_t total = input.size();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < total; ++i) {
        const double x = input.data[static_cast<std::size_t>(i)];
        const double slope = kind == ActKind::kRelu ? (x > 0.0 ? 1.0 : 0.0)
                                                    : (x >= 0.0 ? 1.0 : leaky_alpha);
        d_in.data[static_cast<std::size_t>(i)] = d_out.data[static_cast<std::size_t>(i)] * slope;
    }
    return d_in;
}

Tensor channel_shuffle_backward(const Tensor& d_out, std::int64_t groups) {
    const std::int64_t C = d_out.shape.c;
    if (groups < 1 || C % groups != 0) {
        throw ShapeError("channel_shuffle_backward: channel count not divisible by groups");
    }
    // Inverse of out[i*G+g] = in[g*(C/G)+i] is a shuffle with C/groups groups.
    return channel_shuffle(d_out, C / groups);
}

FcGrads fully_connected_backward(const Tensor& input, const Tensor& weights, const Tensor& d_out) {
    const std::int64_t N = input.shape.n, D = input.shape.c, O = weights.shape.c;
    if (d_out.shape.n != N || d_out.shape.c != O) {
        throw ShapeError("fully_connected_backward: upstream gradient shape mismatch");
    }
    FcGrads grads;
    grads.d_input = Tensor(input.shape);
    grads.d_weights = Tensor(weights.shape);
    grads.d_bias.assign(static_cast<std::size_t>(O), 0.0);
    for (std::int64_t n = 0; n < N; ++n) {
        for (std::int64_t o = 0; o < O; ++o) {
            const double go = d_out.data[static_cast<std::size_t>(n * O + o)];
            grads.d_bias[static_cast<std::size_t>(o)] += go;
            for (std::int64_t d = 0; d < D; ++d) {
                grads.d_weights.data[static_cast<std::size_t>(d * O + o)] +=
                    go * input.data[static_cast<std::size_t>(n * D + d)];
                grads.d_input.data[static_cast<std::size_t>(n * D + d)] +=
                    go * weights.data[static_cast<std::size_t>(d * O + o)];
            }
        }
    }
    return grads;
}

Tensor dropout_backward(const Tensor& mask, const Tensor& d_out) {
    if (mask.shape != d_out.shape) {
        throw ShapeError("dropout_backward: mask shape mismatch");
    }
    Tensor d_in(d_out.shape);
    const std::int64_t total = d_out.size();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < total; ++i) {
        d_in.data[static_cast<std::size_t>(i)] =
            d_out.data[static_cast<std::size_t>(i)] * mask.data[static_cast<std::size_t>(i)];
    }
    return d_in;
}

} // namespace effnet
