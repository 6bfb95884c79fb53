#include "effnet/reference.hpp"

#include <cmath>

namespace effnet::ref {

namespace {

std::int64_t out_extent(std::int64_t in, std::int64_t k, std::int64_t s, bool same_pad) {
    if (same_pad) {
        return (in + s - 1) / s;
    }
    return (in - k) / s + 1;
}

std::int64_t pad_before(std::int64_t in, std::int64_t k, std::int64_t s, bool same_pad) {
    if (!same_pad) {
        return 0;
    }
    const std::int64_t out = (in + s - 1) / s;
    std::int64_t total = (out - 1) * s + k - in;
    if (total < 0) total = 0;
    return total / 2;
}

} // namespace

Tensor conv2d(const Tensor& input, const Tensor& weights, const std::vector<double>& bias,
              std::int64_t stride_h, std::int64_t stride_w, bool same_pad, std::int64_t groups) {
    const std::int64_t N = input.shape.n, C = input.shape.c, H = input.shape.h, W = input.shape.w;
    const std::int64_t OC = weights.shape.n, KH = weights.shape.h, KW = weights.shape.w;
    const std::int64_t cpg_in = C / groups;
    const std::int64_t cpg_out = OC / groups;
    const std::int64_t OH = out_extent(H, KH, stride_h, same_pad);
    const std::int64_t OW = out_extent(W, KW, stride_w, same_pad);
    const std::int64_t ph = pad_before(H, KH, stride_h, same_pad);
    const std::int64_t pw = pad_before(W, KW, stride_w, same_pad);

    Tensor out({N, OC, OH, OW});
    for (std::int64_t n = 0; n < N; ++n)
        for (std::int64_t oc = 0; oc < OC; ++oc)
            for (std::int64_t oy = 0; oy < OH; ++oy)
                for (std::int64_t ox = 0; ox < OW; ++ox) {
                    double acc = bias.empty() ? 0.0 : bias[static_cast<std::size_t>(oc)];
                    const std::int64_t g = oc / cpg_out;
                    for (std::int64_t ic = 0; ic < cpg_in; ++ic)
                        for (std::int64_t ky = 0; ky < KH; ++ky)
                            for (std::int64_t kx = 0; kx < KW; ++kx) {
                                const std::int64_t iy = oy * stride_h + ky - ph;
                                const std::int64_t ix = ox * stride_w + kx - pw;
                                if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                                acc += input.at(n, g * cpg_in + ic, iy, ix) *
                                       weights.at(oc, ic, ky, kx);
                            }
                    out.at(n, oc, oy, ox) = acc;
                }
    return out;
}

Tensor depthwise_conv2d(const Tensor& input, const Tensor& weights,
                        const std::vector<double>& bias, std::int64_t stride_h,
                        std::int64_t stride_w, bool same_pad, std::int64_t multiplier) {
    const std::int64_t N = input.shape.n, C = input.shape.c, H = input.shape.h, W = input.shape.w;
    const std::int64_t KH = weights.shape.h, KW = weights.shape.w;
    const std::int64_t OH = out_extent(H, KH, stride_h, same_pad);
    const std::int64_t OW = out_extent(W, KW, stride_w, same_pad);
    const std::int64_t ph = pad_before(H, KH, stride_h, same_pad);
    const std::int64_t pw = pad_before(W, KW, stride_w, same_pad);

    Tensor out({N, C * multiplier, OH, OW});
    for (std::int64_t n = 0; n < N; ++n)
        for (std::int64_t c = 0; c < C; ++c)
            for (std::int64_t m = 0; m < multiplier; ++m) {
                const std::int64_t oc = c * multiplier + m;
                for (std::int64_t oy = 0; oy < OH; ++oy)
                    for (std::int64_t ox = 0; ox < OW; ++ox) {
                        double acc = bias.empty() ? 0.0 : bias[static_cast<std::size_t>(oc)];
                        for (std::int64_t ky = 0; ky < KH; ++ky)
                            for (std::int64_t kx = 0; kx < KW; ++kx) {
                                const std::int64_t iy = oy * stride_h + ky - ph;
                                const std::int64_t ix = ox * stride_w + kx - pw;
                                if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                                acc += input.at(n, c, iy, ix) * weights.at(oc, 0, ky, kx);
                            }
                        out.at(n, oc, oy, ox) = acc;
                    }
            }
    return out;
}

Tensor max_pool2d(const Tensor& input, std::int64_t kernel_h, std::int64_t kernel_w,
                  std::int64_t stride_h, std::int64_t stride_w) {
    const std::int64_t N = input.shape.n, C = input.shape.c, H = input.shape.h, W = input.shape.w;
    const std::int64_t OH = (H - kernel_h) / stride_h + 1;
    const std::int64_t OW = (W - kernel_w) / stride_w + 1;
    Tensor out({N, C, OH, OW});
    for (std::int64_t n = 0; n < N; ++n)
        for (std::int64_t c = 0; c < C; ++c)
            for (std::int64_t oy = 0; oy < OH; ++oy)
                for (std::int64_t ox = 0; ox < OW; ++ox) {
                    double best = input.at(n, c, oy * stride_h, ox * stride_w);
                    for (std::int64_t ky = 0; ky < kernel_h; ++ky)
                        for (std::int64_t kx = 0; kx < kernel_w; ++kx) {
                            const double v = input.at(n, c, oy * stride_h + ky, ox * stride_w + kx);
                            if (v > best) best = v;
                        }
                    out.at(n, c, oy, ox) = best;
                }
    return out;
}

Tensor batch_norm(const Tensor& input, const std::vector<double>& gamma,
                  const std::vector<double>& beta, const std::vector<double>& running_mean,
                  const std::vector<double>& running_var, double epsilon, bool train) {
    const std::int64_t N = input.shape.n, C = input.shape.c, H = input.shape.h, W = input.shape.w;
    Tensor out(input.shape);
    for (std::int64_t c = 0; c < C; ++c) {
        double mean = 0.0;
        double var = 0.0;
        if (train) {
            std::int64_t count = 0;
            for (std::int64_t n = 0; n < N; ++n)
                for (std::int64_t y = 0; y < H; ++y)
                    for (std::int64_t x = 0; x < W; ++x) {
                        mean += input.at(n, c, y, x);
                        ++count;
                    }
            mean /= static_cast<double>(count);
            for (std::int64_t n = 0; n < N; ++n)
                for (std::int64_t y = 0; y < H; ++y)
                    for (std::int64_t x = 0; x < W; ++x) {
                        const double d = input.at(n, c, y, x) - mean;
                        var += d * d;
                    }
            var /= static_cast<double>(count);
        } else {
            mean = running_mean[static_cast<std::size_t>(c)];
            var = running_var[static_cast<std::size_t>(c)];
        }
        for (std::int64_t n = 0; n < N; ++n)
            for (std::int64_t y = 0; y < H; ++y)
                for (std::int64_t x = 0; x < W; ++x)
                    out.at(n, c, y, x) = gamma[static_cast<std::size_t>(c)] *
                                             (input.at(n, c, y, x) - mean) /
                                             std::sqrt(var + epsilon) +
                                         beta[static_cast<std::size_t>(c)];
    }
    return out;
}

Tensor channel_shuffle(const Tensor& input, std::int64_t groups) {
    const std::int64_t N = input.shape.n, C = input.shape.c, H = input.shape.h, W = input.shape.w;
    const std::int64_t cpg = C / groups;
    Tensor out(input.shape);
    for (std::int64_t n = 0; n < N; ++n)
        for (std::int64_t dst = 0; dst < C; ++dst) {
            // dst = i*groups + g  <=>  src = g*cpg + i
            const std::int64_t g = dst % groups;
            const std::int64_t i = dst / groups;
            const std::int64_t src = g * cpg + i;
            for (std::int64_t y = 0; y < H; ++y)
                for (std::int64_t x = 0; x < W; ++x)
                    out.at(n, dst, y, x) = input.at(n, src, y, x);
        }
    return out;
}

Tensor fully_connected(const Tensor& input, const Tensor& weights,
                       const std::vector<double>& bias) {
    const std::int64_t N = input.shape.n, D = input.shape.c, O = weights.shape.c;
    Tensor out({N, O, 1, 1});
    for (std::int64_t n = 0; n < N; ++n)
        for (std::int64_t o = 0; o < O; ++o) {
            double acc = bias.empty() ? 0.0 : bias[static_cast<std::size_t>(o)];
            for (std::int64_t d = 0; d < D; ++d)
                acc += input.data[static_cast<std::size_t>(n * D + d)] *
                       weights.data[static_cast<std::size_t>(d * O + o)];
            out.data[static_cast<std::size_t>(n * O + o)] = acc;
        }
    return out;
}

double softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
    const std::int64_t N = logits.shape.n, K = logits.shape.c;
    long double total = 0.0L;
    for (std::int64_t n = 0; n < N; ++n) {
        long double denom = 0.0L;
        for (std::int64_t k = 0; k < K; ++k)
            denom += expl(static_cast<long double>(logits.data[static_cast<std::size_t>(n * K + k)]));
        const long double p =
            expl(static_cast<long double>(
                logits.data[static_cast<std::size_t>(n * K + labels[static_cast<std::size_t>(n)])])) /
            denom;
        total += -logl(p);
    }
    return static_cast<double>(total / static_cast<long double>(N));
}

} // namespace effnet::ref
