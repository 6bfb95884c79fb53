#ifndef EFFNET_REFERENCE_HPP
#define EFFNET_REFERENCE_HPP

#include <cstdint>
#include <vector>

#include "effnet/tensor.hpp"

// Serial brute-force implementations kept as oracles for the parallel kernels.
// Everything here is derived from first principles with plain nested loops and
// its own shape arithmetic; nothing is shared with the optimized path beyond
// the Tensor value type. Linked only by tests and the benchmark.
namespace effnet::ref {

// weights [out_ch, in_ch/groups, kh, kw]; zero padding when same_pad.
Tensor conv2d(const Tensor& input, const Tensor& weights, const std::vector<double>& bias,
              std::int64_t stride_h, std::int64_t stride_w, bool same_pad, std::int64_t groups);

// weights [in_ch*multiplier, 1, kh, kw].
Tensor depthwise_conv2d(const Tensor& input, const Tensor& weights,
                        const std::vector<double>& bias, std::int64_t stride_h,
                        std::int64_t stride_w, bool same_pad, std::int64_t multiplier);

Tensor max_pool2d(const Tensor& input, std::int64_t kernel_h, std::int64_t kernel_w,
                  std::int64_t stride_h, std::int64_t stride_w);

// Two-pass batch statistics; train=false uses the supplied running stats.
Tensor batch_norm(const Tensor& input, const std::vector<double>& gamma,
                  const std::vector<double>& beta, const std::vector<double>& running_mean,
                  const std::vector<double>& running_var, double epsilon, bool train);

Tensor channel_shuffle(const Tensor& input, std::int64_t groups);

Tensor fully_connected(const Tensor& input, const Tensor& weights,
                       const std::vector<double>& bias);

// Long-double evaluation, no stabilization tricks beyond the widened type.
double softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels);

} // namespace effnet::ref

#endif // EFFNET_REFERENCE_HPP
