#ifndef EFFNET_MODEL_HPP
#define EFFNET_MODEL_HPP

#include <cstdint>
#include <vector>

#include "effnet/graph.hpp"
#include "effnet/ops.hpp"

namespace effnet {

// Forward activations and per-op records needed by backward.
struct Tape {
    bool valid = false;
    Mode mode = Mode::kInfer;
    std::vector<Tensor> outs;
    std::vector<std::vector<std::int64_t>> pool_argmax;
    std::vector<BnCache> bn_cache;
    std::vector<Tensor> dropout_mask;
};

// A materialized graph: parameter tensors plus batch-norm running statistics.
// One instance is single-threaded across a forward/backward pair; independent
// instances may run concurrently.
class Model {
  public:
    Model(GraphPlan plan, std::uint64_t init_seed);

    const GraphPlan& plan() const { return plan_; }

    Tensor forward(const Tensor& input, Mode mode, Rng* dropout_rng = nullptr,
                   Tape* tape = nullptr, MacCounter* macs = nullptr);

    // Accumulates parameter gradients; throws if the tape is not valid.
    void backward(const Tape& tape, const Tensor& d_output);

    void zero_grads();

    std::vector<Tensor>& params() { return params_; }
    const std::vector<Tensor>& params() const { return params_; }
    std::vector<Tensor>& grads() { return grads_; }
    std::vector<BnState>& bn_states() { return bn_states_; }
    const std::vector<BnState>& bn_states() const { return bn_states_; }

    // Gradient of the last backward pass w.r.t. the model input.
    const Tensor& input_gradient() const { return input_grad_; }

  private:
    GraphPlan plan_;
    std::vector<Tensor> params_;
    std::vector<Tensor> grads_;
    std::vector<BnState> bn_states_;
    Tensor input_grad_;
};

// Max over all parameter elements (and optionally input elements) of
// |analytic - central difference| / max(|analytic|, |cd|, 1e-8), with the
// loss taken as softmax cross-entropy over the given batch. The model runs
// in train mode so batch-norm uses batch statistics.
double gradient_check(Model& model, const Tensor& input, const std::vector<int>& labels,
                      double h, bool include_input = false);

} // namespace effnet

#endif // EFFNET_MODEL_HPP
