#include "effnet/model.hpp"

#include <algorithm>
#include <cmath>

namespace effnet {

namespace {
const std::vector<double> kNoBias;
} // namespace

Model::Model(GraphPlan plan, std::uint64_t init_seed) : plan_(std::move(plan)) {
    Rng rng(init_seed);
    params_.reserve(plan_.params.size());
    for (const ParamSpec& ps : plan_.params) {
        switch (ps.init) {
        case InitKind::kHeUniform:
            params_.push_back(Tensor::he_uniform(ps.shape, rng, ps.fan_in));
            break;
        case InitKind::kZeros:
            params_.push_back(Tensor::zeros(ps.shape));
            break;
        case InitKind::kOnes:
            params_.push_back(Tensor::constant(ps.shape, 1.0));
            break;
        }
    }
    grads_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
        grads_[i] = Tensor::zeros(params_[i].shape);
    }
    bn_states_.resize(plan_.bn_channels.size());
    for (std::size_t i = 0; i < bn_states_.size(); ++i) {
        bn_states_[i].running_mean.assign(static_cast<std::size_t>(plan_.bn_channels[i]), 0.0);
        bn_states_[i].running_var.assign(static_cast<std::size_t>(plan_.bn_channels[i]), 1.0);
    }
}

Tensor Model::forward(const Tensor& input, Mode mode, Rng* dropout_rng, Tape* tape,
                      MacCounter* macs) {
    if (input.shape.c != plan_.input_shape.c || input.shape.h != plan_.input_shape.h ||
        input.shape.w != plan_.input_shape.w) {
        throw ShapeError("model forward: input " + input.shape.str() + " does not match spec " +
                         plan_.input_shape.str());
    }
    const std::size_t n_nodes = plan_.nodes.size();
    Tape local;
    Tape& t = tape != nullptr ? *tape : local;
    t.valid = false;
    t.mode = mode;
    t.outs.assign(n_nodes, Tensor{});
    t.pool_argmax.assign(n_nodes, {});
    t.bn_cache.assign(n_nodes, BnCache{});
    t.dropout_mask.assign(n_nodes, Tensor{});

    for (std::size_t i = 0; i < n_nodes; ++i) {
        const LayerNode& nd = plan_.nodes[i];
        switch (nd.kind) {
        case OpKind::kInput:
            t.outs[i] = input;
            break;
        case OpKind::kConv: {
            const Tensor& in = t.outs[static_cast<std::size_t>(nd.input)];
            const std::vector<double>& b =
                nd.bias >= 0 ? params_[static_cast<std::size_t>(nd.bias)].data : kNoBias;
            t.outs[i] = conv2d(in, nd.conv, params_[static_cast<std::size_t>(nd.weight)], b, macs);
            break;
        }
        case OpKind::kMaxPool:
            t.outs[i] = max_pool2d(t.outs[static_cast<std::size_t>(nd.input)], nd.pool,
                                   &t.pool_argmax[i]);
            break;
        case OpKind::kBatchNorm: {
            BnParams p;
            p.gamma = params_[static_cast<std::size_t>(nd.gamma)].data;
            p.beta = params_[static_cast<std::size_t>(nd.beta)].data;
            p.epsilon = nd.bn_epsilon;
            p.momentum = nd.bn_momentum;
            t.outs[i] = batch_norm(t.outs[static_cast<std::size_t>(nd.input)], p,
                                   bn_states_[static_cast<std::size_t>(nd.bn_state)], mode,
                                   &t.bn_cache[i]);
            break;
        }
        case OpKind::kActivation:
            t.outs[i] = activation(t.outs[static_cast<std::size_t>(nd.input)], nd.act,
                                   nd.leaky_alpha);
            break;
        case OpKind::kChannelShuffle:
            t.outs[i] =
                channel_shuffle(t.outs[static_cast<std::size_t>(nd.input)], nd.shuffle_groups);
            break;
        case OpKind::kFlatten: {
            const Tensor& in = t.outs[static_cast<std::size_t>(nd.input)];
            t.outs[i] = in.reshaped({in.shape.n, in.shape.c * in.shape.h * in.shape.w, 1, 1});
            break;
        }
        case OpKind::kFullyConnected: {
            const Tensor& in = t.outs[static_cast<std::size_t>(nd.input)];
            const std::vector<double>& b =
                nd.bias >= 0 ? params_[static_cast<std::size_t>(nd.bias)].data : kNoBias;
            t.outs[i] =
                fully_connected(in, params_[static_cast<std::size_t>(nd.weight)], b, macs);
            break;
        }
        case OpKind::kDropout:
            t.outs[i] = dropout(t.outs[static_cast<std::size_t>(nd.input)], nd.dropout_p, mode,
                                dropout_rng, &t.dropout_mask[i]);
            break;
        case OpKind::kAdd: {
            const Tensor& a = t.outs[static_cast<std::size_t>(nd.input)];
            const Tensor& b = t.outs[static_cast<std::size_t>(nd.input2)];
            if (!(a.shape == b.shape)) {
                throw ShapeError("add: operand shapes differ");
            }
            Tensor sum(a.shape);
            for (std::size_t k = 0; k < sum.data.size(); ++k) {
                sum.data[k] = a.data[k] + b.data[k];
            }
            t.outs[i] = std::move(sum);
            break;
        }
        }
    }
    t.valid = true;
    return t.outs.back();
}

void Model::backward(const Tape& tape, const Tensor& d_output) {
    if (!tape.valid) {
        throw Error("backward called before forward: tape is not valid");
    }
    const std::size_t n_nodes = plan_.nodes.size();
    std::vector<Tensor> node_grad(n_nodes);
    if (!(d_output.shape == tape.outs.back().shape)) {
        throw ShapeError("backward: upstream gradient shape does not match model output");
    }
    node_grad[n_nodes - 1] = d_output;

    auto accumulate = [&](int target, Tensor&& g) {
        Tensor& slot = node_grad[static_cast<std::size_t>(target)];
        if (slot.data.empty()) {
            slot = std::move(g);
            return;
        }
        for (std::size_t k = 0; k < slot.data.size(); ++k) {
            slot.data[k] += g.data[k];
        }
    };

    for (std::size_t ri = n_nodes; ri-- > 1;) {
        const LayerNode& nd = plan_.nodes[ri];
        Tensor& dy = node_grad[ri];
        if (dy.data.empty()) {
            continue; // node does not influence the output
        }
        const Tensor& in = tape.outs[static_cast<std::size_t>(nd.input)];
        switch (nd.kind) {
        case OpKind::kInput:
            break;
        case OpKind::kConv: {
            ConvGrads g = conv2d_backward(in, nd.conv,
                                          params_[static_cast<std::size_t>(nd.weight)],
                                          nd.bias >= 0, dy);
            Tensor& wgrad = grads_[static_cast<std::size_t>(nd.weight)];
            for (std::size_t k = 0; k < wgrad.data.size(); ++k) {
                wgrad.data[k] += g.d_weights.data[k];
            }
            if (nd.bias >= 0) {
                Tensor& bgrad = grads_[static_cast<std::size_t>(nd.bias)];
                for (std::size_t k = 0; k < bgrad.data.size(); ++k) {
                    bgrad.data[k] += g.d_bias[k];
                }
            }
            accumulate(nd.input, std::move(g.d_input));
            break;
        }
        case OpKind::kMaxPool:
            accumulate(nd.input, max_pool2d_backward(in.shape, tape.pool_argmax[ri], dy));
            break;
        case OpKind::kBatchNorm: {
            BnParams p;
            p.gamma = params_[static_cast<std::size_t>(nd.gamma)].data;
            p.beta = params_[static_cast<std::size_t>(nd.beta)].data;
            p.epsilon = nd.bn_epsilon;
            p.momentum = nd.bn_momentum;
            BnGrads g = batch_norm_backward(in, p,
                                            bn_states_[static_cast<std::size_t>(nd.bn_state)],
                                            tape.mode, tape.bn_cache[ri], dy);
            Tensor& ggrad = grads_[static_cast<std::size_t>(nd.gamma)];
            Tensor& bgrad = grads_[static_cast<std::size_t>(nd.beta)];
            for (std::size_t k = 0; k < ggrad.data.size(); ++k) {
                ggrad.data[k] += g.d_gamma[k];
                bgrad.data[k] += g.d_beta[k];
            }
            accumulate(nd.input, std::move(g.d_input));
            break;
        }
        case OpKind::kActivation:
            accumulate(nd.input, activation_backward(in, nd.act, nd.leaky_alpha, dy));
            break;
        case OpKind::kChannelShuffle:
            accumulate(nd.input, channel_shuffle_backward(dy, nd.shuffle_groups));
            break;
        case OpKind::kFlatten:
            accumulate(nd.input, dy.reshaped(in.shape));
            break;
        case OpKind::kFullyConnected: {
            FcGrads g =
                fully_connected_backward(in, params_[static_cast<std::size_t>(nd.weight)], dy);
            Tensor& wgrad = grads_[static_cast<std::size_t>(nd.weight)];
            for (std::size_t k = 0; k < wgrad.data.size(); ++k) {
                wgrad.data[k] += g.d_weights.data[k];
            }
            if (nd.bias >= 0) {
                Tensor& bgrad = grads_[static_cast<std::size_t>(nd.bias)];
                for (std::size_t k = 0; k < bgrad.data.size(); ++k) {
                    bgrad.data[k] += g.d_bias[k];
                }
            }
            accumulate(nd.input, std::move(g.d_input));
            break;
        }
        case OpKind::kDropout:
            accumulate(nd.input, dropout_backward(tape.dropout_mask[ri], dy));
            break;
        case OpKind::kAdd: {
            Tensor copy = dy;
            accumulate(nd.input, std::move(copy));
            accumulate(nd.input2, std::move(dy));
            break;
        }
        }
    }
    input_grad_ = node_grad[0].data.empty() ? Tensor(tape.outs[0].shape) : std::move(node_grad[0]);
}

void Model::zero_grads() {
    for (Tensor& g : grads_) {
        std::fill(g.data.begin(), g.data.end(), 0.0);
    }
}

namespace {

double loss_of(Model& model, const Tensor& input, const std::vector<int>& labels) {
    Tape tape;
    const Tensor logits = model.forward(input, Mode::kTrain, nullptr, &tape);
    return softmax_cross_entropy(logits, labels).loss;
}

double rel_err(double analytic, double numeric) {
    return std::abs(analytic - numeric) /
           std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

} // namespace

double gradient_check(Model& model, const Tensor& input, const std::vector<int>& labels,
                      double h, bool include_input) {
    Tape tape;
    const Tensor logits = model.forward(input, Mode::kTrain, nullptr, &tape);
    const LossResult lr = softmax_cross_entropy(logits, labels);
    model.zero_grads();
    model.backward(tape, softmax_cross_entropy_backward(lr.probs, labels));

    double worst = 0.0;
    for (std::size_t pi = 0; pi < model.params().size(); ++pi) {
        Tensor& p = model.params()[pi];
        const Tensor& g = model.grads()[pi];
        for (std::size_t k = 0; k < p.data.size(); ++k) {
            const double saved = p.data[k];
            p.data[k] = saved + h;
            const double up = loss_of(model, input, labels);
            p.data[k] = saved - h;
            const double down = loss_of(model, input, labels);
            p.data[k] = saved;
            const double cd = (up - down) / (2.0 * h);
            worst = std::max(worst, rel_err(g.data[k], cd));
        }
    }
    if (include_input) {
        Tensor x = input;
        const Tensor& gin = model.input_gradient();
        for (std::size_t k = 0; k < x.data.size(); ++k) {
            const double saved = x.data[k];
            x.data[k] = saved + h;
            const double up = loss_of(model, x, labels);
            x.data[k] = saved - h;
            const double down = loss_of(model, x, labels);
            x.data[k] = saved;
            const double cd = (up - down) / (2.0 * h);
            worst = std::max(worst, rel_err(gin.data[k], cd));
        }
    }
    return worst;
}

} // namespace effnet
