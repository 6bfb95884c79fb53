#include "effnet/graph.hpp"

namespace effnet {

Shape4 infer_output_shape(const LayerNode& node, Shape4 in, Shape4 in2) {
    switch (node.kind) {
    case OpKind::kInput:
        return in;
    case OpKind::kConv:
        return conv_output_shape(in, node.conv);
    case OpKind::kMaxPool:
        return pool_output_shape(in, node.pool);
    case OpKind::kBatchNorm:
    case OpKind::kActivation:
    case OpKind::kDropout:
        return in;
    case OpKind::kChannelShuffle:
        if (node.shuffle_groups < 1 || in.c % node.shuffle_groups != 0) {
            throw ShapeError("channel_shuffle: " + std::to_string(in.c) +
                             " channels not divisible by " + std::to_string(node.shuffle_groups) +
                             " groups");
        }
        return in;
    case OpKind::kFlatten:
        return {in.n, in.c * in.h * in.w, 1, 1};
    case OpKind::kFullyConnected:
        if (in.h != 1 || in.w != 1 || in.c != node.fc_in) {
            throw ShapeError("fully_connected: flattened length " + std::to_string(in.c) +
                             " does not match weight rows " + std::to_string(node.fc_in));
        }
        return {in.n, node.fc_out, 1, 1};
    case OpKind::kAdd:
        if (!(in == in2)) {
            throw ShapeError("add: operand shapes differ, " + in.str() + " vs " + in2.str());
        }
        return in;
    }
    throw Error("infer_output_shape: unknown node kind");
}

std::vector<Shape4> infer_all_shapes(const GraphPlan& plan, Shape4 input) {
    std::vector<Shape4> shapes(plan.nodes.size());
    for (std::size_t i = 0; i < plan.nodes.size(); ++i) {
        const LayerNode& nd = plan.nodes[i];
        if (nd.kind == OpKind::kInput) {
            shapes[i] = input;
            continue;
        }
        const Shape4 in = shapes[static_cast<std::size_t>(nd.input)];
        const Shape4 in2 = nd.input2 >= 0 ? shapes[static_cast<std::size_t>(nd.input2)] : Shape4{};
        shapes[i] = infer_output_shape(nd, in, in2);
    }
    return shapes;
}

bool structurally_equal(const GraphPlan& a, const GraphPlan& b) {
    if (a.nodes.size() != b.nodes.size() || a.params.size() != b.params.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        const LayerNode& x = a.nodes[i];
        const LayerNode& y = b.nodes[i];
        if (x.kind != y.kind || x.input != y.input || x.input2 != y.input2 || x.name != y.name ||
            x.weight != y.weight || x.bias != y.bias || x.gamma != y.gamma || x.beta != y.beta) {
            return false;
        }
    }
    for (std::size_t i = 0; i < a.params.size(); ++i) {
        if (a.params[i].name != b.params[i].name || !(a.params[i].shape == b.params[i].shape)) {
            return false;
        }
    }
    return true;
}

} // namespace effnet
