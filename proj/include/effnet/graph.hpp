#ifndef EFFNET_GRAPH_HPP
#define EFFNET_GRAPH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "effnet/ops.hpp"
#include "effnet/tensor.hpp"

namespace effnet {

enum class OpKind {
    kInput,
    kConv,          // grouped/depthwise shapes included, via ConvGeom::groups
    kMaxPool,
    kBatchNorm,
    kActivation,
    kChannelShuffle,
    kFlatten,
    kFullyConnected,
    kDropout,
    kAdd,
};

// Parameter initialization for materialized models.
enum class InitKind { kHeUniform, kZeros, kOnes };

struct ParamSpec {
    std::string name;
    Shape4 shape;
    InitKind init = InitKind::kZeros;
    std::int64_t fan_in = 1; // he_uniform only
};

// One declarative node of the compute graph. The same node list drives the
// executing model and the static cost analysis.
struct LayerNode {
    OpKind kind = OpKind::kInput;
    int input = -1;  // producer node index
    int input2 = -1; // second producer, kAdd only
    std::string name;

    // Closes a data-flow/cost report row when non-empty; unlabeled nodes are
    // folded into the row of the next labeled node.
    std::string row_label;
    int stage = -1; // -1 for input and head nodes

    ConvGeom conv;                 // kConv
    PoolGeom pool;                 // kMaxPool
    ActKind act = ActKind::kRelu;  // kActivation
    double leaky_alpha = 0.01;     // kActivation
    std::int64_t shuffle_groups = 1;
    double dropout_p = 0.0;
    double bn_epsilon = 1e-5;
    double bn_momentum = 0.9;
    std::int64_t fc_in = 0, fc_out = 0; // kFullyConnected

    // Parameter slots (indices into GraphPlan::params, -1 when absent).
    int weight = -1;
    int bias = -1;
    int gamma = -1;
    int beta = -1;
    int bn_state = -1; // index into the model's running-stat slots
};

struct GraphPlan {
    Shape4 input_shape; // batch extent is a placeholder of 1
    int class_count = 0;
    std::vector<LayerNode> nodes; // nodes[0] is kInput; topological order
    std::vector<ParamSpec> params;
    std::vector<std::int64_t> bn_channels; // channel count per bn state slot
};

// Static shape inference for a single node. Throws ShapeError on any
// incompatibility; `in2` is consulted for kAdd only.
Shape4 infer_output_shape(const LayerNode& node, Shape4 in, Shape4 in2 = {});

// Shapes of every node output for the given input, nodes[0] included.
std::vector<Shape4> infer_all_shapes(const GraphPlan& plan, Shape4 input);

// Structural identity: same node sequence, geometry and parameter shapes.
bool structurally_equal(const GraphPlan& a, const GraphPlan& b);

} // namespace effnet

#endif // EFFNET_GRAPH_HPP
