#ifndef EFFNET_BLOCKS_HPP
#define EFFNET_BLOCKS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "effnet/graph.hpp"

namespace effnet {

enum class BlockKind {
    kVanilla,     // 3x3 conv + 2x2 max pool
    kEffNet,      // 1x1 pw -> dw 1x3 -> 1x2 mp -> dw 3x1 -> 2x1 strided conv
    kEffNetV2,    // EffNet with input-derived width, dw multiplier 2, leaky pw
    kMobileNet,   // dw 3x3 (stride) -> 1x1 pw
    kShuffleNet,  // grouped pw -> shuffle -> dw 3x3 stride 2 -> grouped pw
    kMobileNetV2, // 1x1 expand -> dw 3x3 -> 1x1 project
    kMobImp,      // MobileNet v2 with 2x2 pooling and a leaky projection
};

const char* block_kind_name(BlockKind kind);
BlockKind block_kind_from_name(const std::string& name);

struct BlockOptions {
    double expansion_rate = 0.0;       // effnet_v2 / mobilenet_v2 / mob_imp, required
    std::int64_t groups = 4;           // shufflenet
    std::int64_t stride = 2;           // mobilenet / mobilenet_v2
    bool linear_tail = true;           // mobilenet_v2 projection activation
    bool pooling = false;              // mobilenet_v2: pool instead of strided dw
    double leaky_alpha = 0.01;
    std::int64_t depth_multiplier = 1;      // effnet (v1) spatial multiplier
    ActKind dw_activation = ActKind::kRelu; // effnet family depthwise activation
};

struct StageSpec {
    BlockKind kind = BlockKind::kVanilla;
    std::int64_t out_channels = 0;
    BlockOptions opts;
};

// How stage 0 is realized: as its declared block kind, or replaced by a
// vanilla 3x3 convolution with 2x2 max pooling.
enum class FirstLayerMode { kEffnetBlock, kVanillaConvMp };

struct ModelSpec {
    Shape4 input_shape; // batch extent is a placeholder of 1
    int class_count = 0;
    std::vector<StageSpec> stages;
    double dropout_p = 0.0;
    FirstLayerMode first_layer = FirstLayerMode::kEffnetBlock;
};

// Bottleneck/width rules used by the builders.
std::int64_t effnet_bottleneck_width(std::int64_t out_channels);                    // max(6, out/2)
std::int64_t effnet_v2_bottleneck_width(std::int64_t in_channels, double er);       // floor(in*er/2)
std::int64_t shufflenet_mid_width(std::int64_t out_channels);                       // max(6, out/4)
std::int64_t mobilenet_v2_expanded_width(std::int64_t in_channels, double er);      // floor(in*er)

// Assembles the stage blocks, an optional dropout, and the classifier head
// into a declarative plan. Incompatible stage boundaries are reported with
// their stage index as SpecError.
GraphPlan build_plan(const ModelSpec& spec);

} // namespace effnet

#endif // EFFNET_BLOCKS_HPP
