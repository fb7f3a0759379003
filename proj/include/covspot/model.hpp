#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "covspot/tensor.hpp"

namespace covspot {

enum class LayerKind { conv, relu, maxpool, gap, dense };

const char* layer_kind_name(LayerKind k);
LayerKind layer_kind_from_name(const std::string& name);

struct LayerSpec {
    LayerKind kind = LayerKind::relu;
    // conv
    int out_channels = 0, in_channels = 0, kernel_h = 0, kernel_w = 0;
    int stride = 1, padding = 0;
    // dense
    int out_dim = 0, in_dim = 0;
    // index into ModelGraph::conv_weights / dense_weights, -1 if none
    int weight_index = -1;

    // conv and dense layers are the monitored ("eligible") ones
    bool eligible() const { return kind == LayerKind::conv || kind == LayerKind::dense; }
    int neuron_count() const;
};

/// A frozen reference network: ordered layers plus their weights.
struct ModelGraph {
    std::array<int, 3> input_shape{};  // channels, height, width
    std::vector<LayerSpec> layers;
    std::vector<ConvWeights> conv_weights;
    std::vector<DenseWeights> dense_weights;
    std::string fingerprint;

    std::vector<int> eligible_layers() const;
    std::vector<int> eligible_neuron_counts() const;
    std::vector<std::string> eligible_layer_names() const;

    // Content hash over the layer manifest and the float32 weight blob;
    // equal fingerprints mean bit-identical serialized models.
    void refresh_fingerprint();
};

/// Per-eligible-layer neuron output values for one input, in model layer
/// order. Conv neurons are output channels (value = spatial mean of the
/// post-activation response); dense neurons are output units.
struct ActivationTrace {
    std::string model_fingerprint;
    std::vector<int> layer_indices;
    std::vector<std::vector<double>> values;
};

ActivationTrace forward_with_trace(const ModelGraph& model, const Tensor3& image);

/// Deterministic desk-scale backbone: 3x32x32 input,
/// conv16-relu-pool / conv32-relu-pool / conv64-relu-gap / dense32-relu / dense8.
/// The first four channels of the first conv layer are fixed high-pass
/// filters; everything else is seeded He-scaled Gaussian, biases zero.
ModelGraph make_toy_backbone(uint64_t seed);

/// Writes <manifest_path> (JSON) plus a weight blob of little-endian
/// float32 values next to it. load(save(m)) reproduces the fingerprint
/// and bit-identical weights.
void save_model(const ModelGraph& model, const std::string& manifest_path);
ModelGraph load_model(const std::string& manifest_path);

}  // namespace covspot
