#include "covspot/model.hpp"

#include <cmath>
#include <filesystem>
#include <utility>

#include "json.hpp"

#include "covspot/error.hpp"
#include "covspot/rng.hpp"
#include "covspot/util.hpp"

namespace covspot {

using nlohmann::json;

const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::conv: return "conv";
        case LayerKind::relu: return "relu";
        case LayerKind::maxpool: return "maxpool";
        case LayerKind::gap: return "gap";
        case LayerKind::dense: return "dense";
    }
    return "?";
}

LayerKind layer_kind_from_name(const std::string& name) {
    if (name == "conv") return LayerKind::conv;
    if (name == "relu") return LayerKind::relu;
    if (name == "maxpool") return LayerKind::maxpool;
    if (name == "gap") return LayerKind::gap;
    if (name == "dense") return LayerKind::dense;
    throw Error("unsupported layer kind '" + name + "'");
}

int LayerSpec::neuron_count() const {
    if (kind == LayerKind::conv) return out_channels;
    if (kind == LayerKind::dense) return out_dim;
    return 0;
}

std::vector<int> ModelGraph::eligible_layers() const {
    std::vector<int> out;
    for (size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].eligible()) out.push_back(static_cast<int>(i));
    }
    return out;
}

std::vector<int> ModelGraph::eligible_neuron_counts() const {
    std::vector<int> out;
    for (const auto& l : layers) {
        if (l.eligible()) out.push_back(l.neuron_count());
    }
    return out;
}

std::vector<std::string> ModelGraph::eligible_layer_names() const {
    std::vector<std::string> out;
    for (size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].eligible()) {
            out.push_back(std::string(layer_kind_name(layers[i].kind)) + "_" + std::to_string(i));
        }
    }
    return out;
}

namespace {

// Weight blob: per parameterized layer in manifest order, kernel/matrix
// values then bias, each a little-endian float32.
std::vector<uint8_t> build_weight_blob(const ModelGraph& m,
                                       std::vector<std::pair<size_t, size_t>>* spans) {
    std::vector<uint8_t> blob;
    if (spans) spans->assign(m.layers.size(), {0, 0});
    for (size_t i = 0; i < m.layers.size(); ++i) {
        const LayerSpec& l = m.layers[i];
        const size_t start = blob.size();
        if (l.kind == LayerKind::conv) {
            const ConvWeights& w = m.conv_weights.at(static_cast<size_t>(l.weight_index));
            for (double v : w.kernel) append_f32_le(blob, static_cast<float>(v));
            for (double v : w.bias) append_f32_le(blob, static_cast<float>(v));
        } else if (l.kind == LayerKind::dense) {
            const DenseWeights& w = m.dense_weights.at(static_cast<size_t>(l.weight_index));
            for (double v : w.matrix) append_f32_le(blob, static_cast<float>(v));
            for (double v : w.bias) append_f32_le(blob, static_cast<float>(v));
        }
        if (spans) (*spans)[i] = {start, blob.size() - start};
    }
    return blob;
}

std::string manifest_description(const ModelGraph& m) {
    std::string d = "input:" + std::to_string(m.input_shape[0]) + "x" +
                    std::to_string(m.input_shape[1]) + "x" + std::to_string(m.input_shape[2]);
    for (const auto& l : m.layers) {
        d += "|";
        d += layer_kind_name(l.kind);
        if (l.kind == LayerKind::conv) {
            d += ":o" + std::to_string(l.out_channels) + ",i" + std::to_string(l.in_channels) +
                 ",kh" + std::to_string(l.kernel_h) + ",kw" + std::to_string(l.kernel_w) + ",s" +
                 std::to_string(l.stride) + ",p" + std::to_string(l.padding);
        } else if (l.kind == LayerKind::dense) {
            d += ":o" + std::to_string(l.out_dim) + ",i" + std::to_string(l.in_dim);
        }
    }
    return d;
}

bool all_finite(const std::vector<double>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace

void ModelGraph::refresh_fingerprint() {
    const std::string desc = manifest_description(*this);
    const std::vector<uint8_t> blob = build_weight_blob(*this, nullptr);
    uint64_t h = fnv1a(desc.data(), desc.size());
    h = fnv1a(blob.data(), blob.size(), h);
    fingerprint = to_hex(h);
}

ActivationTrace forward_with_trace(const ModelGraph& model, const Tensor3& image) {
    if (image.channels != model.input_shape[0] || image.height != model.input_shape[1] ||
        image.width != model.input_shape[2]) {
        throw Error("input shape mismatch: model expects " + std::to_string(model.input_shape[0]) +
                    "x" + std::to_string(model.input_shape[1]) + "x" +
                    std::to_string(model.input_shape[2]) + ", got " +
                    std::to_string(image.channels) + "x" + std::to_string(image.height) + "x" +
                    std::to_string(image.width));
    }

    const size_t n = model.layers.size();
    std::vector<Tensor3> out3(n);
    std::vector<Tensor1> out1(n);
    std::vector<bool> is3(n, true);

    Tensor3 cur3 = image;
    Tensor1 cur1;
    bool spatial = true;
    for (size_t i = 0; i < n; ++i) {
        const LayerSpec& l = model.layers[i];
        try {
            switch (l.kind) {
                case LayerKind::conv:
                    if (!spatial) throw Error("conv applied to flattened activations");
                    cur3 = conv2d(cur3, model.conv_weights.at(static_cast<size_t>(l.weight_index)),
                                  l.stride, l.padding);
                    break;
                case LayerKind::relu:
                    if (spatial) {
                        cur3 = relu(cur3);
                    } else {
                        cur1 = relu(cur1);
                    }
                    break;
                case LayerKind::maxpool:
                    if (!spatial) throw Error("maxpool applied to flattened activations");
                    cur3 = maxpool2(cur3);
                    break;
                case LayerKind::gap:
                    if (!spatial) throw Error("gap applied to flattened activations");
                    cur1 = global_avg_pool(cur3);
                    spatial = false;
                    break;
                case LayerKind::dense:
                    if (spatial) throw Error("dense applied to spatial activations");
                    cur1 = dense(cur1, model.dense_weights.at(static_cast<size_t>(l.weight_index)));
                    break;
            }
        } catch (const Error& e) {
            throw Error("layer " + std::to_string(i) + " (" + layer_kind_name(l.kind) +
                        "): " + e.what());
        }
        is3[i] = spatial;
        if (spatial) {
            if (!all_finite(cur3.data)) {
                throw Error("layer " + std::to_string(i) + " (" + layer_kind_name(l.kind) +
                            ") produced a non-finite value");
            }
            out3[i] = cur3;
        } else {
            if (!all_finite(cur1.data)) {
                throw Error("layer " + std::to_string(i) + " (" + layer_kind_name(l.kind) +
                            ") produced a non-finite value");
            }
            out1[i] = cur1;
        }
    }

    ActivationTrace trace;
    trace.model_fingerprint = model.fingerprint;
    for (size_t i = 0; i < n; ++i) {
        const LayerSpec& l = model.layers[i];
        if (!l.eligible()) continue;
        // delta is taken after the immediately following ReLU, if any
        const size_t src = (i + 1 < n && model.layers[i + 1].kind == LayerKind::relu) ? i + 1 : i;
        std::vector<double> delta;
        if (l.kind == LayerKind::conv) {
            const Tensor3& t = out3[src];
            delta.resize(static_cast<size_t>(t.channels));
            const double inv = 1.0 / (static_cast<double>(t.height) * t.width);
            for (int c = 0; c < t.channels; ++c) {
                double sum = 0.0;
                for (int y = 0; y < t.height; ++y) {
                    for (int x = 0; x < t.width; ++x) sum += t.at(c, y, x);
                }
                delta[static_cast<size_t>(c)] = sum * inv;
            }
        } else {
            delta = out1[src].data;
        }
        trace.layer_indices.push_back(static_cast<int>(i));
        trace.values.push_back(std::move(delta));
    }
    return trace;
}

namespace {

double quantize_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

// Fixed high-pass kernels for the first conv layer: Laplacian plus three
// directional differences. They guarantee a response to high-frequency
// artifacts regardless of the random draw.
const double kHighPass[4][3][3] = {
    {{0, -1, 0}, {-1, 4, -1}, {0, -1, 0}},
    {{0, 0, 0}, {-1, 1, 0}, {0, 0, 0}},
    {{0, -1, 0}, {0, 1, 0}, {0, 0, 0}},
    {{-1, 0, 0}, {0, 1, 0}, {0, 0, 0}},
};

}  // namespace

ModelGraph make_toy_backbone(uint64_t seed) {
    ModelGraph m;
    m.input_shape = {3, 32, 32};

    auto add_conv = [&m](int out_c, int in_c) {
        LayerSpec l;
        l.kind = LayerKind::conv;
        l.out_channels = out_c;
        l.in_channels = in_c;
        l.kernel_h = 3;
        l.kernel_w = 3;
        l.stride = 1;
        l.padding = 1;
        l.weight_index = static_cast<int>(m.conv_weights.size());
        m.conv_weights.emplace_back(out_c, in_c, 3, 3);
        m.layers.push_back(l);
    };
    auto add_dense = [&m](int out, int in) {
        LayerSpec l;
        l.kind = LayerKind::dense;
        l.out_dim = out;
        l.in_dim = in;
        l.weight_index = static_cast<int>(m.dense_weights.size());
        m.dense_weights.emplace_back(out, in);
        m.layers.push_back(l);
    };
    auto add_plain = [&m](LayerKind k) {
        LayerSpec l;
        l.kind = k;
        m.layers.push_back(l);
    };

    add_conv(16, 3);
    add_plain(LayerKind::relu);
    add_plain(LayerKind::maxpool);
    add_conv(32, 16);
    add_plain(LayerKind::relu);
    add_plain(LayerKind::maxpool);
    add_conv(64, 32);
    add_plain(LayerKind::relu);
    add_plain(LayerKind::gap);
    add_dense(32, 64);
    add_plain(LayerKind::relu);
    add_dense(8, 32);

    CounterRng rng(derive_seed(seed, SeedRole::backbone));

    // conv 0: channels 0..3 fixed high-pass filters (replicated over input
    // channels at weight 1/3), channels 4..15 random
    ConvWeights& c0 = m.conv_weights[0];
    for (int o = 0; o < 4; ++o) {
        for (int c = 0; c < c0.in_channels; ++c) {
            for (int ky = 0; ky < 3; ++ky) {
                for (int kx = 0; kx < 3; ++kx) {
                    c0.kernel_at(o, c, ky, kx) = quantize_f32(kHighPass[o][ky][kx] / 3.0);
                }
            }
        }
    }
    auto fill_gaussian = [&rng](std::vector<double>& values, size_t begin, size_t end, int fan_in) {
        const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (size_t i = begin; i < end; ++i) {
            values[i] = quantize_f32(rng.next_gaussian() * scale);
        }
    };
    {
        const size_t per_out = static_cast<size_t>(c0.in_channels) * 9;
        fill_gaussian(c0.kernel, 4 * per_out, c0.kernel.size(), c0.in_channels * 9);
    }
    for (size_t wi = 1; wi < m.conv_weights.size(); ++wi) {
        ConvWeights& w = m.conv_weights[wi];
        fill_gaussian(w.kernel, 0, w.kernel.size(), w.in_channels * w.kernel_h * w.kernel_w);
    }
    for (DenseWeights& w : m.dense_weights) {
        fill_gaussian(w.matrix, 0, w.matrix.size(), w.in_dim);
    }
    // all biases stay zero

    m.refresh_fingerprint();
    return m;
}

namespace {

std::string weights_file_for(const std::string& manifest_path) {
    std::filesystem::path p(manifest_path);
    p.replace_extension(".bin");
    return p.filename().string();
}

}  // namespace

void save_model(const ModelGraph& model, const std::string& manifest_path) {
    std::vector<std::pair<size_t, size_t>> spans;
    const std::vector<uint8_t> blob = build_weight_blob(model, &spans);

    json manifest;
    manifest["format"] = "covspot-model";
    manifest["version"] = 1;
    manifest["input_shape"] = {model.input_shape[0], model.input_shape[1], model.input_shape[2]};
    manifest["weights_file"] = weights_file_for(manifest_path);
    json layers = json::array();
    for (size_t i = 0; i < model.layers.size(); ++i) {
        const LayerSpec& l = model.layers[i];
        json jl;
        jl["kind"] = layer_kind_name(l.kind);
        if (l.kind == LayerKind::conv) {
            jl["out_channels"] = l.out_channels;
            jl["in_channels"] = l.in_channels;
            jl["kernel_h"] = l.kernel_h;
            jl["kernel_w"] = l.kernel_w;
            jl["stride"] = l.stride;
            jl["padding"] = l.padding;
        } else if (l.kind == LayerKind::dense) {
            jl["out_dim"] = l.out_dim;
            jl["in_dim"] = l.in_dim;
        }
        if (l.eligible()) {
            jl["weight_offset"] = spans[i].first;
            jl["weight_bytes"] = spans[i].second;
        }
        layers.push_back(jl);
    }
    manifest["layers"] = layers;

    write_file_text(manifest_path, manifest.dump(2) + "\n");
    const std::filesystem::path blob_path =
        std::filesystem::path(manifest_path).parent_path() / weights_file_for(manifest_path);
    write_file_bytes(blob_path.string(), blob);
}

ModelGraph load_model(const std::string& manifest_path) {
    json manifest;
    try {
        manifest = json::parse(read_file_text(manifest_path));
    } catch (const json::exception& e) {
        throw Error("malformed model manifest " + manifest_path + ": " + e.what());
    }

    ModelGraph m;
    try {
        if (manifest.at("format").get<std::string>() != "covspot-model") {
            throw Error("malformed model manifest " + manifest_path + ": unexpected format tag");
        }
        const auto shape = manifest.at("input_shape");
        m.input_shape = {shape.at(0).get<int>(), shape.at(1).get<int>(), shape.at(2).get<int>()};

        std::vector<std::pair<size_t, size_t>> spans;
        for (const auto& jl : manifest.at("layers")) {
            LayerSpec l;
            l.kind = layer_kind_from_name(jl.at("kind").get<std::string>());
            if (l.kind == LayerKind::conv) {
                l.out_channels = jl.at("out_channels").get<int>();
                l.in_channels = jl.at("in_channels").get<int>();
                l.kernel_h = jl.at("kernel_h").get<int>();
                l.kernel_w = jl.at("kernel_w").get<int>();
                l.stride = jl.at("stride").get<int>();
                l.padding = jl.at("padding").get<int>();
                l.weight_index = static_cast<int>(m.conv_weights.size());
                m.conv_weights.emplace_back(l.out_channels, l.in_channels, l.kernel_h, l.kernel_w);
            } else if (l.kind == LayerKind::dense) {
                l.out_dim = jl.at("out_dim").get<int>();
                l.in_dim = jl.at("in_dim").get<int>();
                l.weight_index = static_cast<int>(m.dense_weights.size());
                m.dense_weights.emplace_back(l.out_dim, l.in_dim);
            }
            if (l.eligible()) {
                spans.emplace_back(jl.at("weight_offset").get<size_t>(),
                                   jl.at("weight_bytes").get<size_t>());
            }
            m.layers.push_back(l);
        }

        const std::filesystem::path blob_path =
            std::filesystem::path(manifest_path).parent_path() /
            manifest.at("weights_file").get<std::string>();
        const std::vector<uint8_t> blob = read_file_bytes(blob_path.string());

        size_t expected = 0;
        for (const auto& l : m.layers) {
            if (l.kind == LayerKind::conv) {
                const ConvWeights& w = m.conv_weights[static_cast<size_t>(l.weight_index)];
                expected += 4 * (w.kernel.size() + w.bias.size());
            } else if (l.kind == LayerKind::dense) {
                const DenseWeights& w = m.dense_weights[static_cast<size_t>(l.weight_index)];
                expected += 4 * (w.matrix.size() + w.bias.size());
            }
        }
        if (blob.size() != expected) {
            throw Error("weight blob length mismatch in " + blob_path.string() + ": expected " +
                        std::to_string(expected) + " bytes, got " + std::to_string(blob.size()));
        }

        size_t span_idx = 0;
        for (const auto& l : m.layers) {
            if (!l.eligible()) continue;
            const auto [offset, bytes] = spans[span_idx++];
            size_t need = 0;
            if (l.kind == LayerKind::conv) {
                const ConvWeights& w = m.conv_weights[static_cast<size_t>(l.weight_index)];
                need = 4 * (w.kernel.size() + w.bias.size());
            } else {
                const DenseWeights& w = m.dense_weights[static_cast<size_t>(l.weight_index)];
                need = 4 * (w.matrix.size() + w.bias.size());
            }
            if (bytes != need || offset + need > blob.size()) {
                throw Error("weight blob length mismatch in " + blob_path.string() +
                            ": layer span expects " + std::to_string(need) + " bytes at offset " +
                            std::to_string(offset) + ", blob has " + std::to_string(blob.size()));
            }
            const uint8_t* p = blob.data() + offset;
            auto take = [&p](std::vector<double>& dst) {
                for (double& v : dst) {
                    v = static_cast<double>(read_f32_le(p));
                    p += 4;
                }
            };
            if (l.kind == LayerKind::conv) {
                ConvWeights& w = m.conv_weights[static_cast<size_t>(l.weight_index)];
                take(w.kernel);
                take(w.bias);
            } else {
                DenseWeights& w = m.dense_weights[static_cast<size_t>(l.weight_index)];
                take(w.matrix);
                take(w.bias);
            }
        }
    } catch (const json::exception& e) {
        throw Error("malformed model manifest " + manifest_path + ": " + e.what());
    }

    m.refresh_fingerprint();
    return m;
}

}  // namespace covspot
