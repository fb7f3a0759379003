#include "covspot/classifier.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "covspot/error.hpp"
#include "covspot/rng.hpp"
#include "covspot/util.hpp"

namespace covspot {

using nlohmann::json;

namespace {

constexpr double kLogitClamp = 30.0;
constexpr double kStdFloor = 1e-8;
constexpr int kHiddenDims[] = {64, 32, 16, 8};

std::vector<double> standardize(const FeatureStats& stats, const CoverageVector& x) {
    if (x.counts.size() != stats.mean.size() || stats.mean.size() != stats.std.size()) {
        throw Error("feature dimension mismatch: stats hold " + std::to_string(stats.mean.size()) +
                    " dims, input has " + std::to_string(x.counts.size()));
    }
    std::vector<double> z(x.counts.size());
    for (size_t i = 0; i < z.size(); ++i) {
        z[i] = (static_cast<double>(x.counts[i]) - stats.mean[i]) / stats.std[i];
    }
    return z;
}

struct ForwardCache {
    std::vector<std::vector<double>> inputs;  // input of each stage
    std::vector<std::vector<double>> pre;     // pre-activation output of each stage
    double logit = 0.0;
    double clamped = 0.0;
    double p = 0.0;
};

void check_params(const MlpParams& params) {
    if (params.stages.size() != 5) {
        throw Error("classifier must have 5 stages, got " + std::to_string(params.stages.size()));
    }
    for (size_t k = 0; k + 1 < params.stages.size(); ++k) {
        if (params.stages[k].out_dim != params.stages[k + 1].in_dim) {
            throw Error("classifier stage " + std::to_string(k) + " outputs " +
                        std::to_string(params.stages[k].out_dim) + " dims but stage " +
                        std::to_string(k + 1) + " expects " +
                        std::to_string(params.stages[k + 1].in_dim));
        }
    }
    if (params.stages.back().out_dim != 1) {
        throw Error("classifier final stage must output 1 dim, got " +
                    std::to_string(params.stages.back().out_dim));
    }
}

void forward_std(const MlpParams& params, const std::vector<double>& z, ForwardCache& cache) {
    cache.inputs.clear();
    cache.pre.clear();
    std::vector<double> cur = z;
    for (size_t k = 0; k < params.stages.size(); ++k) {
        const DenseWeights& w = params.stages[k];
        if (static_cast<int>(cur.size()) != w.in_dim) {
            throw Error("classifier stage " + std::to_string(k) + " expects input of length " +
                        std::to_string(w.in_dim) + ", got " + std::to_string(cur.size()));
        }
        cache.inputs.push_back(cur);
        std::vector<double> out(static_cast<size_t>(w.out_dim));
        for (int o = 0; o < w.out_dim; ++o) {
            double acc = w.bias[static_cast<size_t>(o)];
            for (int i = 0; i < w.in_dim; ++i) acc += w.matrix_at(o, i) * cur[static_cast<size_t>(i)];
            out[static_cast<size_t>(o)] = acc;
        }
        cache.pre.push_back(out);
        if (k + 1 < params.stages.size()) {
            for (double& v : out) v = std::max(0.0, v);
        }
        cur = std::move(out);
    }
    cache.logit = cur[0];
    cache.clamped = std::clamp(cache.logit, -kLogitClamp, kLogitClamp);
    cache.p = 1.0 / (1.0 + std::exp(-cache.clamped));
}

double bce_from_logit(double z, int y) {
    // softplus(z) - y*z, stable for any z
    return std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::abs(z)));
}

void accumulate_gradients(const MlpParams& params, const ForwardCache& cache, int y,
                          MlpGradients& sums) {
    // d(loss)/d(logit); zero where the clamp is saturated
    double dz = cache.p - static_cast<double>(y);
    if (std::abs(cache.logit) >= kLogitClamp) dz = 0.0;

    std::vector<double> delta{dz};
    for (size_t k = params.stages.size(); k-- > 0;) {
        const DenseWeights& w = params.stages[k];
        const std::vector<double>& input = cache.inputs[k];
        for (int o = 0; o < w.out_dim; ++o) {
            const double d = delta[static_cast<size_t>(o)];
            sums.bias[k][static_cast<size_t>(o)] += d;
            double* grow = &sums.matrix[k][static_cast<size_t>(o * w.in_dim)];
            for (int i = 0; i < w.in_dim; ++i) grow[i] += d * input[static_cast<size_t>(i)];
        }
        if (k == 0) break;
        std::vector<double> prev(static_cast<size_t>(w.in_dim), 0.0);
        for (int i = 0; i < w.in_dim; ++i) {
            double acc = 0.0;
            for (int o = 0; o < w.out_dim; ++o) {
                acc += w.matrix_at(o, i) * delta[static_cast<size_t>(o)];
            }
            // ReLU gate of the previous stage
            if (cache.pre[k - 1][static_cast<size_t>(i)] > 0.0) {
                prev[static_cast<size_t>(i)] = acc;
            }
        }
        delta = std::move(prev);
    }
}

MlpGradients zero_gradients(const MlpParams& params) {
    MlpGradients g;
    for (const auto& w : params.stages) {
        g.matrix.emplace_back(w.matrix.size(), 0.0);
        g.bias.emplace_back(w.bias.size(), 0.0);
    }
    return g;
}

}  // namespace

FeatureStats fit_feature_stats(const std::vector<CoverageVector>& features) {
    if (features.empty()) throw Error("fit_feature_stats: no features");
    const size_t m = features.front().counts.size();
    for (size_t i = 0; i < features.size(); ++i) {
        if (features[i].counts.size() != m) {
            throw Error("fit_feature_stats: feature " + std::to_string(i) + " has " +
                        std::to_string(features[i].counts.size()) + " dims, expected " +
                        std::to_string(m));
        }
    }
    FeatureStats stats;
    stats.mean.assign(m, 0.0);
    stats.std.assign(m, 0.0);
    const double n = static_cast<double>(features.size());
    for (const auto& f : features) {
        for (size_t i = 0; i < m; ++i) stats.mean[i] += static_cast<double>(f.counts[i]);
    }
    for (size_t i = 0; i < m; ++i) stats.mean[i] /= n;
    for (const auto& f : features) {
        for (size_t i = 0; i < m; ++i) {
            const double d = static_cast<double>(f.counts[i]) - stats.mean[i];
            stats.std[i] += d * d;
        }
    }
    for (size_t i = 0; i < m; ++i) stats.std[i] = std::max(std::sqrt(stats.std[i] / n), kStdFloor);
    return stats;
}

double mlp_forward(const MlpParams& params, const FeatureStats& stats, const CoverageVector& x) {
    check_params(params);
    ForwardCache cache;
    forward_std(params, standardize(stats, x), cache);
    return cache.p;
}

double bce_loss(double p, int y) {
    const double z = std::log(p) - std::log1p(-p);
    return bce_from_logit(std::clamp(z, -kLogitClamp, kLogitClamp), y);
}

double learning_rate_at(const TrainConfig& config, long update_index) {
    return config.base_lr / (1.0 + config.decay * static_cast<double>(update_index));
}

MlpGradients bce_gradients(const MlpParams& params, const FeatureStats& stats,
                           const CoverageVector& x, int y, double* loss_out, double* prob_out) {
    check_params(params);
    ForwardCache cache;
    forward_std(params, standardize(stats, x), cache);
    if (loss_out) *loss_out = bce_from_logit(cache.clamped, y);
    if (prob_out) *prob_out = cache.p;
    MlpGradients g = zero_gradients(params);
    accumulate_gradients(params, cache, y, g);
    return g;
}

TrainResult train(const std::vector<CoverageVector>& features, const TrainConfig& config) {
    if (config.base_lr <= 0.0) throw Error("train: base_lr must be positive");
    if (config.momentum < 0.0 || config.momentum >= 1.0) throw Error("train: momentum must be in [0,1)");
    if (config.batch_size < 1) throw Error("train: batch_size must be >= 1");
    if (features.empty()) throw Error("train: no training features");

    size_t n_real = 0, n_fake = 0;
    for (size_t i = 0; i < features.size(); ++i) {
        if (!features[i].label) {
            throw Error("train: feature " + std::to_string(i) + " has no label");
        }
        (*features[i].label == Label::fake ? n_fake : n_real)++;
    }
    if (n_real == 0 || n_fake == 0) {
        throw Error("train: need both classes, got " + std::to_string(n_real) + " real and " +
                    std::to_string(n_fake) + " fake samples");
    }

    TrainResult result;
    result.stats = fit_feature_stats(features);

    const size_t n = features.size();
    const int m = static_cast<int>(features.front().counts.size());
    std::vector<std::vector<double>> inputs(n);
    std::vector<int> targets(n);
    for (size_t i = 0; i < n; ++i) {
        inputs[i] = standardize(result.stats, features[i]);
        targets[i] = *features[i].label == Label::fake ? 1 : 0;
    }

    // He-style init: uniform +-sqrt(6 / fan_in), biases zero
    CounterRng init_rng(derive_seed(config.seed, 0));
    std::vector<int> dims{m};
    for (int d : kHiddenDims) dims.push_back(d);
    dims.push_back(1);
    for (size_t k = 0; k + 1 < dims.size(); ++k) {
        DenseWeights w(dims[k + 1], dims[k]);
        const double bound = std::sqrt(6.0 / static_cast<double>(dims[k]));
        for (double& v : w.matrix) v = bound * (2.0 * init_rng.next_uniform() - 1.0);
        result.params.stages.push_back(std::move(w));
    }

    std::vector<std::vector<double>> vel_matrix, vel_bias;
    for (const auto& w : result.params.stages) {
        vel_matrix.emplace_back(w.matrix.size(), 0.0);
        vel_bias.emplace_back(w.bias.size(), 0.0);
    }

    CounterRng shuffle_rng(derive_seed(config.seed, 1));
    long updates_done = 0;
    ForwardCache cache;
    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const std::vector<size_t> perm = random_permutation(shuffle_rng, n);
        double loss_sum = 0.0;
        size_t correct = 0;
        size_t batch_index = 0;
        for (size_t start = 0; start < n; start += static_cast<size_t>(config.batch_size)) {
            const size_t end = std::min(n, start + static_cast<size_t>(config.batch_size));
            MlpGradients grads = zero_gradients(result.params);
            for (size_t pos = start; pos < end; ++pos) {
                const size_t idx = perm[pos];
                forward_std(result.params, inputs[idx], cache);
                const double loss = bce_from_logit(cache.clamped, targets[idx]);
                if (!std::isfinite(loss)) {
                    throw Error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                ", batch " + std::to_string(batch_index));
                }
                loss_sum += loss;
                const bool said_fake = cache.p > 0.5;
                if (said_fake == (targets[idx] == 1)) ++correct;
                accumulate_gradients(result.params, cache, targets[idx], grads);
            }
            const double inv_batch = 1.0 / static_cast<double>(end - start);
            const double lr = learning_rate_at(config, updates_done);
            for (size_t k = 0; k < result.params.stages.size(); ++k) {
                DenseWeights& w = result.params.stages[k];
                for (size_t i = 0; i < w.matrix.size(); ++i) {
                    vel_matrix[k][i] =
                        config.momentum * vel_matrix[k][i] - lr * grads.matrix[k][i] * inv_batch;
                    w.matrix[i] += vel_matrix[k][i];
                }
                for (size_t i = 0; i < w.bias.size(); ++i) {
                    vel_bias[k][i] =
                        config.momentum * vel_bias[k][i] - lr * grads.bias[k][i] * inv_batch;
                    w.bias[i] += vel_bias[k][i];
                }
            }
            ++updates_done;
            ++batch_index;
        }
        result.history.push_back({epoch, loss_sum / static_cast<double>(n),
                                  static_cast<double>(correct) / static_cast<double>(n)});
    }
    return result;
}

std::pair<Label, double> predict(const MlpParams& params, const FeatureStats& stats,
                                 const CoverageVector& x) {
    const double p = mlp_forward(params, stats, x);
    return {p > 0.5 ? Label::fake : Label::real, p};
}

void save_classifier(const MlpParams& params, const FeatureStats& stats, const TrainConfig& config,
                     const std::string& path) {
    check_params(params);
    std::vector<uint8_t> blob;
    size_t count = 0;
    for (const auto& w : params.stages) {
        for (double v : w.matrix) append_f64_le(blob, v);
        for (double v : w.bias) append_f64_le(blob, v);
        count += w.matrix.size() + w.bias.size();
    }

    json header;
    header["format"] = "covspot-classifier";
    json dims = json::array();
    dims.push_back(params.stages.front().in_dim);
    for (const auto& w : params.stages) dims.push_back(w.out_dim);
    header["dims"] = dims;
    header["seed"] = config.seed;
    header["train_config"] = {{"base_lr", config.base_lr},
                              {"momentum", config.momentum},
                              {"decay", config.decay},
                              {"batch_size", config.batch_size},
                              {"max_epochs", config.max_epochs}};
    header["feature_stats"] = {{"mean", stats.mean}, {"std", stats.std}};
    header["weight_count"] = count;
    header["weight_checksum"] = to_hex(fnv1a(blob.data(), blob.size()));

    const std::string header_text = header.dump();
    std::vector<uint8_t> bytes;
    append_u32_le(bytes, static_cast<uint32_t>(header_text.size()));
    bytes.insert(bytes.end(), header_text.begin(), header_text.end());
    bytes.insert(bytes.end(), blob.begin(), blob.end());
    write_file_bytes(path, bytes);
}

LoadedClassifier load_classifier(const std::string& path) {
    const std::vector<uint8_t> bytes = read_file_bytes(path);
    if (bytes.size() < 4) throw Error("malformed classifier file " + path + ": too short");
    const uint32_t header_len = read_u32_le(bytes.data());
    if (bytes.size() < 4 + static_cast<size_t>(header_len)) {
        throw Error("malformed classifier file " + path + ": truncated header");
    }

    LoadedClassifier out;
    std::vector<int> dims;
    size_t weight_count = 0;
    std::string checksum;
    try {
        const json header =
            json::parse(bytes.begin() + 4, bytes.begin() + 4 + static_cast<size_t>(header_len));
        if (header.at("format").get<std::string>() != "covspot-classifier") {
            throw Error("malformed classifier file " + path + ": unexpected format tag");
        }
        dims = header.at("dims").get<std::vector<int>>();
        out.config.seed = header.at("seed").get<uint64_t>();
        const auto& tc = header.at("train_config");
        out.config.base_lr = tc.at("base_lr").get<double>();
        out.config.momentum = tc.at("momentum").get<double>();
        out.config.decay = tc.at("decay").get<double>();
        out.config.batch_size = tc.at("batch_size").get<int>();
        out.config.max_epochs = tc.at("max_epochs").get<int>();
        out.stats.mean = header.at("feature_stats").at("mean").get<std::vector<double>>();
        out.stats.std = header.at("feature_stats").at("std").get<std::vector<double>>();
        weight_count = header.at("weight_count").get<size_t>();
        checksum = header.at("weight_checksum").get<std::string>();
    } catch (const json::exception& e) {
        throw Error("malformed classifier file " + path + ": " + e.what());
    }

    if (dims.size() != 6) {
        throw Error("malformed classifier file " + path + ": expected 6 dims, got " +
                    std::to_string(dims.size()));
    }
    const std::vector<int> expected_tail{64, 32, 16, 8, 1};
    for (size_t i = 0; i < expected_tail.size(); ++i) {
        if (dims[i + 1] != expected_tail[i]) {
            throw Error("malformed classifier file " + path + ": stage " + std::to_string(i) +
                        " must output " + std::to_string(expected_tail[i]) + " dims, got " +
                        std::to_string(dims[i + 1]));
        }
    }
    if (out.stats.mean.size() != static_cast<size_t>(dims[0]) ||
        out.stats.std.size() != static_cast<size_t>(dims[0])) {
        throw Error("classifier file " + path + ": feature stats have " +
                    std::to_string(out.stats.mean.size()) + " dims, expected " +
                    std::to_string(dims[0]));
    }

    size_t expected_count = 0;
    for (size_t k = 0; k + 1 < dims.size(); ++k) {
        expected_count += static_cast<size_t>(dims[k]) * dims[k + 1] + dims[k + 1];
    }
    if (weight_count != expected_count) {
        throw Error("classifier file " + path + ": weight count " + std::to_string(weight_count) +
                    " does not match dims (expected " + std::to_string(expected_count) + ")");
    }
    const size_t blob_offset = 4 + static_cast<size_t>(header_len);
    const size_t blob_size = bytes.size() - blob_offset;
    if (blob_size != weight_count * 8) {
        throw Error("classifier file " + path + ": weight blob has " + std::to_string(blob_size) +
                    " bytes, expected " + std::to_string(weight_count * 8));
    }
    const std::string actual = to_hex(fnv1a(bytes.data() + blob_offset, blob_size));
    if (actual != checksum) {
        throw Error("classifier file " + path + ": weight checksum mismatch (header " + checksum +
                    ", blob " + actual + ")");
    }

    const uint8_t* p = bytes.data() + blob_offset;
    for (size_t k = 0; k + 1 < dims.size(); ++k) {
        DenseWeights w(dims[k + 1], dims[k]);
        for (double& v : w.matrix) {
            v = read_f64_le(p);
            p += 8;
        }
        for (double& v : w.bias) {
            v = read_f64_le(p);
            p += 8;
        }
        out.params.stages.push_back(std::move(w));
    }
    return out;
}

}  // namespace covspot
