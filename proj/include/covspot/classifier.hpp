#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "covspot/coverage.hpp"
#include "covspot/tensor.hpp"

namespace covspot {

/// Per-dimension standardization parameters fitted on training features.
struct FeatureStats {
    std::vector<double> mean;
    std::vector<double> std;  // floored at 1e-8
};

/// Five fully-connected stages, m -> 64 -> 32 -> 16 -> 8 -> 1, ReLU
/// between stages and a sigmoid on the single output.
struct MlpParams {
    std::vector<DenseWeights> stages;

    int input_dim() const { return stages.empty() ? 0 : stages.front().in_dim; }
};

struct TrainConfig {
    double base_lr = 1e-4;
    double momentum = 0.9;
    double decay = 1e-6;  // inverse-time learning-rate decay per update
    int batch_size = 32;
    int max_epochs = 300;
    uint64_t seed = 0;
};

struct EpochStats {
    int epoch = 0;  // 1-based
    double mean_loss = 0.0;
    double accuracy = 0.0;
};

struct TrainResult {
    MlpParams params;
    FeatureStats stats;
    std::vector<EpochStats> history;
};

/// Mean and population standard deviation per feature dimension.
FeatureStats fit_feature_stats(const std::vector<CoverageVector>& features);

/// Probability that x is fake. The output logit is clamped to [-30, 30],
/// so p stays strictly inside (0, 1).
double mlp_forward(const MlpParams& params, const FeatureStats& stats, const CoverageVector& x);

/// Binary cross-entropy -[y ln p + (1-y) ln(1-p)], evaluated in logit
/// space.
double bce_loss(double p, int y);

/// lr_t = base_lr / (1 + decay * t), t = completed update count.
double learning_rate_at(const TrainConfig& config, long update_index);

/// Per-sample gradient of the BCE loss with respect to every parameter,
/// by exact backpropagation. Layout mirrors MlpParams::stages.
struct MlpGradients {
    std::vector<std::vector<double>> matrix;
    std::vector<std::vector<double>> bias;
};

MlpGradients bce_gradients(const MlpParams& params, const FeatureStats& stats,
                           const CoverageVector& x, int y, double* loss_out = nullptr,
                           double* prob_out = nullptr);

/// Seeded init + mini-batch SGD with momentum over shuffled epochs.
/// Deterministic for a fixed config and feature order.
TrainResult train(const std::vector<CoverageVector>& features, const TrainConfig& config);

/// tag is fake iff p > 0.5; a tie goes to real.
std::pair<Label, double> predict(const MlpParams& params, const FeatureStats& stats,
                                 const CoverageVector& x);

void save_classifier(const MlpParams& params, const FeatureStats& stats, const TrainConfig& config,
                     const std::string& path);

struct LoadedClassifier {
    MlpParams params;
    FeatureStats stats;
    TrainConfig config;
};

LoadedClassifier load_classifier(const std::string& path);

}  // namespace covspot
