#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "covspot/model.hpp"

namespace covspot {

enum class Label { real = 0, fake = 1 };

const char* label_name(Label l);
Label label_from_name(const std::string& name);

/// Per-layer activation thresholds: xi_l is the mean neuron output over
/// all neurons of layer l and all training inputs.
struct LayerThresholds {
    std::string model_fingerprint;
    std::vector<int> layer_indices;
    std::vector<int> neuron_counts;
    std::vector<double> xi;
    size_t training_set_size = 0;

    size_t layer_count() const { return xi.size(); }
};

/// Layer-wise activated-neuron counts for one input; the classifier's
/// feature vector.
struct CoverageVector {
    std::vector<int> counts;
    std::optional<Label> label;
};

/// Fits xi_l = sum of neuron outputs / (|N| * |T|) per eligible layer.
/// Per-layer sums accumulate in input order with compensated summation,
/// so any reordering of the training set leaves xi unchanged.
LayerThresholds compute_thresholds(const ModelGraph& model,
                                   const std::vector<Tensor3>& training_images);

/// counts[l] = number of neurons with delta strictly above xi_l. Values
/// exactly equal to the threshold are not activated.
CoverageVector coverage_vector(const ActivationTrace& trace, const LayerThresholds& thresholds);

struct LabeledImage {
    Tensor3 image;
    std::optional<Label> label;
};

/// Order-preserving forward_with_trace + coverage_vector over a batch;
/// labels carried through. Per-image failures rethrow with the index.
std::vector<CoverageVector> batch_extract(const ModelGraph& model,
                                          const LayerThresholds& thresholds,
                                          const std::vector<LabeledImage>& images);

void save_thresholds(const LayerThresholds& thresholds, const std::string& path);
LayerThresholds load_thresholds(const std::string& path);

/// One features-file row.
struct FeatureRow {
    std::string sample_id;
    CoverageVector vec;
};

void write_features_csv(const std::vector<FeatureRow>& rows,
                        const std::vector<std::string>& layer_names, const std::string& path);

struct FeaturesFile {
    std::vector<std::string> layer_names;
    std::vector<FeatureRow> rows;
};

FeaturesFile read_features_csv(const std::string& path);

}  // namespace covspot
