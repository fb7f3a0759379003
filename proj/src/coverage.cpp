#include "covspot/coverage.hpp"

#include <sstream>

#include "json.hpp"

#include "covspot/error.hpp"
#include "covspot/util.hpp"

namespace covspot {

using nlohmann::json;

const char* label_name(Label l) { return l == Label::fake ? "fake" : "real"; }

Label label_from_name(const std::string& name) {
    if (name == "real") return Label::real;
    if (name == "fake") return Label::fake;
    throw Error("unknown label '" + name + "' (expected 'real' or 'fake')");
}

LayerThresholds compute_thresholds(const ModelGraph& model,
                                   const std::vector<Tensor3>& training_images) {
    if (training_images.empty()) throw Error("compute_thresholds: training set is empty");

    const std::vector<int> layer_idx = model.eligible_layers();
    const std::vector<int> counts = model.eligible_neuron_counts();
    const size_t m = layer_idx.size();
    if (m == 0) throw Error("compute_thresholds: model has no eligible layers");

    std::vector<double> sums(m, 0.0);
    std::vector<double> comps(m, 0.0);  // Kahan compensation terms
    for (size_t t = 0; t < training_images.size(); ++t) {
        ActivationTrace trace;
        try {
            trace = forward_with_trace(model, training_images[t]);
        } catch (const Error& e) {
            throw Error("training image " + std::to_string(t) + ": " + e.what());
        }
        for (size_t l = 0; l < m; ++l) {
            for (double delta : trace.values[l]) {
                const double y = delta - comps[l];
                const double s = sums[l] + y;
                comps[l] = (s - sums[l]) - y;
                sums[l] = s;
            }
        }
    }

    LayerThresholds th;
    th.model_fingerprint = model.fingerprint;
    th.layer_indices = layer_idx;
    th.neuron_counts = counts;
    th.training_set_size = training_images.size();
    th.xi.resize(m);
    for (size_t l = 0; l < m; ++l) {
        th.xi[l] = sums[l] / (static_cast<double>(counts[l]) *
                              static_cast<double>(training_images.size()));
    }
    return th;
}

CoverageVector coverage_vector(const ActivationTrace& trace, const LayerThresholds& thresholds) {
    if (trace.model_fingerprint != thresholds.model_fingerprint) {
        throw Error("coverage_vector: trace fingerprint " + trace.model_fingerprint +
                    " does not match thresholds fingerprint " + thresholds.model_fingerprint);
    }
    const size_t m = thresholds.layer_count();
    if (trace.values.size() != m || trace.layer_indices != thresholds.layer_indices) {
        throw Error("coverage_vector: trace has " + std::to_string(trace.values.size()) +
                    " layers, thresholds have " + std::to_string(m));
    }
    CoverageVector out;
    out.counts.resize(m);
    for (size_t l = 0; l < m; ++l) {
        if (static_cast<int>(trace.values[l].size()) != thresholds.neuron_counts[l]) {
            throw Error("coverage_vector: layer " + std::to_string(thresholds.layer_indices[l]) +
                        " has " + std::to_string(trace.values[l].size()) + " neurons, expected " +
                        std::to_string(thresholds.neuron_counts[l]));
        }
        int count = 0;
        for (double delta : trace.values[l]) {
            if (delta > thresholds.xi[l]) ++count;  // strictly above
        }
        out.counts[l] = count;
    }
    return out;
}

std::vector<CoverageVector> batch_extract(const ModelGraph& model,
                                          const LayerThresholds& thresholds,
                                          const std::vector<LabeledImage>& images) {
    std::vector<CoverageVector> out;
    out.reserve(images.size());
    for (size_t i = 0; i < images.size(); ++i) {
        try {
            CoverageVector v = coverage_vector(forward_with_trace(model, images[i].image), thresholds);
            v.label = images[i].label;
            out.push_back(std::move(v));
        } catch (const Error& e) {
            throw Error("image " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

void save_thresholds(const LayerThresholds& thresholds, const std::string& path) {
    json j;
    j["format"] = "covspot-thresholds";
    j["model_fingerprint"] = thresholds.model_fingerprint;
    j["training_set_size"] = thresholds.training_set_size;
    json layers = json::array();
    for (size_t l = 0; l < thresholds.layer_count(); ++l) {
        layers.push_back({{"layer_index", thresholds.layer_indices[l]},
                          {"neuron_count", thresholds.neuron_counts[l]},
                          {"xi", thresholds.xi[l]}});
    }
    j["layers"] = layers;
    write_file_text(path, j.dump(2) + "\n");
}

LayerThresholds load_thresholds(const std::string& path) {
    LayerThresholds th;
    try {
        const json j = json::parse(read_file_text(path));
        if (j.at("format").get<std::string>() != "covspot-thresholds") {
            throw Error("malformed thresholds file " + path + ": unexpected format tag");
        }
        th.model_fingerprint = j.at("model_fingerprint").get<std::string>();
        th.training_set_size = j.at("training_set_size").get<size_t>();
        for (const auto& jl : j.at("layers")) {
            th.layer_indices.push_back(jl.at("layer_index").get<int>());
            th.neuron_counts.push_back(jl.at("neuron_count").get<int>());
            th.xi.push_back(jl.at("xi").get<double>());
        }
    } catch (const json::exception& e) {
        throw Error("malformed thresholds file " + path + ": " + e.what());
    }
    if (th.xi.empty()) throw Error("malformed thresholds file " + path + ": no layers");
    return th;
}

void write_features_csv(const std::vector<FeatureRow>& rows,
                        const std::vector<std::string>& layer_names, const std::string& path) {
    std::string out = "sample_id,label";
    for (const auto& name : layer_names) out += "," + name;
    out += "\n";
    for (const auto& row : rows) {
        if (row.vec.counts.size() != layer_names.size()) {
            throw Error("features row '" + row.sample_id + "' has " +
                        std::to_string(row.vec.counts.size()) + " counts, header has " +
                        std::to_string(layer_names.size()));
        }
        out += row.sample_id;
        out += ",";
        if (row.vec.label) out += row.vec.label == Label::fake ? "1" : "0";
        for (int c : row.vec.counts) out += "," + std::to_string(c);
        out += "\n";
    }
    write_file_text(path, out);
}

FeaturesFile read_features_csv(const std::string& path) {
    const std::string text = read_file_text(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw Error("features file " + path + " is empty");

    auto split = [](const std::string& s) {
        std::vector<std::string> fields;
        std::string cur;
        for (char ch : s) {
            if (ch == ',') {
                fields.push_back(cur);
                cur.clear();
            } else if (ch != '\r') {
                cur += ch;
            }
        }
        fields.push_back(cur);
        return fields;
    };

    FeaturesFile file;
    const auto header = split(line);
    if (header.size() < 3 || header[0] != "sample_id" || header[1] != "label") {
        throw Error("features file " + path + " has a malformed header");
    }
    file.layer_names.assign(header.begin() + 2, header.end());

    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto fields = split(line);
        if (fields.size() != header.size()) {
            throw Error("features file " + path + " line " + std::to_string(lineno) + ": expected " +
                        std::to_string(header.size()) + " fields, got " +
                        std::to_string(fields.size()));
        }
        FeatureRow row;
        row.sample_id = fields[0];
        if (!fields[1].empty()) {
            if (fields[1] == "0") {
                row.vec.label = Label::real;
            } else if (fields[1] == "1") {
                row.vec.label = Label::fake;
            } else {
                throw Error("features file " + path + " line " + std::to_string(lineno) +
                            ": label must be 0, 1, or empty, got '" + fields[1] + "'");
            }
        }
        for (size_t i = 2; i < fields.size(); ++i) {
            try {
                row.vec.counts.push_back(std::stoi(fields[i]));
            } catch (const std::exception&) {
                throw Error("features file " + path + " line " + std::to_string(lineno) +
                            ": bad count '" + fields[i] + "'");
            }
        }
        file.rows.push_back(std::move(row));
    }
    return file;
}

}  // namespace covspot
