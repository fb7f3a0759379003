#include "covspot/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>

#include "json.hpp"

#include "covspot/error.hpp"
#include "covspot/image_io.hpp"
#include "covspot/perturb.hpp"
#include "covspot/rng.hpp"
#include "covspot/util.hpp"

namespace covspot {

namespace fs = std::filesystem;
using nlohmann::json;

const char* split_name(Split s) { return s == Split::train ? "train" : "test"; }

Split split_from_name(const std::string& name) {
    if (name == "train") return Split::train;
    if (name == "test") return Split::test;
    throw Error("unknown split '" + name + "' (expected 'train' or 'test')");
}

std::vector<ManifestEntry> DatasetManifest::split_entries(Split s) const {
    std::vector<ManifestEntry> out;
    for (const auto& e : entries) {
        if (e.split == s) out.push_back(e);
    }
    return out;
}

std::string DatasetManifest::resolve(const ManifestEntry& e) const {
    return (fs::path(root) / e.path).string();
}

DatasetManifest load_manifest(const std::string& path) {
    DatasetManifest manifest;
    manifest.root = fs::path(path).parent_path().string();
    if (manifest.root.empty()) manifest.root = ".";

    std::istringstream in(read_file_text(path));
    std::string line;
    size_t lineno = 0;
    std::set<std::string> seen;
    std::set<std::string> train_paths, test_paths;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        ManifestEntry entry;
        try {
            const json j = json::parse(line);
            entry.path = j.at("path").get<std::string>();
            entry.label = label_from_name(j.at("label").get<std::string>());
            entry.split = split_from_name(j.at("split").get<std::string>());
        } catch (const json::exception& e) {
            throw Error("manifest " + path + " line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!seen.insert(entry.path).second) {
            throw Error("manifest " + path + " line " + std::to_string(lineno) +
                        ": duplicate path '" + entry.path + "'");
        }
        (entry.split == Split::train ? train_paths : test_paths).insert(entry.path);
        const std::string full = manifest.resolve(entry);
        if (!fs::exists(full)) {
            throw Error("manifest " + path + " line " + std::to_string(lineno) +
                        ": file does not exist: " + full);
        }
        manifest.entries.push_back(std::move(entry));
    }
    // split hygiene (already implied by the duplicate check, but kept explicit)
    for (const auto& p : train_paths) {
        if (test_paths.count(p)) {
            throw Error("manifest " + path + ": path '" + p + "' appears in both splits");
        }
    }
    return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
    std::string out;
    for (const auto& e : manifest.entries) {
        json j;
        j["path"] = e.path;
        j["label"] = label_name(e.label);
        j["split"] = split_name(e.split);
        out += j.dump() + "\n";
    }
    write_file_text(path, out);
}

namespace {

// Low-frequency random field: white noise, three 3x3 Gaussian blur passes
// at sigma 1, then an affine map of [min, max] onto [0.2, 0.8].
Image real_style_base(int height, int width, uint64_t seed) {
    CounterRng rng(seed);
    Image img(height, width);
    for (double& v : img.data) v = rng.next_uniform();
    for (int pass = 0; pass < 3; ++pass) img = blur(img, 1.0);

    double lo = img.data[0], hi = img.data[0];
    for (double v : img.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi > lo) {
        const double scale = 0.6 / (hi - lo);
        for (double& v : img.data) v = 0.2 + (v - lo) * scale;
    } else {
        for (double& v : img.data) v = 0.5;
    }
    return img;
}

void add_checkerboard(Image& img, double amplitude, int period) {
    const int cell = period / 2;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double sign = ((y / cell + x / cell) % 2 == 0) ? 1.0 : -1.0;
            for (int c = 0; c < 3; ++c) {
                img.at(c, y, x) = std::clamp(img.at(c, y, x) + amplitude * sign, 0.0, 1.0);
            }
        }
    }
}

}  // namespace

DatasetManifest gen_synthetic(const SyntheticSpec& spec, const std::string& out_dir) {
    if (spec.amplitude < 0.0 || spec.amplitude > 0.5) {
        throw Error("synthetic amplitude must be in [0, 0.5], got " + format_double(spec.amplitude));
    }
    if (spec.period < 2 || spec.period % 2 != 0) {
        throw Error("synthetic period must be even and >= 2, got " + std::to_string(spec.period));
    }
    if (spec.train_per_class < 0 || spec.test_per_class < 0) {
        throw Error("synthetic per-class counts must be nonnegative");
    }

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error("cannot create directory " + out_dir + ": " + ec.message());

    DatasetManifest manifest;
    manifest.root = out_dir;

    uint64_t image_counter = 0;
    auto emit = [&](Label label, Split split, int index) {
        const uint64_t img_seed = derive_seed(spec.seed, image_counter++);
        Image img = real_style_base(spec.height, spec.width, img_seed);
        if (label == Label::fake) add_checkerboard(img, spec.amplitude, spec.period);

        char name[64];
        std::snprintf(name, sizeof(name), "%s_%s_%04d.ppm", label_name(label), split_name(split),
                      index);
        write_ppm(img, (fs::path(out_dir) / name).string());
        manifest.entries.push_back({name, label, split});
    };

    for (int i = 0; i < spec.train_per_class; ++i) emit(Label::real, Split::train, i);
    for (int i = 0; i < spec.train_per_class; ++i) emit(Label::fake, Split::train, i);
    for (int i = 0; i < spec.test_per_class; ++i) emit(Label::real, Split::test, i);
    for (int i = 0; i < spec.test_per_class; ++i) emit(Label::fake, Split::test, i);

    save_manifest(manifest, (fs::path(out_dir) / "manifest.jsonl").string());
    return manifest;
}

}  // namespace covspot
