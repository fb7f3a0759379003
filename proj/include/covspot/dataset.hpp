#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "covspot/coverage.hpp"

namespace covspot {

enum class Split { train, test };

const char* split_name(Split s);
Split split_from_name(const std::string& name);

struct ManifestEntry {
    std::string path;  // relative to the manifest's directory
    Label label = Label::real;
    Split split = Split::train;
};

struct DatasetManifest {
    std::string root;  // directory the entry paths are relative to
    std::vector<ManifestEntry> entries;

    std::vector<ManifestEntry> split_entries(Split s) const;
    std::string resolve(const ManifestEntry& e) const;
};

/// JSON lines, one {"path":..., "label":"real|fake", "split":"train|test"}
/// per line. Loading validates labels, splits, duplicate paths, and that
/// every file exists.
DatasetManifest load_manifest(const std::string& path);
void save_manifest(const DatasetManifest& manifest, const std::string& path);

struct SyntheticSpec {
    int train_per_class = 200;
    int test_per_class = 100;
    int height = 32;
    int width = 32;
    double amplitude = 0.08;  // checkerboard artifact strength, in [0, 0.5]
    int period = 2;           // checkerboard spatial period in pixels (even)
    uint64_t seed = 0;
};

/// Generates the synthetic corpus under out_dir: "real" images are
/// low-frequency random fields (white noise blurred three times with the
/// 3x3 sigma=1 Gaussian, mapped to [0.2, 0.8]); "fake" images add a
/// zero-mean checkerboard of the given amplitude to a real-style base.
/// Writes PPMs plus manifest.jsonl and returns the loaded manifest.
DatasetManifest gen_synthetic(const SyntheticSpec& spec, const std::string& out_dir);

}  // namespace covspot
