#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "covspot/tensor.hpp"

namespace covspot {

/// RGB image with values in [0,1], stored as three channel planes
/// (channel-major then row-major, like Tensor3).
struct Image {
    int height = 0;
    int width = 0;
    std::vector<double> data;  // 3 * height * width

    Image() = default;
    Image(int h, int w, double fill = 0.0);

    double& at(int c, int y, int x) {
        return data[static_cast<size_t>((c * height + y) * width + x)];
    }
    double at(int c, int y, int x) const {
        return data[static_cast<size_t>((c * height + y) * width + x)];
    }
};

Tensor3 to_tensor(const Image& img);
Image image_from_tensor(const Tensor3& t);

enum class PerturbKind { compress, blur, resize, noise };

struct PerturbSpec {
    PerturbKind kind = PerturbKind::noise;
    double intensity = 0.0;
    uint64_t seed = 0;  // noise only
};

/// Block-DCT compression artifact: per channel, 8x8 DCT-II, quantization
/// with the standard luminance table scaled by the quality factor,
/// dequantization, inverse DCT. Quality 100 is near lossless.
Image compress(const Image& img, double quality);

/// 3x3 Gaussian kernel with the given sigma, normalized to sum 1; edge
/// replication at the borders.
Image blur(const Image& img, double sigma);

/// Bilinear resample down by `scale`, then back up to the original size
/// (half-pixel center alignment). scale = 1 is an exact identity.
Image resize_attack(const Image& img, double scale);

/// I.i.d. zero-mean Gaussian noise of the given variance per value, from
/// the counter-based generator + Box-Muller, clamped to [0,1].
Image add_noise(const Image& img, double variance, uint64_t seed);

Image apply(const PerturbSpec& spec, const Image& img);

const char* perturb_kind_name(PerturbKind kind);
PerturbKind perturb_kind_from_name(const std::string& name);

/// "kind:intensity[:seed]", e.g. "blur:1.0" or "noise:0.01:42".
std::string to_string(const PerturbSpec& spec);
PerturbSpec parse_perturb_spec(const std::string& text);

}  // namespace covspot
