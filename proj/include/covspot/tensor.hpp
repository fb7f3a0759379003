#pragma once

#include <cstddef>
#include <vector>

namespace covspot {

/// Dense 3-D tensor, channel-major then row-major:
/// data[(c * height + y) * width + x]. This layout is the one used for
/// all serialization.
struct Tensor3 {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> data;

    Tensor3() = default;
    Tensor3(int c, int h, int w, double fill = 0.0);

    double& at(int c, int y, int x) {
        return data[static_cast<size_t>((c * height + y) * width + x)];
    }
    double at(int c, int y, int x) const {
        return data[static_cast<size_t>((c * height + y) * width + x)];
    }
    size_t size() const { return data.size(); }
};

/// Dense 1-D tensor.
struct Tensor1 {
    std::vector<double> data;

    Tensor1() = default;
    explicit Tensor1(int len, double fill = 0.0);

    int length() const { return static_cast<int>(data.size()); }
};

/// Convolution kernel + bias. Kernel values are [out][in][ky][kx].
struct ConvWeights {
    int out_channels = 0;
    int in_channels = 0;
    int kernel_h = 0;
    int kernel_w = 0;
    std::vector<double> kernel;
    std::vector<double> bias;

    ConvWeights() = default;
    ConvWeights(int oc, int ic, int kh, int kw);

    double& kernel_at(int o, int c, int ky, int kx) {
        return kernel[static_cast<size_t>(((o * in_channels + c) * kernel_h + ky) * kernel_w + kx)];
    }
    double kernel_at(int o, int c, int ky, int kx) const {
        return kernel[static_cast<size_t>(((o * in_channels + c) * kernel_h + ky) * kernel_w + kx)];
    }
};

/// Fully-connected weights, matrix row-major [out][in].
struct DenseWeights {
    int out_dim = 0;
    int in_dim = 0;
    std::vector<double> matrix;
    std::vector<double> bias;

    DenseWeights() = default;
    DenseWeights(int out, int in);

    double& matrix_at(int o, int i) { return matrix[static_cast<size_t>(o * in_dim + i)]; }
    double matrix_at(int o, int i) const { return matrix[static_cast<size_t>(o * in_dim + i)]; }
};

/// 2-D convolution with zero padding. Out-of-bounds input reads as 0.
Tensor3 conv2d(const Tensor3& input, const ConvWeights& w, int stride, int padding);

Tensor3 relu(const Tensor3& x);
Tensor1 relu(const Tensor1& x);

/// 2x2 max pooling, stride 2. Requires even spatial dims.
Tensor3 maxpool2(const Tensor3& x);

/// Per-channel spatial mean.
Tensor1 global_avg_pool(const Tensor3& x);

/// out = W * x + bias.
Tensor1 dense(const Tensor1& x, const DenseWeights& w);

}  // namespace covspot
