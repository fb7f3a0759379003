#include "covspot/tensor.hpp"

#include <algorithm>
#include <string>

#include "covspot/error.hpp"

namespace covspot {

namespace {

void require_positive(int v, const char* name) {
    if (v <= 0) throw Error(std::string(name) + " must be positive, got " + std::to_string(v));
}

}  // namespace

Tensor3::Tensor3(int c, int h, int w, double fill) : channels(c), height(h), width(w) {
    require_positive(c, "channels");
    require_positive(h, "height");
    require_positive(w, "width");
    data.assign(static_cast<size_t>(c) * h * w, fill);
}

Tensor1::Tensor1(int len, double fill) {
    require_positive(len, "length");
    data.assign(static_cast<size_t>(len), fill);
}

ConvWeights::ConvWeights(int oc, int ic, int kh, int kw)
    : out_channels(oc), in_channels(ic), kernel_h(kh), kernel_w(kw) {
    require_positive(oc, "out_channels");
    require_positive(ic, "in_channels");
    require_positive(kh, "kernel_h");
    require_positive(kw, "kernel_w");
    kernel.assign(static_cast<size_t>(oc) * ic * kh * kw, 0.0);
    bias.assign(static_cast<size_t>(oc), 0.0);
}

DenseWeights::DenseWeights(int out, int in) : out_dim(out), in_dim(in) {
    require_positive(out, "out_dim");
    require_positive(in, "in_dim");
    matrix.assign(static_cast<size_t>(out) * in, 0.0);
    bias.assign(static_cast<size_t>(out), 0.0);
}

Tensor3 conv2d(const Tensor3& input, const ConvWeights& w, int stride, int padding) {
    if (input.channels != w.in_channels) {
        throw Error("conv2d channel mismatch: kernel expects " + std::to_string(w.in_channels) +
                    " input channels, got " + std::to_string(input.channels));
    }
    if (stride <= 0) throw Error("conv2d stride must be positive, got " + std::to_string(stride));
    if (padding < 0) throw Error("conv2d padding must be nonnegative, got " + std::to_string(padding));
    const int out_h = (input.height + 2 * padding - w.kernel_h) / stride + 1;
    const int out_w = (input.width + 2 * padding - w.kernel_w) / stride + 1;
    if (input.height + 2 * padding < w.kernel_h || input.width + 2 * padding < w.kernel_w ||
        out_h < 1 || out_w < 1) {
        throw Error("conv2d output would be empty: input " + std::to_string(input.height) + "x" +
                    std::to_string(input.width) + ", kernel " + std::to_string(w.kernel_h) + "x" +
                    std::to_string(w.kernel_w) + ", stride " + std::to_string(stride) +
                    ", padding " + std::to_string(padding));
    }

    Tensor3 out(w.out_channels, out_h, out_w);
    for (int o = 0; o < w.out_channels; ++o) {
        for (int y = 0; y < out_h; ++y) {
            for (int x = 0; x < out_w; ++x) {
                double acc = w.bias[static_cast<size_t>(o)];
                for (int c = 0; c < w.in_channels; ++c) {
                    for (int ky = 0; ky < w.kernel_h; ++ky) {
                        const int iy = y * stride + ky - padding;
                        if (iy < 0 || iy >= input.height) continue;
                        for (int kx = 0; kx < w.kernel_w; ++kx) {
                            const int ix = x * stride + kx - padding;
                            if (ix < 0 || ix >= input.width) continue;
                            acc += input.at(c, iy, ix) * w.kernel_at(o, c, ky, kx);
                        }
                    }
                }
                out.at(o, y, x) = acc;
            }
        }
    }
    return out;
}

Tensor3 relu(const Tensor3& x) {
    Tensor3 out = x;
    for (double& v : out.data) v = std::max(0.0, v);
    return out;
}

Tensor1 relu(const Tensor1& x) {
    Tensor1 out = x;
    for (double& v : out.data) v = std::max(0.0, v);
    return out;
}

Tensor3 maxpool2(const Tensor3& x) {
    if (x.height % 2 != 0 || x.width % 2 != 0) {
        throw Error("maxpool2 requires even spatial dims, got " + std::to_string(x.height) + "x" +
                    std::to_string(x.width));
    }
    Tensor3 out(x.channels, x.height / 2, x.width / 2);
    for (int c = 0; c < x.channels; ++c) {
        for (int y = 0; y < out.height; ++y) {
            for (int xo = 0; xo < out.width; ++xo) {
                const double a = x.at(c, 2 * y, 2 * xo);
                const double b = x.at(c, 2 * y, 2 * xo + 1);
                const double d = x.at(c, 2 * y + 1, 2 * xo);
                const double e = x.at(c, 2 * y + 1, 2 * xo + 1);
                out.at(c, y, xo) = std::max(std::max(a, b), std::max(d, e));
            }
        }
    }
    return out;
}

Tensor1 global_avg_pool(const Tensor3& x) {
    Tensor1 out(x.channels);
    const double inv = 1.0 / (static_cast<double>(x.height) * x.width);
    for (int c = 0; c < x.channels; ++c) {
        double sum = 0.0;
        for (int y = 0; y < x.height; ++y) {
            for (int xo = 0; xo < x.width; ++xo) sum += x.at(c, y, xo);
        }
        out.data[static_cast<size_t>(c)] = sum * inv;
    }
    return out;
}

Tensor1 dense(const Tensor1& x, const DenseWeights& w) {
    if (x.length() != w.in_dim) {
        throw Error("dense dimension mismatch: weights expect input of length " +
                    std::to_string(w.in_dim) + ", got " + std::to_string(x.length()));
    }
    Tensor1 out(w.out_dim);
    for (int o = 0; o < w.out_dim; ++o) {
        double acc = w.bias[static_cast<size_t>(o)];
        for (int i = 0; i < w.in_dim; ++i) {
            acc += w.matrix_at(o, i) * x.data[static_cast<size_t>(i)];
        }
        out.data[static_cast<size_t>(o)] = acc;
    }
    return out;
}

}  // namespace covspot
