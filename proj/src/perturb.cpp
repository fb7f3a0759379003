#include "covspot/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "covspot/error.hpp"
#include "covspot/rng.hpp"
#include "covspot/util.hpp"

namespace covspot {

Image::Image(int h, int w, double fill) : height(h), width(w) {
    if (h <= 0 || w <= 0) {
        throw Error("image dims must be positive, got " + std::to_string(h) + "x" +
                    std::to_string(w));
    }
    data.assign(static_cast<size_t>(3) * h * w, fill);
}

Tensor3 to_tensor(const Image& img) {
    Tensor3 t(3, img.height, img.width);
    t.data = img.data;
    return t;
}

Image image_from_tensor(const Tensor3& t) {
    if (t.channels != 3) {
        throw Error("image requires 3 channels, tensor has " + std::to_string(t.channels));
    }
    Image img(t.height, t.width);
    img.data = t.data;
    return img;
}

namespace {

// Standard luminance quantization table.
const int kQuantTable[8][8] = {
    {16, 11, 10, 16, 24, 40, 51, 61},   {12, 12, 14, 19, 26, 58, 60, 55},
    {14, 13, 16, 24, 40, 57, 69, 56},   {14, 17, 22, 29, 51, 87, 80, 62},
    {18, 22, 37, 56, 68, 109, 103, 77}, {24, 35, 55, 64, 81, 104, 113, 92},
    {49, 64, 78, 87, 103, 121, 120, 101}, {72, 92, 95, 98, 112, 100, 103, 99},
};

struct DctTables {
    double cosine[8][8];  // cosine[x][u] = cos((2x+1) u pi / 16)
    double c[8];          // c[0] = 1/sqrt(2), else 1
    DctTables() {
        for (int x = 0; x < 8; ++x) {
            for (int u = 0; u < 8; ++u) {
                cosine[x][u] = std::cos((2.0 * x + 1.0) * u * std::numbers::pi / 16.0);
            }
        }
        c[0] = 1.0 / std::sqrt(2.0);
        for (int u = 1; u < 8; ++u) c[u] = 1.0;
    }
};

const DctTables& dct_tables() {
    static const DctTables tables;
    return tables;
}

void dct8x8(const double in[8][8], double out[8][8]) {
    const DctTables& t = dct_tables();
    for (int u = 0; u < 8; ++u) {
        for (int v = 0; v < 8; ++v) {
            double acc = 0.0;
            for (int y = 0; y < 8; ++y) {
                for (int x = 0; x < 8; ++x) {
                    acc += in[y][x] * t.cosine[y][u] * t.cosine[x][v];
                }
            }
            out[u][v] = 0.25 * t.c[u] * t.c[v] * acc;
        }
    }
}

void idct8x8(const double in[8][8], double out[8][8]) {
    const DctTables& t = dct_tables();
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
            double acc = 0.0;
            for (int u = 0; u < 8; ++u) {
                for (int v = 0; v < 8; ++v) {
                    acc += t.c[u] * t.c[v] * in[u][v] * t.cosine[y][u] * t.cosine[x][v];
                }
            }
            out[y][x] = 0.25 * acc;
        }
    }
}

}  // namespace

Image compress(const Image& img, double quality) {
    if (quality < 1.0 || quality > 100.0) {
        throw Error("compress quality must be in [1,100], got " + format_double(quality));
    }
    const double s = quality < 50.0 ? 5000.0 / quality : 200.0 - 2.0 * quality;
    int qtab[8][8];
    for (int u = 0; u < 8; ++u) {
        for (int v = 0; v < 8; ++v) {
            const double scaled = std::floor((kQuantTable[u][v] * s + 50.0) / 100.0);
            qtab[u][v] = static_cast<int>(std::clamp(scaled, 1.0, 255.0));
        }
    }

    const int ph = (img.height + 7) / 8 * 8;
    const int pw = (img.width + 7) / 8 * 8;
    Image out(img.height, img.width);
    double block[8][8], coeff[8][8], recon[8][8];
    for (int c = 0; c < 3; ++c) {
        for (int by = 0; by < ph; by += 8) {
            for (int bx = 0; bx < pw; bx += 8) {
                for (int y = 0; y < 8; ++y) {
                    // edge replication past the image border
                    const int sy = std::min(by + y, img.height - 1);
                    for (int x = 0; x < 8; ++x) {
                        const int sx = std::min(bx + x, img.width - 1);
                        block[y][x] = img.at(c, sy, sx) * 255.0 - 128.0;
                    }
                }
                dct8x8(block, coeff);
                for (int u = 0; u < 8; ++u) {
                    for (int v = 0; v < 8; ++v) {
                        const double q = static_cast<double>(qtab[u][v]);
                        // round half away from zero
                        coeff[u][v] = static_cast<double>(std::llround(coeff[u][v] / q)) * q;
                    }
                }
                idct8x8(coeff, recon);
                for (int y = 0; y < 8 && by + y < img.height; ++y) {
                    for (int x = 0; x < 8 && bx + x < img.width; ++x) {
                        out.at(c, by + y, bx + x) =
                            std::clamp((recon[y][x] + 128.0) / 255.0, 0.0, 1.0);
                    }
                }
            }
        }
    }
    return out;
}

Image blur(const Image& img, double sigma) {
    if (!(sigma > 0.0)) throw Error("blur sigma must be positive, got " + format_double(sigma));
    double k[3][3];
    double sum = 0.0;
    for (int i = -1; i <= 1; ++i) {
        for (int j = -1; j <= 1; ++j) {
            k[i + 1][j + 1] = std::exp(-(i * i + j * j) / (2.0 * sigma * sigma));
            sum += k[i + 1][j + 1];
        }
    }
    for (auto& row : k) {
        for (double& v : row) v /= sum;
    }

    Image out(img.height, img.width);
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x) {
                double acc = 0.0;
                for (int i = -1; i <= 1; ++i) {
                    const int sy = std::clamp(y + i, 0, img.height - 1);
                    for (int j = -1; j <= 1; ++j) {
                        const int sx = std::clamp(x + j, 0, img.width - 1);
                        acc += k[i + 1][j + 1] * img.at(c, sy, sx);
                    }
                }
                out.at(c, y, x) = std::clamp(acc, 0.0, 1.0);
            }
        }
    }
    return out;
}

namespace {

// Half-pixel-centered bilinear resample of one channel plane.
void bilinear_plane(const Image& src, int channel, Image& dst) {
    const double y_scale = static_cast<double>(src.height) / dst.height;
    const double x_scale = static_cast<double>(src.width) / dst.width;
    for (int y = 0; y < dst.height; ++y) {
        const double in_y = (y + 0.5) * y_scale - 0.5;
        const int top = std::max(static_cast<int>(std::floor(in_y)), 0);
        const int bottom = std::min(static_cast<int>(std::ceil(in_y)), src.height - 1);
        const double y_lerp = in_y - std::floor(in_y);
        for (int x = 0; x < dst.width; ++x) {
            const double in_x = (x + 0.5) * x_scale - 0.5;
            const int left = std::max(static_cast<int>(std::floor(in_x)), 0);
            const int right = std::min(static_cast<int>(std::ceil(in_x)), src.width - 1);
            const double x_lerp = in_x - std::floor(in_x);
            const double tl = src.at(channel, top, left);
            const double tr = src.at(channel, top, right);
            const double bl = src.at(channel, bottom, left);
            const double br = src.at(channel, bottom, right);
            const double t = tl + (tr - tl) * x_lerp;
            const double b = bl + (br - bl) * x_lerp;
            dst.at(channel, y, x) = t + (b - t) * y_lerp;
        }
    }
}

Image bilinear_resize(const Image& src, int out_h, int out_w) {
    Image dst(out_h, out_w);
    for (int c = 0; c < 3; ++c) bilinear_plane(src, c, dst);
    return dst;
}

}  // namespace

Image resize_attack(const Image& img, double scale) {
    if (!(scale > 0.0) || scale > 1.0) {
        throw Error("resize scale must be in (0,1], got " + format_double(scale));
    }
    const int small_h = std::max(1, static_cast<int>(std::lround(scale * img.height)));
    const int small_w = std::max(1, static_cast<int>(std::lround(scale * img.width)));
    const Image small = bilinear_resize(img, small_h, small_w);
    Image out = bilinear_resize(small, img.height, img.width);
    for (double& v : out.data) v = std::clamp(v, 0.0, 1.0);
    return out;
}

Image add_noise(const Image& img, double variance, uint64_t seed) {
    if (variance < 0.0) {
        throw Error("noise variance must be nonnegative, got " + format_double(variance));
    }
    const double stddev = std::sqrt(variance);
    CounterRng rng(seed);
    Image out = img;
    for (double& v : out.data) {
        v = std::clamp(v + stddev * rng.next_gaussian(), 0.0, 1.0);
    }
    return out;
}

Image apply(const PerturbSpec& spec, const Image& img) {
    switch (spec.kind) {
        case PerturbKind::compress: return compress(img, spec.intensity);
        case PerturbKind::blur: return blur(img, spec.intensity);
        case PerturbKind::resize: return resize_attack(img, spec.intensity);
        case PerturbKind::noise: return add_noise(img, spec.intensity, spec.seed);
    }
    throw Error("unknown perturbation kind");
}

const char* perturb_kind_name(PerturbKind kind) {
    switch (kind) {
        case PerturbKind::compress: return "compress";
        case PerturbKind::blur: return "blur";
        case PerturbKind::resize: return "resize";
        case PerturbKind::noise: return "noise";
    }
    return "?";
}

PerturbKind perturb_kind_from_name(const std::string& name) {
    if (name == "compress") return PerturbKind::compress;
    if (name == "blur") return PerturbKind::blur;
    if (name == "resize") return PerturbKind::resize;
    if (name == "noise") return PerturbKind::noise;
    throw Error("unknown perturbation kind '" + name + "'");
}

std::string to_string(const PerturbSpec& spec) {
    std::string s = std::string(perturb_kind_name(spec.kind)) + ":" + format_double(spec.intensity);
    if (spec.kind == PerturbKind::noise) s += ":" + std::to_string(spec.seed);
    return s;
}

PerturbSpec parse_perturb_spec(const std::string& text) {
    const size_t first = text.find(':');
    if (first == std::string::npos) {
        throw Error("perturbation spec must be kind:intensity[:seed], got '" + text + "'");
    }
    PerturbSpec spec;
    spec.kind = perturb_kind_from_name(text.substr(0, first));
    const size_t second = text.find(':', first + 1);
    if (second == std::string::npos) {
        spec.intensity = parse_double(text.substr(first + 1));
    } else {
        spec.intensity = parse_double(text.substr(first + 1, second - first - 1));
        try {
            spec.seed = std::stoull(text.substr(second + 1));
        } catch (const std::exception&) {
            throw Error("bad seed in perturbation spec '" + text + "'");
        }
    }
    return spec;
}

}  // namespace covspot
