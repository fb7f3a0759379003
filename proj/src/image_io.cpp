#include "covspot/image_io.hpp"

#include <cctype>
#include <cmath>

#include "covspot/error.hpp"
#include "covspot/util.hpp"

namespace covspot {

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string next_token(const std::vector<uint8_t>& bytes, size_t& pos, const std::string& path) {
    while (pos < bytes.size()) {
        if (std::isspace(bytes[pos])) {
            ++pos;
        } else if (bytes[pos] == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
    if (pos >= bytes.size()) throw Error("truncated header in " + path);
    std::string token;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) {
        token += static_cast<char>(bytes[pos]);
        ++pos;
    }
    return token;
}

int parse_dim(const std::string& token, const std::string& path) {
    try {
        const int v = std::stoi(token);
        if (v <= 0) throw std::out_of_range("nonpositive");
        return v;
    } catch (const std::exception&) {
        throw Error("bad dimension '" + token + "' in " + path);
    }
}

}  // namespace

Image read_ppm(const std::string& path) {
    const std::vector<uint8_t> bytes = read_file_bytes(path);
    if (bytes.size() < 2) throw Error("not a PPM/PGM file (too short): " + path);
    const std::string magic(bytes.begin(), bytes.begin() + 2);
    if (magic != "P6" && magic != "P5") {
        throw Error("bad magic '" + magic + "' in " + path + " (expected P6 or P5)");
    }
    size_t pos = 2;
    const int width = parse_dim(next_token(bytes, pos, path), path);
    const int height = parse_dim(next_token(bytes, pos, path), path);
    const std::string maxval = next_token(bytes, pos, path);
    if (maxval != "255") {
        throw Error("unsupported maxval " + maxval + " in " + path + " (only 255)");
    }
    ++pos;  // single whitespace after maxval

    const int channels = magic == "P6" ? 3 : 1;
    const size_t expected = static_cast<size_t>(channels) * width * height;
    if (bytes.size() - pos < expected) {
        throw Error("truncated payload in " + path + ": expected " + std::to_string(expected) +
                    " bytes, got " + std::to_string(bytes.size() - pos));
    }

    Image img(height, width);
    if (channels == 3) {
        size_t p = pos;
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                for (int c = 0; c < 3; ++c) {
                    img.at(c, y, x) = static_cast<double>(bytes[p++]) / 255.0;
                }
            }
        }
    } else {
        size_t p = pos;
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                const double v = static_cast<double>(bytes[p++]) / 255.0;
                img.at(0, y, x) = v;
                img.at(1, y, x) = v;
                img.at(2, y, x) = v;
            }
        }
    }
    return img;
}

void write_ppm(const Image& img, const std::string& path) {
    std::string header =
        "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<uint8_t> bytes(header.begin(), header.end());
    bytes.reserve(bytes.size() + static_cast<size_t>(3) * img.height * img.width);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                const double v = std::clamp(img.at(c, y, x), 0.0, 1.0);
                bytes.push_back(static_cast<uint8_t>(std::lround(v * 255.0)));
            }
        }
    }
    write_file_bytes(path, bytes);
}

}  // namespace covspot
