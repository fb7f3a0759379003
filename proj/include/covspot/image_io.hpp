#pragma once

#include <string>

#include "covspot/perturb.hpp"

namespace covspot {

/// Reads binary PPM (P6, RGB) or PGM (P5, grayscale replicated to three
/// channels), maxval 255. Values map to [0,1] via v/255.
Image read_ppm(const std::string& path);

/// Writes binary P6, quantizing with round(v * 255).
void write_ppm(const Image& img, const std::string& path);

}  // namespace covspot
