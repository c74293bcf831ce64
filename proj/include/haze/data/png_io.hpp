#pragma once

#include <cstdint>
#include <string>

#include "haze/core/tensor.hpp"

namespace haze {

// Reads an 8- or 16-bit PNG (gray, gray+alpha, RGB or RGBA) into a
// (3,H,W) tensor in [0,1]. 16-bit samples are scaled by 1/65535.
Tensor read_png(const std::string& path);

// Writes a (3,H,W) or (1,H,W) tensor in [0,1] as an 8-bit PNG.
void write_png(const std::string& path, const Tensor& image);

void write_png_gray16(const std::string& path, const uint16_t* pixels, int width, int height);

}  // namespace haze
