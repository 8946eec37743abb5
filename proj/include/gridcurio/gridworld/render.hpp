#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gridcurio/gridworld/types.hpp"

namespace gridcurio {

using Rgb = std::array<std::uint8_t, 3>;

Rgb color_rgb(Color c);

/// Paints each tensor cell as a tile_size x tile_size block. Pure in its inputs.
RgbImage render_rgb(const EncodedTensor& tensor, int tile_size);

/// PNG byte stream (8-bit RGB, no interlace).
std::vector<std::uint8_t> encode_png(const RgbImage& image);
void write_png(const std::string& path, const RgbImage& image);

/// Plain-text dump: a `width height` line, then one line per row of
/// space-separated `object,color,state` triples.
std::string dump_text(const EncodedTensor& tensor);

}  // namespace gridcurio
