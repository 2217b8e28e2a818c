#pragma once

#include <filesystem>
#include <string>

#include "nutsedge/types.hpp"

namespace nutsedge {

/// 8-bit RGB PNG decode. RGBA alpha is dropped; gray is expanded to RGB.
RasterImage load_png(const std::filesystem::path& path);
void save_png(const RasterImage& image, const std::filesystem::path& path);

/// Grayscale PFM, 32-bit float. Written with a negative scale (little-endian)
/// and scanlines stored top-to-bottom; round-trips bit-exactly.
FloatGrid load_pfm(const std::filesystem::path& path);
void save_pfm(const FloatGrid& map, const std::filesystem::path& path);

/// 8-bit grayscale preview of a [0,1] map, for visual inspection only.
void save_map_preview_png(const FloatGrid& map, const std::filesystem::path& path);

}  // namespace nutsedge
