#pragma once

#include <filesystem>

#include "fvs/image.hpp"

namespace fvs {

// 8-bit RGB PNG, no interlace. Writing uses fixed libpng settings so that
// the same pixels always produce the same bytes.
RgbTile read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const RgbTile& img);

}  // namespace fvs
