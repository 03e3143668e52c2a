#pragma once

#include <filesystem>

#include "mlao/frame.hpp"

namespace mlao {

/// Reads a binary (P5) portable graymap with maxval <= 255, scaled to [0, 1].
Frame read_pgm(const std::filesystem::path& path);

/// Writes a 16-bit binary graymap; values are scaled so `full_scale` maps to 65535.
void write_pgm16(const std::filesystem::path& path, const Frame& f, double full_scale);

} // namespace mlao
