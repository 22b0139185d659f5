/*
 * Copyright 2026 The TGS Agent Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tgs/core_types.hpp"

namespace tgs {

enum class MaskFormat { Pgm, RleJson };

/// Malformed mask payload. `position` is a byte offset for Pgm and
/// a run index for RleJson.
class CodecError : public std::runtime_error {
 public:
  CodecError(MaskFormat format, std::size_t position, const std::string& message);

  MaskFormat format() const { return format_; }
  std::size_t position() const { return position_; }
  const std::string& detail() const { return detail_; }

 private:
  MaskFormat format_;
  std::size_t position_;
  std::string detail_;
};

// Pgm is a binary PGM (P5, maxval 255): 0 = background, 255 = foreground.
// RleJson is {"w":W,"h":H,"runs":[...]}, row-major, first run is background.

std::string encode_mask(const FrameMask& mask, MaskFormat format);
FrameMask decode_mask(std::string_view payload, MaskFormat format);

/// Row-major run lengths starting with a background run (possibly 0).
std::vector<std::size_t> mask_runs(const FrameMask& mask);
FrameMask mask_from_runs(int width, int height, const std::vector<std::size_t>& runs);

/// Grayscale PGM reading, shared with frame loading.
Raster decode_pgm(std::string_view payload);
std::string encode_pgm(const Raster& raster);

/// Format is chosen from the extension: `.json` is RleJson, anything else PGM.
FrameMask read_mask_file(const std::filesystem::path& path);
void write_mask_file(const std::filesystem::path& path, const FrameMask& mask);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace tgs
