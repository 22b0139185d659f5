/*
 * Copyright 2026 The TGS Agent Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "tgs/core_types.hpp"

#include <algorithm>
#include <cmath>

#include "tgs/mask_codec.hpp"

namespace tgs {

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Seen:
      return "seen";
    case Split::Unseen:
      return "unseen";
    case Split::Null:
      return "null";
  }
  return "unknown";
}

Split split_from_string(std::string_view text) {
  if (text == "seen") return Split::Seen;
  if (text == "unseen") return Split::Unseen;
  if (text == "null") return Split::Null;
  throw std::invalid_argument("unknown split '" + std::string(text) + "'");
}

std::string_view to_string(PromptType type) {
  switch (type) {
    case PromptType::FObject:
      return "f_object";
    case PromptType::SObject:
      return "s_object";
    case PromptType::RawReference:
      return "reference";
  }
  return "unknown";
}

PromptType prompt_type_from_string(std::string_view text) {
  if (text == "f" || text == "f_object") return PromptType::FObject;
  if (text == "s" || text == "s_object") return PromptType::SObject;
  if (text == "ref" || text == "reference") return PromptType::RawReference;
  throw std::invalid_argument("unknown prompt type '" + std::string(text) + "'");
}

FrameMask::FrameMask(int width, int height, std::vector<bool> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("mask dimensions must be positive");
  }
  if (bits_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("mask bit count does not match width x height");
  }
}

std::size_t mask_area(const FrameMask& mask) {
  return static_cast<std::size_t>(std::count(mask.bits().begin(), mask.bits().end(), true));
}

FrameMask all_background(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("mask dimensions must be positive");
  }
  return FrameMask(width, height,
                   std::vector<bool>(static_cast<std::size_t>(width) * height, false));
}

FrameMask box_mask(int width, int height, int x1, int y1, int x2, int y2) {
  std::vector<bool> bits(static_cast<std::size_t>(width) * height, false);
  for (int y = std::max(0, y1); y < std::min(height, y2); ++y) {
    for (int x = std::max(0, x1); x < std::min(width, x2); ++x) {
      bits[static_cast<std::size_t>(y) * width + x] = true;
    }
  }
  return FrameMask(width, height, std::move(bits));
}

GroundedBox GroundedBox::make(int x1, int y1, int x2, int y2, double box_score,
                              double text_score, int frame_width, int frame_height) {
  if (!(0 <= x1 && x1 < x2 && x2 <= frame_width)) {
    throw std::invalid_argument("box x-range [" + std::to_string(x1) + ", " +
                                std::to_string(x2) + ") invalid for frame width " +
                                std::to_string(frame_width));
  }
  if (!(0 <= y1 && y1 < y2 && y2 <= frame_height)) {
    throw std::invalid_argument("box y-range [" + std::to_string(y1) + ", " +
                                std::to_string(y2) + ") invalid for frame height " +
                                std::to_string(frame_height));
  }
  auto unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  if (!unit(box_score) || !unit(text_score)) {
    throw std::invalid_argument("box scores must lie in [0, 1]");
  }
  return GroundedBox(x1, y1, x2, y2, box_score, text_score);
}

FrameRef FrameRef::in_memory(std::string id, int width, int height) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("frame dimensions must be positive");
  auto raster = std::make_shared<Raster>();
  raster->width = width;
  raster->height = height;
  raster->pixels.assign(static_cast<std::size_t>(width) * height, 0);
  FrameRef ref;
  ref.id = std::move(id);
  ref.width = width;
  ref.height = height;
  ref.raster = std::move(raster);
  return ref;
}

FrameRef FrameRef::from_file(std::string id, const std::filesystem::path& path) {
  const Raster header = decode_pgm(read_file(path));
  FrameRef ref;
  ref.id = std::move(id);
  ref.width = header.width;
  ref.height = header.height;
  ref.path = path;
  return ref;
}

ReferenceSample::ReferenceSample(std::string uid, std::vector<FrameRef> frames,
                                 std::optional<std::string> audio, std::string reference,
                                 Split split, std::optional<std::vector<FrameMask>> gt_masks,
                                 std::optional<std::string> gt_category)
    : uid_(std::move(uid)),
      frames_(std::move(frames)),
      audio_(std::move(audio)),
      reference_(std::move(reference)),
      split_(split),
      gt_masks_(std::move(gt_masks)),
      gt_category_(std::move(gt_category)) {
  if (frames_.empty()) throw std::invalid_argument("sample '" + uid_ + "' has no frames");
  if (reference_.empty()) throw std::invalid_argument("sample '" + uid_ + "' has empty reference");
  for (const auto& f : frames_) {
    if (f.width != frames_.front().width || f.height != frames_.front().height) {
      throw std::invalid_argument("sample '" + uid_ + "' mixes frame sizes");
    }
  }
  if (gt_masks_) {
    if (gt_masks_->size() != frames_.size()) {
      throw std::invalid_argument("sample '" + uid_ + "' gt mask count differs from frame count");
    }
    for (const auto& m : *gt_masks_) {
      if (m.width() != width() || m.height() != height()) {
        throw std::invalid_argument("sample '" + uid_ + "' gt mask size differs from frame size");
      }
      if (split_ == Split::Null && mask_area(m) != 0) {
        throw std::invalid_argument("null-split sample '" + uid_ + "' has foreground in gt");
      }
    }
  }
}

}  // namespace tgs
