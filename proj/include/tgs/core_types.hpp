/*
 * Copyright 2026 The TGS Agent Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tgs {

enum class Split { Seen, Unseen, Null };

std::string_view to_string(Split split);
Split split_from_string(std::string_view text);

/// Binary per-frame segmentation raster, row-major, true = foreground.
class FrameMask {
 public:
  FrameMask(int width, int height, std::vector<bool> bits);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return bits_.size(); }

  bool at(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x]; }
  bool operator[](std::size_t i) const { return bits_[i]; }
  const std::vector<bool>& bits() const { return bits_; }

  bool same_shape(const FrameMask& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const FrameMask&, const FrameMask&) = default;

 private:
  int width_;
  int height_;
  std::vector<bool> bits_;
};

/// Count of foreground pixels.
std::size_t mask_area(const FrameMask& mask);

FrameMask all_background(int width, int height);

/// Foreground on the half-open rectangle [x1,x2) x [y1,y2), clipped to the frame.
FrameMask box_mask(int width, int height, int x1, int y1, int x2, int y2);

/// Detection candidate on one frame. Corners are half-open pixel ranges
/// [x1, x2) x [y1, y2). Construction rejects invalid boxes; nothing is clamped.
class GroundedBox {
 public:
  static GroundedBox make(int x1, int y1, int x2, int y2, double box_score, double text_score,
                          int frame_width, int frame_height);

  int x1() const { return x1_; }
  int y1() const { return y1_; }
  int x2() const { return x2_; }
  int y2() const { return y2_; }
  double box_score() const { return box_score_; }
  double text_score() const { return text_score_; }
  long long area() const { return static_cast<long long>(x2_ - x1_) * (y2_ - y1_); }

  friend bool operator==(const GroundedBox&, const GroundedBox&) = default;

 private:
  GroundedBox(int x1, int y1, int x2, int y2, double box_score, double text_score)
      : x1_(x1), y1_(y1), x2_(x2), y2_(y2), box_score_(box_score), text_score_(text_score) {}

  int x1_, y1_, x2_, y2_;
  double box_score_;
  double text_score_;
};

/// 8-bit grayscale pixels for frames held in memory.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

/// A video frame, either a file on disk or an in-memory raster. `id` is the
/// identity mock backends key on; dimensions are always known.
struct FrameRef {
  std::string id;
  int width = 0;
  int height = 0;
  std::optional<std::filesystem::path> path;
  std::shared_ptr<const Raster> raster;

  static FrameRef in_memory(std::string id, int width, int height);
  static FrameRef from_file(std::string id, const std::filesystem::path& path);
};

class ReferenceSample {
 public:
  ReferenceSample(std::string uid, std::vector<FrameRef> frames, std::optional<std::string> audio,
                  std::string reference, Split split,
                  std::optional<std::vector<FrameMask>> gt_masks = std::nullopt,
                  std::optional<std::string> gt_category = std::nullopt);

  const std::string& uid() const { return uid_; }
  const std::vector<FrameRef>& frames() const { return frames_; }
  const std::optional<std::string>& audio() const { return audio_; }
  const std::string& reference() const { return reference_; }
  Split split() const { return split_; }
  const std::optional<std::vector<FrameMask>>& gt_masks() const { return gt_masks_; }
  const std::optional<std::string>& gt_category() const { return gt_category_; }
  int width() const { return frames_.front().width; }
  int height() const { return frames_.front().height; }

 private:
  std::string uid_;
  std::vector<FrameRef> frames_;
  std::optional<std::string> audio_;
  std::string reference_;
  Split split_;
  std::optional<std::vector<FrameMask>> gt_masks_;
  std::optional<std::string> gt_category_;
};

enum class PromptType { FObject, SObject, RawReference };

std::string_view to_string(PromptType type);
PromptType prompt_type_from_string(std::string_view text);

struct StageTimings {
  std::chrono::microseconds think{0};
  std::chrono::microseconds ground{0};
  std::chrono::microseconds segment{0};
};

class ReasoningChain;

/// Explainability record for one pipeline run over a sample.
struct PipelineTrace {
  std::string uid;
  std::string reasoning;
  std::shared_ptr<const ReasoningChain> parsed;
  PromptType prompt_used = PromptType::SObject;
  std::string query;
  std::vector<std::optional<GroundedBox>> boxes;
  std::vector<std::size_t> candidate_counts;
  std::vector<std::string> parse_flags;
  std::string error;
  StageTimings timings;
  std::map<std::string, std::string> tool_ids;
};

}  // namespace tgs
