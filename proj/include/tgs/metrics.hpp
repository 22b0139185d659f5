/*
 * Copyright 2026 The TGS Agent Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tgs/core_types.hpp"

namespace tgs {

/// |pred ∩ gt| / |pred ∪ gt|, and 1 when both masks are empty.
double jaccard(const FrameMask& pred, const FrameMask& gt);

/// Foreground pixels with at least one 4-neighbour that is background or
/// outside the frame.
FrameMask boundary_map(const FrameMask& mask);

/// round(0.8% of the frame diagonal), at least 1 pixel.
int default_boundary_tolerance(int width, int height);

/// Boundary F-measure. A boundary pixel matches when a boundary pixel of the
/// other mask lies within `tolerance_px` in Chebyshev distance.
double boundary_f(const FrameMask& pred, const FrameMask& gt, int tolerance_px);

/// Predicted foreground area over the frame area (null-split ground truth is
/// all background).
double null_s(const FrameMask& pred);

enum class Averaging {
  /// Mean over frames within a sample, then over samples.
  PerFrameThenSample,
  /// Mean over all frames of the split.
  PooledFrames,
};

struct EvalSample {
  std::string uid;
  Split split = Split::Seen;
  std::vector<FrameMask> pred;
  std::optional<std::vector<FrameMask>> gt;
};

struct EvalOptions {
  /// Defaults to default_boundary_tolerance per frame.
  std::optional<int> tolerance_px;
  Averaging averaging = Averaging::PerFrameThenSample;
};

struct SampleScores {
  std::string uid;
  Split split = Split::Seen;
  std::vector<double> frame_j;
  std::vector<double> frame_f;
  std::vector<double> frame_s;
  double j = 0.0;
  double f = 0.0;
  double s = 0.0;
};

struct SplitScores {
  double j = 0.0;
  double f = 0.0;
  /// Always (j + f) / 2 of the aggregated values.
  double jf = 0.0;
  std::size_t samples = 0;
};

struct EvalReport {
  Averaging averaging = Averaging::PerFrameThenSample;
  /// Keys "seen", "unseen", "mix"; splits without samples are absent.
  std::map<std::string, SplitScores> per_split;
  std::optional<double> null_s;
  std::size_t null_samples = 0;
  /// The same aggregates under the other averaging convention.
  std::map<std::string, SplitScores> alternate_per_split;
  std::optional<double> alternate_null_s;
  /// Sorted by uid.
  std::vector<SampleScores> per_sample;
};

/// Throws std::invalid_argument when a non-null sample lacks ground truth or
/// mask counts and sizes disagree.
EvalReport aggregate(std::span<const EvalSample> samples, const EvalOptions& options = {});

nlohmann::json report_to_json(const EvalReport& report);
/// Fixed-width grid: J, F, J&F for Seen, Unseen, Mix, then S for Null.
std::string report_to_table(const EvalReport& report, bool verbose = false);
std::string report_to_csv(const EvalReport& report);

enum class CategoryMatch { Exact, NormalizedMatch, Miss };

std::string_view to_string(CategoryMatch match);

/// Lowercase, hyphens and underscores as spaces, trailing plural 's' dropped per word.
std::string normalize_category(std::string_view text);
CategoryMatch match_category(std::string_view s_object, std::string_view gt_category);

struct CategoryTally {
  std::size_t exact = 0;
  std::size_t normalized = 0;
  std::size_t miss = 0;

  std::size_t total() const { return exact + normalized + miss; }
  double exact_rate() const { return total() ? static_cast<double>(exact) / total() : 0.0; }
  double match_rate() const {
    return total() ? static_cast<double>(exact + normalized) / total() : 0.0;
  }
};

struct CategoryPair {
  Split split = Split::Seen;
  std::string s_object;
  std::string gt_category;
};

/// Tallies keyed by split name plus "mix" for Seen and Unseen together.
std::map<std::string, CategoryTally> tally_categories(std::span<const CategoryPair> pairs);

}  // namespace tgs
