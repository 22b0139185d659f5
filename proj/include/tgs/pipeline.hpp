/*
 * Copyright 2026 The TGS Agent Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tgs/core_types.hpp"
#include "tgs/refchain.hpp"
#include "tgs/toolbus.hpp"

namespace tgs {

enum class BoxSelection { HighestBoxScore, HighestProduct };

struct PipelineConfig {
  /// Minimum box confidence; comparison is inclusive.
  double tau_bbox = 0.1;
  /// Minimum text-match confidence; comparison is inclusive.
  double tau_text = 0.25;
  PromptType prompt_type = PromptType::SObject;
  BoxSelection box_selection = BoxSelection::HighestBoxScore;
  int workers = 1;
  PromptTemplate prompt_template = default_user_prompt_template();
  ToolSet tools;

  /// Throws std::invalid_argument for thresholds outside [0,1] or workers < 1.
  void validate() const;
};

/// Reads a JSON config: tau_bbox, tau_text, prompt_type (f|s|ref),
/// box_selection (box_score|product), workers, prompt_template (path) and a
/// backends object as accepted by make_toolset.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j,
                                         const std::filesystem::path& base_dir);

/// Candidates meeting both thresholds (inclusive), in input order.
std::vector<GroundedBox> filter_candidates(std::span<const GroundedBox> candidates,
                                           const PipelineConfig& cfg);

/// Drops candidates below either threshold, then returns the survivor with
/// the largest selection key. Ties go to the lexicographically smallest
/// (x1, y1, x2, y2).
std::optional<GroundedBox> filter_and_select(std::span<const GroundedBox> candidates,
                                             const PipelineConfig& cfg);

/// Grounding query for the configured prompt type; nullopt means the chain
/// reports no object.
std::optional<std::string> select_prompt_text(const ReasoningChain& chain, PromptType type,
                                              const std::string& reference);

enum class SampleStatus { Ok, ThinkFailed, ParseFailed, ToolError };

std::string_view to_string(SampleStatus status);

struct SampleResult {
  std::string uid;
  std::vector<FrameMask> masks;
  PipelineTrace trace;
  SampleStatus status = SampleStatus::Ok;
  /// Stage and error kind for ThinkFailed / ToolError.
  std::optional<Capability> failed_stage;
  std::optional<ToolErrorKind> error_kind;
  /// Strict parsing failed and the lenient extractor produced the chain.
  bool lenient_extraction = false;
};

/// Equality over everything except wall-clock timings.
bool same_outcome(const SampleResult& a, const SampleResult& b);

SampleResult run_sample(const ReferenceSample& sample, const PipelineConfig& cfg);

struct BatchSummary {
  std::size_t total = 0;
  std::map<SampleStatus, std::size_t> counts;

  std::size_t count(SampleStatus status) const {
    auto it = counts.find(status);
    return it == counts.end() ? 0 : it->second;
  }
};

struct BatchResult {
  std::vector<SampleResult> results;
  BatchSummary summary;
};

/// Results come back in input order whatever the worker count.
BatchResult run_batch(std::span<const ReferenceSample> samples, const PipelineConfig& cfg);

nlohmann::ordered_json trace_to_json(const SampleResult& result);
nlohmann::json summary_to_json(const BatchSummary& summary);

}  // namespace tgs
