/*
 * Copyright 2026 The TGS Agent Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tgs/core_types.hpp"
#include "tgs/refchain.hpp"
#include "tgs/toolbus.hpp"

namespace tgs {

enum class Provenance { Original, Transformed, HumanRevised };

std::string_view to_string(Provenance provenance);
Provenance provenance_from_string(std::string_view text);

/// Back-reference from a transformed entry to the entry it was derived from.
struct SourceRef {
  std::string uid;
  std::string reference;

  bool operator==(const SourceRef&) const = default;
};

struct ManifestEntry {
  std::string uid;
  Split split = Split::Seen;
  std::string reference;
  /// Paths relative to the manifest root.
  std::vector<std::string> frames;
  std::optional<std::string> audio;
  std::optional<std::vector<std::string>> gt_mask_paths;
  std::optional<std::string> gt_category;
  Provenance provenance = Provenance::Original;
  std::optional<SourceRef> source;

  bool operator==(const ManifestEntry&) const = default;
};

struct BenchmarkManifest {
  std::string name;
  std::string version;
  std::vector<ManifestEntry> entries;
  /// Optional "root" field: directory of the media, relative to the manifest
  /// file (or absolute). Defaults to the manifest directory.
  std::optional<std::string> declared_root;
  /// Resolved directory that entry paths are relative to; not serialized.
  std::filesystem::path root;

  std::size_t count(Split split) const;
};

/// Schema or consistency failure. `pointer` is a JSON pointer into the
/// manifest document ("" for the whole document).
class ManifestError : public std::runtime_error {
 public:
  ManifestError(std::string pointer, const std::string& message);
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

struct ManifestLoadOptions {
  /// Promote dangling-path warnings to errors.
  bool strict = false;
};

struct ManifestLoad {
  BenchmarkManifest manifest;
  /// "<pointer>: <message>" for each non-fatal finding.
  std::vector<std::string> warnings;
};

ManifestLoad load_manifest(const std::filesystem::path& path, const ManifestLoadOptions& options = {});
/// `manifest_dir` is the directory holding the manifest document.
ManifestLoad manifest_from_json(const nlohmann::json& doc, const std::filesystem::path& manifest_dir,
                                const ManifestLoadOptions& options = {});

nlohmann::json manifest_to_json(const BenchmarkManifest& manifest);
/// Canonical text: sorted keys, two-space indent, trailing newline.
std::string serialize_manifest(const BenchmarkManifest& manifest);
void save_manifest(const BenchmarkManifest& manifest, const std::filesystem::path& path);

/// Sets declared_root so that entry paths keep resolving to the same files
/// when the manifest is written into `manifest_dir`.
void rebase_manifest(BenchmarkManifest& manifest, const std::filesystem::path& manifest_dir);

/// Resolves frames and masks against the manifest root.
ReferenceSample load_sample(const BenchmarkManifest& manifest, const ManifestEntry& entry);
std::vector<ReferenceSample> load_samples(const BenchmarkManifest& manifest);

// ---------------------------------------------------------------------------
// Reference transformation and review

enum class ReviewKind { Pending, Accepted, Revised, Rejected };

std::string_view to_string(ReviewKind kind);

struct ReviewStatus {
  ReviewKind kind = ReviewKind::Pending;
  /// Replacement text for Revised, reason for Rejected, empty otherwise.
  std::string text;

  static ReviewStatus pending() { return {}; }
  static ReviewStatus accepted() { return {ReviewKind::Accepted, {}}; }
  static ReviewStatus revised(std::string text) { return {ReviewKind::Revised, std::move(text)}; }
  static ReviewStatus rejected(std::string reason) {
    return {ReviewKind::Rejected, std::move(reason)};
  }

  bool operator==(const ReviewStatus&) const = default;
};

struct TransformRecord {
  std::string uid;
  std::string original_reference;
  std::string target_object_name;
  std::string generated_reference;
  std::size_t word_count = 0;
  ReviewStatus review;
  /// Automatic review hints such as "word-band".
  std::vector<std::string> flags;

  /// The reference a finalized entry would carry; empty unless accepted or revised.
  std::string final_reference() const;

  bool operator==(const TransformRecord&) const = default;
};

inline constexpr std::size_t kMinGeneratedWords = 5;
inline constexpr std::size_t kMaxGeneratedWords = 15;

/// Bindings: {{uid}}, {{target_object_name}}, {{mask_mention}}.
PromptTemplate default_transform_template();

/// Pulls the generated expression out of a text-generation reply: a JSON
/// object with "complex_ref" (optionally fenced or keyed by uid), otherwise
/// the trimmed text with surrounding quotes removed.
std::string extract_generated_reference(std::string_view reply, std::string_view uid = {});

/// Never throws for backend or content problems; those become Rejected
/// records. Throws TemplateError when the template lacks {{uid}} or
/// {{target_object_name}}.
TransformRecord transform_reference(const ManifestEntry& entry, const GenerateBackend& backend,
                                    const PromptTemplate& prompt);

/// One record per entry, in manifest order, whatever the worker count.
std::vector<TransformRecord> transform_manifest(const BenchmarkManifest& manifest,
                                                const GenerateBackend& backend,
                                                const PromptTemplate& prompt, int workers = 1);

struct ReviewCounts {
  std::size_t pending = 0;
  std::size_t accepted = 0;
  std::size_t revised = 0;
  std::size_t rejected = 0;

  std::size_t total() const { return pending + accepted + revised + rejected; }
};

ReviewCounts count_reviews(std::span<const TransformRecord> records);

/// One JSON object per line. The decision slot ("decision") is null for
/// pending records; reviewers set it to "accept", "revise" (with "revised_text")
/// or "reject" (with "reason").
std::string export_review_queue(std::span<const TransformRecord> records);

class ReviewError : public std::runtime_error {
 public:
  ReviewError(std::size_t line, const std::string& message);
  /// 1-based line in the review file; 0 when not tied to a line.
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Parses an edited review file. Every row uid must name an entry of
/// `source`; a revise decision needs non-empty text.
std::vector<TransformRecord> import_review_decisions(std::string_view review_jsonl,
                                                     const BenchmarkManifest& source);

/// Keeps Accepted and Revised records, carrying over split, media and gt
/// paths of the source entry.
BenchmarkManifest finalize_manifest(const BenchmarkManifest& source,
                                    std::span<const TransformRecord> records);

nlohmann::json transform_record_to_json(const TransformRecord& record);

// ---------------------------------------------------------------------------
// Linguistic statistics

struct ReferenceStats {
  std::size_t references = 0;
  std::size_t total_words = 0;
  double avg_words = 0.0;
  /// Word count -> number of references.
  std::map<std::size_t, std::size_t> word_histogram;
  /// Lowercased word -> occurrences.
  std::map<std::string, std::size_t> vocabulary;
};

ReferenceStats reference_stats(std::span<const std::string> references);
ReferenceStats reference_stats(const BenchmarkManifest& manifest);

nlohmann::json stats_to_json(const ReferenceStats& stats);
/// Rows "section,key,count" for the histogram and the vocabulary.
std::string stats_to_csv(const ReferenceStats& stats);

}  // namespace tgs
