/*
 * Copyright 2026 The TGS Agent Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tgs/core_types.hpp"

namespace tgs {

// Object-aware reasoning chain:
//
//   <think>
//      The referential expression is: "...". The video shows ... The audio ...
//   </think>
//   <answer>
//      <f_object>
//         fine-grained description
//      </f_object>
//      <s_object>
//         category
//      </s_object>
//   </answer>
//
// An absent object is written as the body "null" in both answer elements.

inline constexpr std::string_view kNullMarker = "null";

/// Sentence-level view of the think block, filled only when all four
/// sentence kinds are recognised.
struct StructuredThink {
  std::string reference_echo;
  std::string video_analysis;
  std::string audio_analysis;
  std::string modality_analysis;

  friend bool operator==(const StructuredThink&, const StructuredThink&) = default;
};

std::optional<StructuredThink> structure_think(std::string_view think_text);

/// Unvalidated fields as extracted from model output. Bodies are normalized
/// (trimmed; think lines trimmed with blank lines dropped; answer bodies
/// collapsed to one line).
struct ChainFields {
  std::optional<std::string> think;
  std::string f_object;
  std::string s_object;
};

class ReasoningChain {
 public:
  /// Throws std::invalid_argument when the fields break the chain invariants:
  /// null markers must be coupled, bodies non-empty, no reserved tag text,
  /// answer bodies on a single line.
  static ReasoningChain make(std::optional<std::string> think, std::string f_object,
                             std::string s_object);
  static ReasoningChain make(ChainFields fields);
  static ReasoningChain null_object(std::optional<std::string> think);

  const std::optional<std::string>& think() const { return think_; }
  const std::optional<StructuredThink>& structured_think() const { return structured_; }
  bool is_null() const { return f_object_ == kNullMarker; }
  const std::string& f_object() const { return f_object_; }
  const std::string& s_object() const { return s_object_; }

  ChainFields fields() const { return {think_, f_object_, s_object_}; }

  friend bool operator==(const ReasoningChain&, const ReasoningChain&) = default;

 private:
  ReasoningChain() = default;

  std::optional<std::string> think_;
  std::optional<StructuredThink> structured_;
  std::string f_object_;
  std::string s_object_;
};

enum class ParseMode {
  /// Canonical layout: each tag on its own line, fixed order, think required.
  Strict,
  /// Runtime extraction: case-insensitive tags, tags may share lines, think
  /// and answer wrappers optional, answer elements in either order.
  Lenient,
};

enum class ParseErrorKind {
  MissingTag,
  TagOrderViolation,
  DuplicateTag,
  EmptyAnswerSection,
  TagLineViolation,
  UnexpectedContent,
  NullMarkerMismatch,
};

std::string_view to_string(ParseErrorKind kind);

class ChainParseError : public std::runtime_error {
 public:
  ChainParseError(ParseErrorKind kind, std::string tag, std::size_t begin, std::size_t end,
                  const std::string& message);

  ParseErrorKind kind() const { return kind_; }
  const std::string& tag() const { return tag_; }
  /// Byte span [begin, end) in the raw input.
  std::size_t begin() const { return begin_; }
  std::size_t end() const { return end_; }

 private:
  ParseErrorKind kind_;
  std::string tag_;
  std::size_t begin_;
  std::size_t end_;
};

struct ParseResult {
  ReasoningChain chain;
  /// Leniencies the input needed, e.g. "missing-think", "inline-tags".
  std::vector<std::string> flags;
};

/// Extracts fields without enforcing chain invariants (null coupling, empty s_object).
ChainFields parse_chain_fields(std::string_view raw, ParseMode mode = ParseMode::Strict,
                               std::vector<std::string>* flags = nullptr);

ReasoningChain parse_chain(std::string_view raw, ParseMode mode = ParseMode::Strict);
ParseResult parse_chain_with_flags(std::string_view raw, ParseMode mode);

std::string serialize_chain(const ReasoningChain& chain);

// ---- validation ----

struct ValidationPolicy {
  std::size_t f_soft_min_words = 6;
  std::size_t f_soft_max_words = 10;
  std::size_t f_hard_max_words = 20;
  std::size_t s_max_words = 3;
  bool require_reference_echo = true;
  /// When set, the echoed reference must equal this text.
  std::optional<std::string> expected_reference;
};

enum class Severity { Warning, Hard };

enum class ViolationCode {
  FObjectLengthSoft,
  FObjectLengthHard,
  SObjectTooLong,
  MissingReferenceEcho,
  ReferenceEchoMismatch,
  NullMarkerMismatch,
  EmptySObject,
};

std::string_view to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  Severity severity;
  std::string message;
};

std::vector<Violation> validate_chain(const ChainFields& fields, const ValidationPolicy& policy = {});
std::vector<Violation> validate_chain(const ReasoningChain& chain,
                                      const ValidationPolicy& policy = {});
bool has_hard_violation(const std::vector<Violation>& violations);

/// Whitespace-delimited tokens with punctuation stripped; tokens left empty
/// are not counted.
std::vector<std::string> words(std::string_view text);
std::size_t word_count(std::string_view text);

// ---- prompts ----

class TemplateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text with `{{name}}` placeholders.
class PromptTemplate {
 public:
  PromptTemplate(std::string id, std::string text);

  static PromptTemplate from_file(const std::string& path);

  const std::string& id() const { return id_; }
  const std::string& text() const { return text_; }
  const std::vector<std::string>& placeholders() const { return names_; }
  bool has_placeholder(std::string_view name) const;

  /// Every placeholder must be bound and every binding must be used.
  std::string render(const std::map<std::string, std::string>& bindings) const;

 private:
  std::string id_;
  std::string text_;
  std::vector<std::string> names_;
};

inline constexpr std::string_view kVideoSpan = "<video_start><video><video_end>";
inline constexpr std::string_view kAudioSpan = "<audio_start><audio><audio_end>";

PromptTemplate default_user_prompt_template();

/// Binds `video_span`, `audio_span` and `reference`. The template must carry
/// all three placeholders.
std::string render_user_prompt(const PromptTemplate& tmpl, std::string_view reference);

// ---- instruction tuning set ----

struct TuningRecord {
  std::string uid;
  std::string user_prompt;
  std::string target;
};

struct TuningRejection {
  std::string uid;
  std::vector<std::string> reasons;
};

struct TuningOutcome {
  std::optional<TuningRecord> record;
  std::optional<TuningRejection> rejection;

  bool accepted() const { return record.has_value(); }
};

TuningOutcome build_tuning_record(const ReferenceSample& sample, std::string_view teacher_output,
                                  const PromptTemplate& tmpl = default_user_prompt_template(),
                                  const ValidationPolicy& policy = {});

/// One JSON object per line: {"uid","user_prompt","target"}.
std::string tuning_record_jsonl(const TuningRecord& record);

}  // namespace tgs
