/*
 * Copyright 2026 The TGS Agent Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <chrono>
#include <compare>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "tgs/core_types.hpp"

namespace tgs {

enum class Capability { Think, Ground, Segment, Generate };

std::string_view to_string(Capability capability);

enum class ToolErrorKind {
  BackendUnavailable,
  Timeout,
  MalformedTransport,
  /// A mock was asked for something its spec does not declare, or a
  /// capability has no backend bound.
  Configuration,
  /// The backend answered with a box or mask that breaks the data invariants.
  Validation,
};

std::string_view to_string(ToolErrorKind kind);
ToolErrorKind tool_error_kind_from_string(std::string_view text);

class ToolError : public std::runtime_error {
 public:
  ToolError(Capability capability, ToolErrorKind kind, const std::string& message);

  Capability capability() const { return capability_; }
  ToolErrorKind kind() const { return kind_; }
  const std::string& detail() const { return detail_; }
  bool is_transport() const {
    return kind_ == ToolErrorKind::BackendUnavailable || kind_ == ToolErrorKind::Timeout ||
           kind_ == ToolErrorKind::MalformedTransport;
  }

 private:
  Capability capability_;
  ToolErrorKind kind_;
  std::string detail_;
};

struct BoxCoords {
  int x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  auto operator<=>(const BoxCoords&) const = default;
};

BoxCoords coords_of(const GroundedBox& box);

/// Candidate as reported by a backend, before invariant checks.
struct Candidate {
  BoxCoords box;
  double box_score = 0.0;
  double text_score = 0.0;
};

struct ThinkRequest {
  std::string uid;
  std::string rendered_prompt;
  std::vector<FrameRef> frames;
  std::optional<std::string> audio;
};

struct ThinkResponse {
  std::string raw_text;
};

struct GroundRequest {
  FrameRef frame;
  std::string query_text;
};

struct GroundResponse {
  std::vector<GroundedBox> candidates;
};

struct SegmentRequest {
  FrameRef frame;
  BoxCoords box;
};

struct SegmentResponse {
  FrameMask mask;
};

/// Free-form text generation, used for reference transformation.
struct GenerateRequest {
  std::string key;
  std::string prompt;
};

struct GenerateResponse {
  std::string text;
};

class ThinkBackend {
 public:
  virtual ~ThinkBackend() = default;
  virtual std::string id() const = 0;
  virtual ThinkResponse think(const ThinkRequest& request) const = 0;
};

class GroundBackend {
 public:
  virtual ~GroundBackend() = default;
  virtual std::string id() const = 0;
  virtual std::vector<Candidate> ground(const GroundRequest& request) const = 0;
};

class SegmentBackend {
 public:
  virtual ~SegmentBackend() = default;
  virtual std::string id() const = 0;
  virtual FrameMask segment(const SegmentRequest& request) const = 0;
};

class GenerateBackend {
 public:
  virtual ~GenerateBackend() = default;
  virtual std::string id() const = 0;
  virtual GenerateResponse generate(const GenerateRequest& request) const = 0;
};

/// Backend handles for each capability. Handles are shared between workers.
struct ToolSet {
  std::shared_ptr<const ThinkBackend> think;
  std::shared_ptr<const GroundBackend> ground;
  std::shared_ptr<const SegmentBackend> segment;
  std::shared_ptr<const GenerateBackend> generate;
};

// Invocation with transport-layer validation. Downstream code only ever sees
// boxes and masks that satisfy the data invariants.

ThinkResponse invoke_think(const ThinkBackend& backend, const ThinkRequest& request);
GroundResponse invoke_ground(const GroundBackend& backend, const GroundRequest& request);
SegmentResponse invoke_segment(const SegmentBackend& backend, const SegmentRequest& request);
GenerateResponse invoke_generate(const GenerateBackend& backend, const GenerateRequest& request);

// ---- scripted mock ----

enum class SegmentRule { None, BoxInterior };

/// Canned responses keyed by request identity. Lookups outside the declared
/// corpus raise Configuration errors; errors can also be scripted per key.
struct ScriptedMockSpec {
  struct Failure {
    ToolErrorKind kind;
    std::string message;
  };

  std::map<std::string, std::string> think;
  std::map<std::string, Failure> think_failures;
  std::map<std::pair<std::string, std::string>, std::vector<Candidate>> ground;
  std::map<std::pair<std::string, std::string>, Failure> ground_failures;
  std::map<std::pair<std::string, BoxCoords>, FrameMask> segment;
  SegmentRule segment_rule = SegmentRule::None;
  std::map<std::string, std::string> generate;
  std::map<std::string, Failure> generate_failures;

  static ScriptedMockSpec from_json(const nlohmann::json& j);
  static ScriptedMockSpec from_file(const std::filesystem::path& path);
};

class ScriptedMock final : public ThinkBackend,
                           public GroundBackend,
                           public SegmentBackend,
                           public GenerateBackend {
 public:
  explicit ScriptedMock(ScriptedMockSpec spec, std::string id = "mock");

  std::string id() const override { return id_; }
  ThinkResponse think(const ThinkRequest& request) const override;
  std::vector<Candidate> ground(const GroundRequest& request) const override;
  FrameMask segment(const SegmentRequest& request) const override;
  GenerateResponse generate(const GenerateRequest& request) const override;

 private:
  ScriptedMockSpec spec_;
  std::string id_;
};

// ---- wire protocol ----

enum class FrameMode { Path, Inline };

namespace wire {

inline constexpr std::string_view kThinkPath = "/v1/think";
inline constexpr std::string_view kGroundPath = "/v1/ground";
inline constexpr std::string_view kSegmentPath = "/v1/segment";
inline constexpr std::string_view kGeneratePath = "/v1/generate";

std::string base64_encode(std::string_view bytes);
/// Throws std::invalid_argument on characters outside the alphabet or bad padding.
std::string base64_decode(std::string_view text);

nlohmann::json encode_frame(const FrameRef& frame, FrameMode mode);
FrameRef decode_frame(const nlohmann::json& j);

nlohmann::json encode_request(const ThinkRequest& request, FrameMode mode);
nlohmann::json encode_request(const GroundRequest& request, FrameMode mode);
nlohmann::json encode_request(const SegmentRequest& request, FrameMode mode);
nlohmann::json encode_request(const GenerateRequest& request);

ThinkRequest decode_think_request(const nlohmann::json& j);
GroundRequest decode_ground_request(const nlohmann::json& j);
SegmentRequest decode_segment_request(const nlohmann::json& j);
GenerateRequest decode_generate_request(const nlohmann::json& j);

nlohmann::json encode_response(const ThinkResponse& response);
nlohmann::json encode_response(const std::vector<Candidate>& candidates);
nlohmann::json encode_response(const FrameMask& mask);
nlohmann::json encode_response(const GenerateResponse& response);

// Response decoding throws ToolError(MalformedTransport) on schema violations.
ThinkResponse decode_think_response(const nlohmann::json& j);
std::vector<Candidate> decode_ground_response(const nlohmann::json& j);
FrameMask decode_segment_response(const nlohmann::json& j);
GenerateResponse decode_generate_response(const nlohmann::json& j);

/// {"error":{"code":...,"message":...}} with the HTTP status for a tool error.
nlohmann::json encode_error(ToolErrorKind kind, const std::string& message);
int http_status_for(ToolErrorKind kind);

}  // namespace wire

struct HttpBackendOptions {
  std::string base_url;
  std::chrono::milliseconds timeout{60'000};
  int retries = 1;
  FrameMode frame_mode = FrameMode::Path;
};

/// Client for a remote inference adapter speaking the JSON wire protocol.
class HttpBackend final : public ThinkBackend,
                          public GroundBackend,
                          public SegmentBackend,
                          public GenerateBackend {
 public:
  explicit HttpBackend(HttpBackendOptions options);

  std::string id() const override { return "http:" + options_.base_url; }
  ThinkResponse think(const ThinkRequest& request) const override;
  std::vector<Candidate> ground(const GroundRequest& request) const override;
  FrameMask segment(const SegmentRequest& request) const override;
  GenerateResponse generate(const GenerateRequest& request) const override;

 private:
  nlohmann::json post(Capability capability, std::string_view path,
                      const nlohmann::json& body) const;

  HttpBackendOptions options_;
};

/// Builds backends from a config object such as
///   {"think": {"type": "mock", "spec": "mock.json"},
///    "ground": {"type": "http", "url": "http://host:8080", "timeout_s": 60, "retries": 1}}
/// Relative mock spec paths resolve against `base_dir`. Capabilities absent
/// from the config fall back to TGS_THINK_URL / TGS_GROUND_URL /
/// TGS_SEGMENT_URL / TGS_GENERATE_URL when set.
ToolSet make_toolset(const nlohmann::json& backends, const std::filesystem::path& base_dir);

}  // namespace tgs
