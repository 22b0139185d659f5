/*
 * Copyright 2026 The TGS Agent Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "tgs/toolbus.hpp"

#include <cstdlib>

#include "tgs/mask_codec.hpp"

namespace tgs {

std::string_view to_string(Capability capability) {
  switch (capability) {
    case Capability::Think:
      return "think";
    case Capability::Ground:
      return "ground";
    case Capability::Segment:
      return "segment";
    case Capability::Generate:
      return "generate";
  }
  return "unknown";
}

std::string_view to_string(ToolErrorKind kind) {
  switch (kind) {
    case ToolErrorKind::BackendUnavailable:
      return "backend_unavailable";
    case ToolErrorKind::Timeout:
      return "timeout";
    case ToolErrorKind::MalformedTransport:
      return "malformed_transport";
    case ToolErrorKind::Configuration:
      return "configuration";
    case ToolErrorKind::Validation:
      return "validation";
  }
  return "unknown";
}

ToolErrorKind tool_error_kind_from_string(std::string_view text) {
  for (auto kind : {ToolErrorKind::BackendUnavailable, ToolErrorKind::Timeout,
                    ToolErrorKind::MalformedTransport, ToolErrorKind::Configuration,
                    ToolErrorKind::Validation}) {
    if (to_string(kind) == text) return kind;
  }
  if (text == "unavailable") return ToolErrorKind::BackendUnavailable;
  throw std::invalid_argument("unknown tool error kind '" + std::string(text) + "'");
}

ToolError::ToolError(Capability capability, ToolErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(capability)) + ": " + std::string(to_string(kind)) +
                         ": " + message),
      capability_(capability),
      kind_(kind),
      detail_(message) {}

BoxCoords coords_of(const GroundedBox& box) { return {box.x1(), box.y1(), box.x2(), box.y2()}; }

ThinkResponse invoke_think(const ThinkBackend& backend, const ThinkRequest& request) {
  if (request.rendered_prompt.empty()) throw std::invalid_argument("think prompt is empty");
  return backend.think(request);
}

GroundResponse invoke_ground(const GroundBackend& backend, const GroundRequest& request) {
  if (request.query_text.empty()) throw std::invalid_argument("ground query is empty");
  GroundResponse response;
  for (const auto& c : backend.ground(request)) {
    try {
      response.candidates.push_back(GroundedBox::make(c.box.x1, c.box.y1, c.box.x2, c.box.y2,
                                                      c.box_score, c.text_score,
                                                      request.frame.width, request.frame.height));
    } catch (const std::invalid_argument& e) {
      throw ToolError(Capability::Ground, ToolErrorKind::Validation,
                      "backend " + backend.id() + " returned an invalid box: " + e.what());
    }
  }
  return response;
}

SegmentResponse invoke_segment(const SegmentBackend& backend, const SegmentRequest& request) {
  const auto& b = request.box;
  if (!(0 <= b.x1 && b.x1 < b.x2 && b.x2 <= request.frame.width && 0 <= b.y1 && b.y1 < b.y2 &&
        b.y2 <= request.frame.height)) {
    throw std::invalid_argument("segment box outside frame or degenerate");
  }
  FrameMask mask = backend.segment(request);
  if (mask.width() != request.frame.width || mask.height() != request.frame.height) {
    throw ToolError(Capability::Segment, ToolErrorKind::Validation,
                    "backend " + backend.id() + " returned a " + std::to_string(mask.width()) +
                        "x" + std::to_string(mask.height()) + " mask for a " +
                        std::to_string(request.frame.width) + "x" +
                        std::to_string(request.frame.height) + " frame");
  }
  return {std::move(mask)};
}

GenerateResponse invoke_generate(const GenerateBackend& backend, const GenerateRequest& request) {
  if (request.prompt.empty()) throw std::invalid_argument("generate prompt is empty");
  return backend.generate(request);
}

// ---- scripted mock ----

namespace {

ScriptedMockSpec::Failure failure_from_json(const nlohmann::json& j) {
  return {tool_error_kind_from_string(j.at("error").get<std::string>()),
          j.value("message", std::string("scripted failure"))};
}

Candidate candidate_from_json(const nlohmann::json& j) {
  auto coord = [&](const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number_integer()) {
      throw std::invalid_argument(std::string("candidate field '") + key + "' must be an integer");
    }
    return v.get<int>();
  };
  auto score = [&](const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number()) {
      throw std::invalid_argument(std::string("candidate field '") + key + "' must be a number");
    }
    return v.get<double>();
  };
  return {{coord("x1"), coord("y1"), coord("x2"), coord("y2")}, score("box_score"),
          score("text_score")};
}

nlohmann::json candidate_to_json(const Candidate& c) {
  nlohmann::json j;
  j["x1"] = c.box.x1;
  j["y1"] = c.box.y1;
  j["x2"] = c.box.x2;
  j["y2"] = c.box.y2;
  j["box_score"] = c.box_score;
  j["text_score"] = c.text_score;
  return j;
}

BoxCoords box_from_json(const nlohmann::json& j) {
  if (j.is_array() && j.size() == 4) {
    return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
  }
  for (const char* key : {"x1", "y1", "x2", "y2"}) {
    if (!j.contains(key) || !j.at(key).is_number_integer()) {
      throw std::invalid_argument(std::string("box field '") + key + "' must be an integer");
    }
  }
  return {j.at("x1").get<int>(), j.at("y1").get<int>(), j.at("x2").get<int>(),
          j.at("y2").get<int>()};
}

}  // namespace

ScriptedMockSpec ScriptedMockSpec::from_json(const nlohmann::json& j) {
  ScriptedMockSpec spec;
  if (j.contains("think")) {
    for (const auto& [uid, v] : j.at("think").items()) {
      if (v.is_string()) {
        spec.think[uid] = v.get<std::string>();
      } else {
        spec.think_failures[uid] = failure_from_json(v);
      }
    }
  }
  if (j.contains("ground")) {
    for (const auto& entry : j.at("ground")) {
      auto key = std::make_pair(entry.at("frame").get<std::string>(),
                                entry.at("query").get<std::string>());
      if (entry.contains("error")) {
        spec.ground_failures[key] = failure_from_json(entry);
        continue;
      }
      std::vector<Candidate> candidates;
      for (const auto& c : entry.at("candidates")) candidates.push_back(candidate_from_json(c));
      spec.ground[key] = std::move(candidates);
    }
  }
  if (j.contains("segment")) {
    const auto& seg = j.at("segment");
    const auto rule = seg.value("rule", std::string("none"));
    if (rule == "box_interior") {
      spec.segment_rule = SegmentRule::BoxInterior;
    } else if (rule != "none") {
      throw std::invalid_argument("unknown segment rule '" + rule + "'");
    }
    if (seg.contains("masks")) {
      for (const auto& m : seg.at("masks")) {
        spec.segment.emplace(
            std::make_pair(m.at("frame").get<std::string>(), box_from_json(m.at("box"))),
            decode_mask(m.at("mask").dump(), MaskFormat::RleJson));
      }
    }
  }
  if (j.contains("generate")) {
    for (const auto& [key, v] : j.at("generate").items()) {
      if (v.is_string()) {
        spec.generate[key] = v.get<std::string>();
      } else {
        spec.generate_failures[key] = failure_from_json(v);
      }
    }
  }
  return spec;
}

ScriptedMockSpec ScriptedMockSpec::from_file(const std::filesystem::path& path) {
  try {
    return from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("mock spec '" + path.string() + "': " + e.what());
  }
}

ScriptedMock::ScriptedMock(ScriptedMockSpec spec, std::string id)
    : spec_(std::move(spec)), id_(std::move(id)) {}

ThinkResponse ScriptedMock::think(const ThinkRequest& request) const {
  if (auto f = spec_.think_failures.find(request.uid); f != spec_.think_failures.end()) {
    throw ToolError(Capability::Think, f->second.kind, f->second.message);
  }
  auto it = spec_.think.find(request.uid);
  if (it == spec_.think.end()) {
    throw ToolError(Capability::Think, ToolErrorKind::Configuration,
                    "mock has no think output for uid '" + request.uid + "'");
  }
  return {it->second};
}

std::vector<Candidate> ScriptedMock::ground(const GroundRequest& request) const {
  const auto key = std::make_pair(request.frame.id, request.query_text);
  if (auto f = spec_.ground_failures.find(key); f != spec_.ground_failures.end()) {
    throw ToolError(Capability::Ground, f->second.kind, f->second.message);
  }
  auto it = spec_.ground.find(key);
  if (it == spec_.ground.end()) {
    throw ToolError(Capability::Ground, ToolErrorKind::Configuration,
                    "mock has no candidates for frame '" + request.frame.id + "' and query '" +
                        request.query_text + "'");
  }
  return it->second;
}

FrameMask ScriptedMock::segment(const SegmentRequest& request) const {
  auto it = spec_.segment.find(std::make_pair(request.frame.id, request.box));
  if (it != spec_.segment.end()) return it->second;
  if (spec_.segment_rule == SegmentRule::BoxInterior) {
    return box_mask(request.frame.width, request.frame.height, request.box.x1, request.box.y1,
                    request.box.x2, request.box.y2);
  }
  throw ToolError(Capability::Segment, ToolErrorKind::Configuration,
                  "mock has no mask for frame '" + request.frame.id + "'");
}

GenerateResponse ScriptedMock::generate(const GenerateRequest& request) const {
  if (auto f = spec_.generate_failures.find(request.key); f != spec_.generate_failures.end()) {
    throw ToolError(Capability::Generate, f->second.kind, f->second.message);
  }
  auto it = spec_.generate.find(request.key);
  if (it == spec_.generate.end()) {
    throw ToolError(Capability::Generate, ToolErrorKind::Configuration,
                    "mock has no generation for key '" + request.key + "'");
  }
  return {it->second};
}

// ---- wire protocol ----

namespace wire {

namespace {

constexpr std::string_view kAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

[[noreturn]] void malformed(Capability capability, const std::string& message) {
  throw ToolError(capability, ToolErrorKind::MalformedTransport, message);
}

const nlohmann::json& field(const nlohmann::json& j, const char* key, Capability capability) {
  if (!j.is_object() || !j.contains(key)) {
    malformed(capability, std::string("response lacks field '") + key + "'");
  }
  return j.at(key);
}

}  // namespace

std::string base64_encode(std::string_view bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                       (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                       static_cast<unsigned char>(bytes[i + 2]);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest > 0) {
    unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
    if (rest == 2) v |= static_cast<unsigned char>(bytes[i + 1]) << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::string base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw std::invalid_argument("base64 length not a multiple of 4");
  std::string out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    unsigned v = 0;
    int pad = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=') {
        if (i + 4 != text.size() || k < 2) throw std::invalid_argument("misplaced base64 padding");
        ++pad;
        v <<= 6;
        continue;
      }
      if (pad > 0) throw std::invalid_argument("misplaced base64 padding");
      const auto pos = kAlphabet.find(c);
      if (pos == std::string_view::npos) {
        throw std::invalid_argument("invalid base64 character at " + std::to_string(i + k));
      }
      v = (v << 6) | static_cast<unsigned>(pos);
    }
    out += static_cast<char>((v >> 16) & 0xFF);
    if (pad < 2) out += static_cast<char>((v >> 8) & 0xFF);
    if (pad < 1) out += static_cast<char>(v & 0xFF);
  }
  return out;
}

nlohmann::json encode_frame(const FrameRef& frame, FrameMode mode) {
  nlohmann::json j;
  j["frame_id"] = frame.id;
  j["width"] = frame.width;
  j["height"] = frame.height;
  if (mode == FrameMode::Path && frame.path) {
    j["mode"] = "path";
    j["path"] = frame.path->string();
    return j;
  }
  j["mode"] = "inline";
  if (frame.raster) {
    j["frame_b64"] = base64_encode(encode_pgm(*frame.raster));
  } else if (frame.path) {
    j["frame_b64"] = base64_encode(read_file(*frame.path));
  } else {
    throw std::invalid_argument("frame '" + frame.id + "' has neither pixels nor a path");
  }
  return j;
}

FrameRef decode_frame(const nlohmann::json& j) {
  FrameRef frame;
  frame.id = j.at("frame_id").get<std::string>();
  frame.width = j.at("width").get<int>();
  frame.height = j.at("height").get<int>();
  if (frame.width <= 0 || frame.height <= 0) {
    throw std::invalid_argument("frame dimensions must be positive");
  }
  const auto mode = j.at("mode").get<std::string>();
  if (mode == "path") {
    frame.path = j.at("path").get<std::string>();
  } else if (mode == "inline") {
    auto raster = std::make_shared<Raster>(decode_pgm(base64_decode(j.at("frame_b64").get<std::string>())));
    if (raster->width != frame.width || raster->height != frame.height) {
      throw std::invalid_argument("inline frame size differs from declared size");
    }
    frame.raster = std::move(raster);
  } else {
    throw std::invalid_argument("unknown frame mode '" + mode + "'");
  }
  return frame;
}

nlohmann::json encode_request(const ThinkRequest& request, FrameMode mode) {
  nlohmann::json j;
  j["uid"] = request.uid;
  j["prompt"] = request.rendered_prompt;
  j["frames"] = nlohmann::json::array();
  for (const auto& f : request.frames) j["frames"].push_back(encode_frame(f, mode));
  j["audio"] = request.audio ? nlohmann::json(*request.audio) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json encode_request(const GroundRequest& request, FrameMode mode) {
  return {{"frame", encode_frame(request.frame, mode)}, {"query", request.query_text}};
}

nlohmann::json encode_request(const SegmentRequest& request, FrameMode mode) {
  return {{"frame", encode_frame(request.frame, mode)},
          {"box",
           {{"x1", request.box.x1},
            {"y1", request.box.y1},
            {"x2", request.box.x2},
            {"y2", request.box.y2}}}};
}

nlohmann::json encode_request(const GenerateRequest& request) {
  return {{"key", request.key}, {"prompt", request.prompt}};
}

ThinkRequest decode_think_request(const nlohmann::json& j) {
  ThinkRequest r;
  r.uid = j.at("uid").get<std::string>();
  r.rendered_prompt = j.at("prompt").get<std::string>();
  for (const auto& f : j.at("frames")) r.frames.push_back(decode_frame(f));
  if (j.contains("audio") && !j.at("audio").is_null()) r.audio = j.at("audio").get<std::string>();
  return r;
}

GroundRequest decode_ground_request(const nlohmann::json& j) {
  return {decode_frame(j.at("frame")), j.at("query").get<std::string>()};
}

SegmentRequest decode_segment_request(const nlohmann::json& j) {
  return {decode_frame(j.at("frame")), box_from_json(j.at("box"))};
}

GenerateRequest decode_generate_request(const nlohmann::json& j) {
  return {j.at("key").get<std::string>(), j.at("prompt").get<std::string>()};
}

nlohmann::json encode_response(const ThinkResponse& response) {
  return {{"text", response.raw_text}};
}

nlohmann::json encode_response(const std::vector<Candidate>& candidates) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : candidates) arr.push_back(candidate_to_json(c));
  return {{"candidates", arr}};
}

nlohmann::json encode_response(const FrameMask& mask) {
  return {{"mask", nlohmann::json::parse(encode_mask(mask, MaskFormat::RleJson))}};
}

nlohmann::json encode_response(const GenerateResponse& response) {
  return {{"text", response.text}};
}

ThinkResponse decode_think_response(const nlohmann::json& j) {
  const auto& text = field(j, "text", Capability::Think);
  if (!text.is_string()) malformed(Capability::Think, "field 'text' must be a string");
  return {text.get<std::string>()};
}

std::vector<Candidate> decode_ground_response(const nlohmann::json& j) {
  const auto& arr = field(j, "candidates", Capability::Ground);
  if (!arr.is_array()) malformed(Capability::Ground, "field 'candidates' must be an array");
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    try {
      out.push_back(candidate_from_json(arr[i]));
    } catch (const std::exception& e) {
      malformed(Capability::Ground, "candidate " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

FrameMask decode_segment_response(const nlohmann::json& j) {
  const auto& mask = field(j, "mask", Capability::Segment);
  try {
    return decode_mask(mask.dump(), MaskFormat::RleJson);
  } catch (const CodecError& e) {
    malformed(Capability::Segment, e.what());
  }
}

GenerateResponse decode_generate_response(const nlohmann::json& j) {
  const auto& text = field(j, "text", Capability::Generate);
  if (!text.is_string()) malformed(Capability::Generate, "field 'text' must be a string");
  return {text.get<std::string>()};
}

nlohmann::json encode_error(ToolErrorKind kind, const std::string& message) {
  return {{"error", {{"code", std::string(to_string(kind))}, {"message", message}}}};
}

int http_status_for(ToolErrorKind kind) {
  switch (kind) {
    case ToolErrorKind::BackendUnavailable:
      return 503;
    case ToolErrorKind::Timeout:
      return 504;
    case ToolErrorKind::MalformedTransport:
      return 400;
    case ToolErrorKind::Configuration:
      return 404;
    case ToolErrorKind::Validation:
      return 422;
  }
  return 500;
}

}  // namespace wire

// ---- toolset configuration ----

namespace {

std::shared_ptr<HttpBackend> http_from_json(const nlohmann::json& cfg, const std::string& url) {
  HttpBackendOptions options;
  options.base_url = url;
  options.timeout = std::chrono::milliseconds(
      static_cast<long long>(cfg.value("timeout_s", 60.0) * 1000.0));
  options.retries = cfg.value("retries", 1);
  const auto mode = cfg.value("frame_mode", std::string("path"));
  if (mode == "inline") {
    options.frame_mode = FrameMode::Inline;
  } else if (mode != "path") {
    throw std::invalid_argument("unknown frame_mode '" + mode + "'");
  }
  return std::make_shared<HttpBackend>(std::move(options));
}

}  // namespace

ToolSet make_toolset(const nlohmann::json& backends, const std::filesystem::path& base_dir) {
  ToolSet tools;
  std::map<std::filesystem::path, std::shared_ptr<ScriptedMock>> mocks;

  auto bind = [&](const char* name, const char* env_var, auto assign) {
    nlohmann::json cfg;
    if (backends.is_object() && backends.contains(name)) {
      cfg = backends.at(name);
    } else if (const char* url = std::getenv(env_var); url && *url) {
      cfg = {{"type", "http"}, {"url", url}};
    } else {
      return;
    }
    const auto type = cfg.at("type").get<std::string>();
    if (type == "mock") {
      std::filesystem::path spec_path = cfg.at("spec").get<std::string>();
      if (spec_path.is_relative()) spec_path = base_dir / spec_path;
      auto& mock = mocks[spec_path.lexically_normal()];
      if (!mock) {
        mock = std::make_shared<ScriptedMock>(ScriptedMockSpec::from_file(spec_path),
                                              "mock:" + spec_path.filename().string());
      }
      assign(mock);
    } else if (type == "http") {
      std::string url = cfg.contains("url") ? cfg.at("url").get<std::string>() : "";
      if (url.empty()) {
        const char* env = std::getenv(env_var);
        if (!env || !*env) {
          throw std::invalid_argument(std::string("no URL for ") + name + " backend");
        }
        url = env;
      }
      assign(http_from_json(cfg, url));
    } else {
      throw std::invalid_argument(std::string("unknown backend type '") + type + "' for " + name);
    }
  };

  bind("think", "TGS_THINK_URL", [&](auto b) { tools.think = b; });
  bind("ground", "TGS_GROUND_URL", [&](auto b) { tools.ground = b; });
  bind("segment", "TGS_SEGMENT_URL", [&](auto b) { tools.segment = b; });
  bind("generate", "TGS_GENERATE_URL", [&](auto b) { tools.generate = b; });
  return tools;
}

}  // namespace tgs
