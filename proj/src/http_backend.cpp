/*
 * Copyright 2026 The TGS Agent Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include <httplib.h>

#include "tgs/toolbus.hpp"

namespace tgs {

HttpBackend::HttpBackend(HttpBackendOptions options) : options_(std::move(options)) {
  if (options_.base_url.empty()) throw std::invalid_argument("http backend needs a base URL");
  if (options_.retries < 0) throw std::invalid_argument("retries must be non-negative");
}

nlohmann::json HttpBackend::post(Capability capability, std::string_view path,
                                 const nlohmann::json& body) const {
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto micros =
      std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - seconds);
  const std::string payload = body.dump();

  std::optional<ToolError> last;
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    // One client per call keeps the backend safe to share across workers.
    httplib::Client client(options_.base_url);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());

    auto res = client.Post(std::string(path), payload, "application/json");
    if (!res) {
      const auto err = res.error();
      const auto kind = (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout)
                            ? ToolErrorKind::Timeout
                            : ToolErrorKind::BackendUnavailable;
      last.emplace(capability, kind,
                   options_.base_url + std::string(path) + ": " + httplib::to_string(err));
      continue;
    }
    if (res->status == 200) {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::parse_error& e) {
        throw ToolError(capability, ToolErrorKind::MalformedTransport,
                        std::string("response is not JSON: ") + e.what());
      }
    }

    ToolErrorKind kind = ToolErrorKind::MalformedTransport;
    std::string message = "HTTP " + std::to_string(res->status);
    try {
      const auto j = nlohmann::json::parse(res->body);
      kind = tool_error_kind_from_string(j.at("error").at("code").get<std::string>());
      message += ": " + j.at("error").value("message", std::string());
    } catch (const std::exception&) {
      if (res->status == 503) kind = ToolErrorKind::BackendUnavailable;
      if (res->status == 504) kind = ToolErrorKind::Timeout;
    }
    last.emplace(capability, kind, message);
    if (kind != ToolErrorKind::BackendUnavailable && kind != ToolErrorKind::Timeout) break;
  }
  throw *last;
}

ThinkResponse HttpBackend::think(const ThinkRequest& request) const {
  return wire::decode_think_response(post(Capability::Think, wire::kThinkPath,
                                          wire::encode_request(request, options_.frame_mode)));
}

std::vector<Candidate> HttpBackend::ground(const GroundRequest& request) const {
  return wire::decode_ground_response(post(Capability::Ground, wire::kGroundPath,
                                           wire::encode_request(request, options_.frame_mode)));
}

FrameMask HttpBackend::segment(const SegmentRequest& request) const {
  return wire::decode_segment_response(post(Capability::Segment, wire::kSegmentPath,
                                            wire::encode_request(request, options_.frame_mode)));
}

GenerateResponse HttpBackend::generate(const GenerateRequest& request) const {
  return wire::decode_generate_response(
      post(Capability::Generate, wire::kGeneratePath, wire::encode_request(request)));
}

}  // namespace tgs
