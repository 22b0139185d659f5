/*
 * Copyright 2026 The TGS Agent Authors
 * SPDX-License-Identifier: Apache-2.0
 */
// In-test HTTP server speaking the tool wire protocol on top of a scripted
// mock, with hooks for injecting transport faults.
#pragma once

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "tgs/toolbus.hpp"

namespace tgs::testing {

class WireServer {
 public:
  struct Fault {
    int status = 0;         // 0: no fault
    std::string body;       // raw body sent with the fault status
    int remaining = 0;      // how many requests receive the fault
  };

  explicit WireServer(std::shared_ptr<const ScriptedMock> mock) : mock_(std::move(mock)) {
    route(wire::kThinkPath, [this](const nlohmann::json& j) {
      return wire::encode_response(invoke_think(*mock_, wire::decode_think_request(j)));
    });
    route(wire::kGroundPath, [this](const nlohmann::json& j) {
      std::vector<Candidate> out;
      for (const auto& b : invoke_ground(*mock_, wire::decode_ground_request(j)).candidates) {
        out.push_back({coords_of(b), b.box_score(), b.text_score()});
      }
      return wire::encode_response(out);
    });
    route(wire::kSegmentPath, [this](const nlohmann::json& j) {
      return wire::encode_response(invoke_segment(*mock_, wire::decode_segment_request(j)).mask);
    });
    route(wire::kGeneratePath, [this](const nlohmann::json& j) {
      return wire::encode_response(invoke_generate(*mock_, wire::decode_generate_request(j)));
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~WireServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  WireServer(const WireServer&) = delete;
  WireServer& operator=(const WireServer&) = delete;

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  void inject(Fault fault) {
    std::lock_guard lock(mutex_);
    fault_ = std::move(fault);
  }
  void set_delay(std::chrono::milliseconds delay) { delay_ms_ = static_cast<int>(delay.count()); }

  int requests() const { return requests_.load(); }
  std::vector<nlohmann::json> bodies() const {
    std::lock_guard lock(mutex_);
    return bodies_;
  }
  std::vector<nlohmann::json> responses() const {
    std::lock_guard lock(mutex_);
    return responses_;
  }

 private:
  template <typename F>
  void route(std::string_view path, F handler) {
    server_.Post(std::string(path), [this, handler](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      if (delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_.load()));
      {
        std::lock_guard lock(mutex_);
        if (fault_.remaining > 0) {
          --fault_.remaining;
          res.status = fault_.status;
          res.set_content(fault_.body, "application/json");
          return;
        }
      }
      nlohmann::json body;
      try {
        body = nlohmann::json::parse(req.body);
        {
          std::lock_guard lock(mutex_);
          bodies_.push_back(body);
        }
        const nlohmann::json out = handler(body);
        {
          std::lock_guard lock(mutex_);
          responses_.push_back(out);
        }
        res.status = 200;
        res.set_content(out.dump(), "application/json");
      } catch (const ToolError& e) {
        res.status = wire::http_status_for(e.kind());
        res.set_content(wire::encode_error(e.kind(), e.detail()).dump(), "application/json");
      } catch (const std::exception& e) {
        res.status = wire::http_status_for(ToolErrorKind::MalformedTransport);
        res.set_content(wire::encode_error(ToolErrorKind::MalformedTransport, e.what()).dump(),
                        "application/json");
      }
    });
  }

  std::shared_ptr<const ScriptedMock> mock_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mutex_;
  Fault fault_;
  std::atomic<int> delay_ms_{0};
  std::atomic<int> requests_{0};
  std::vector<nlohmann::json> bodies_;
  std::vector<nlohmann::json> responses_;
};

}  // namespace tgs::testing
