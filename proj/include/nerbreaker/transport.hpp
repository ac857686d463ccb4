#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <sys/types.h>

#include "nerbreaker/protocol.hpp"

namespace nerbreaker {

/// Adapter timeout from NERBREAKER_TIMEOUT_MS, 30 s when unset.
std::chrono::milliseconds adapter_timeout();

/// Runs `command` under /bin/sh and speaks one JSON line per request over its
/// stdin/stdout. The child is killed when the endpoint is destroyed.
class SubprocessEndpoint : public protocol::JsonEndpoint {
 public:
  SubprocessEndpoint(const std::string& command, std::chrono::milliseconds timeout);
  ~SubprocessEndpoint() override;

  SubprocessEndpoint(const SubprocessEndpoint&) = delete;
  SubprocessEndpoint& operator=(const SubprocessEndpoint&) = delete;

 protected:
  nlohmann::json exchange(const nlohmann::json& request) override;

 private:
  std::string read_line();

  std::string command_;
  std::chrono::milliseconds timeout_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

/// POSTs each request as the body to `url` and parses the reply body.
class HttpEndpoint : public protocol::JsonEndpoint {
 public:
  HttpEndpoint(const std::string& url, std::chrono::milliseconds timeout);
  ~HttpEndpoint() override;

 protected:
  nlohmann::json exchange(const nlohmann::json& request) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// "exec:<command>", "http:<url>" (or a bare http://... URL) or
/// "mock:<spec.json>".
std::unique_ptr<Endpoint> make_endpoint(const std::string& spec);

}  // namespace nerbreaker
