#include "nerbreaker/transport.hpp"

#include <csignal>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <httplib.h>

#include "nerbreaker/corpus.hpp"
#include "nerbreaker/mock_model.hpp"

namespace nerbreaker {

using nlohmann::json;

std::chrono::milliseconds adapter_timeout() {
  if (const char* env = std::getenv("NERBREAKER_TIMEOUT_MS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long long ms = std::strtoll(env, &end, 10);
    if (end != nullptr && *end == '\0' && ms > 0) return std::chrono::milliseconds(ms);
    throw ConfigError(std::string("NERBREAKER_TIMEOUT_MS must be a positive integer, got '") +
                      env + "'");
  }
  return std::chrono::milliseconds(30000);
}

SubprocessEndpoint::SubprocessEndpoint(const std::string& command,
                                       std::chrono::milliseconds timeout)
    : command_(command), timeout_(timeout) {
  // A dead child must surface as a write error, not kill the engine.
  std::signal(SIGPIPE, SIG_IGN);

  int in_pipe[2];
  int out_pipe[2];
  if (pipe(in_pipe) != 0) throw AdapterError("pipe: " + std::string(std::strerror(errno)));
  if (pipe(out_pipe) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw AdapterError("pipe: " + std::string(std::strerror(errno)));
  }
  pid_ = fork();
  if (pid_ < 0) throw AdapterError("fork: " + std::string(std::strerror(errno)));
  if (pid_ == 0) {
    // Own process group, so teardown also reaches whatever the shell spawned.
    setpgid(0, 0);
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid_, pid_);
  close(in_pipe[0]);
  close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  fcntl(to_child_, F_SETFD, FD_CLOEXEC);
  fcntl(from_child_, F_SETFD, FD_CLOEXEC);
}

SubprocessEndpoint::~SubprocessEndpoint() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    // Closing stdin lets well-behaved servers exit; give them a moment.
    bool exited = false;
    for (int i = 0; i < 50 && !exited; ++i) {
      exited = waitpid(pid_, &status, WNOHANG) == pid_;
      if (!exited) usleep(2000);
    }
    kill(-pid_, SIGKILL);
    if (!exited) waitpid(pid_, &status, 0);
  }
}

std::string SubprocessEndpoint::read_line() {
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw AdapterError("adapter '" + command_ + "' timed out");
    pollfd pfd{from_child_, POLLIN, 0};
    const int rv = poll(&pfd, 1, static_cast<int>(left.count()));
    if (rv < 0) {
      if (errno == EINTR) continue;
      throw AdapterError("poll: " + std::string(std::strerror(errno)));
    }
    if (rv == 0) throw AdapterError("adapter '" + command_ + "' timed out");
    char chunk[65536];
    const ssize_t got = read(from_child_, chunk, sizeof chunk);
    if (got < 0) {
      if (errno == EINTR) continue;
      throw AdapterError("read: " + std::string(std::strerror(errno)));
    }
    if (got == 0) throw AdapterError("adapter '" + command_ + "' closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(got));
  }
}

json SubprocessEndpoint::exchange(const json& request) {
  const std::string line = request.dump() + "\n";
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = write(to_child_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw AdapterError("adapter '" + command_ + "' is not accepting input: " +
                         std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
  const std::string reply = read_line();
  try {
    return json::parse(reply);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("reply is not JSON: ") + e.what());
  }
}

struct HttpEndpoint::Impl {
  std::unique_ptr<httplib::Client> client;
  std::string path;
  std::string url;
};

HttpEndpoint::HttpEndpoint(const std::string& url, std::chrono::milliseconds timeout)
    : impl_(std::make_unique<Impl>()) {
  impl_->url = url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("http adapter needs a URL, got '" + url + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
  impl_->path = path_start == std::string::npos ? "/" : url.substr(path_start);
  impl_->client = std::make_unique<httplib::Client>(origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  impl_->client->set_connection_timeout(secs.count(), usecs.count());
  impl_->client->set_read_timeout(secs.count(), usecs.count());
  impl_->client->set_write_timeout(secs.count(), usecs.count());
}

HttpEndpoint::~HttpEndpoint() = default;

json HttpEndpoint::exchange(const json& request) {
  auto res = impl_->client->Post(impl_->path, request.dump() + "\n", "application/json");
  if (!res) {
    throw AdapterError("http adapter '" + impl_->url + "': " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw AdapterError("http adapter '" + impl_->url + "' returned status " +
                       std::to_string(res->status));
  }
  try {
    return json::parse(res->body);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("reply is not JSON: ") + e.what());
  }
}

std::unique_ptr<Endpoint> make_endpoint(const std::string& spec) {
  if (spec.rfind("exec:", 0) == 0) {
    return std::make_unique<SubprocessEndpoint>(spec.substr(5), adapter_timeout());
  }
  if (spec.rfind("mock:", 0) == 0) {
    return std::make_unique<MockEndpoint>(load_mock_spec(spec.substr(5)));
  }
  if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0) {
    return std::make_unique<HttpEndpoint>(spec, adapter_timeout());
  }
  if (spec.rfind("http:", 0) == 0) {
    return std::make_unique<HttpEndpoint>(spec.substr(5), adapter_timeout());
  }
  throw ConfigError("unknown adapter spec '" + spec + "' (want exec:, http: or mock:)");
}

}  // namespace nerbreaker
