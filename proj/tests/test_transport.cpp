#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "bench.hpp"

// After Eigen: resolv.h, pulled in here, defines a _res macro.
#include <httplib.h>

#include "nerbreaker/mock_model.hpp"
#include "nerbreaker/transport.hpp"

using namespace nerbreaker;
using namespace std::chrono_literals;

namespace {

std::string golden_spec() { return nbtest::source_path("tests/golden/mock_spec.json"); }

std::string server_command(const std::string& extra = "") {
  return std::string(NERBREAKER_MOCK_SERVER) + " " + golden_spec() + extra;
}

class ScopedEnv {
 public:
  ScopedEnv(const char* name, const char* value) : name_(name) {
    if (const char* old = std::getenv(name)) old_ = old;
    setenv(name, value, 1);
  }
  ~ScopedEnv() {
    if (old_) {
      setenv(name_, old_->c_str(), 1);
    } else {
      unsetenv(name_);
    }
  }

 private:
  const char* name_;
  std::optional<std::string> old_;
};

}  // namespace

TEST(Subprocess, MockServerMatchesInProcessMock) {
  SubprocessEndpoint remote(server_command(), 10s);
  MockEndpoint local(load_mock_spec(golden_spec()));
  const std::vector<Tokens> batch = {{"He", "visited", "Xanadu"}, {"New", "York", "Acme"}};
  EXPECT_EQ(remote.predict(batch), local.predict(batch));
  EXPECT_EQ(remote.pos(batch), local.pos(batch));
  EXPECT_EQ(remote.handshake().tag_set, local.handshake().tag_set);
  EXPECT_EQ(remote.similarity({{batch[0], batch[1]}}), local.similarity({{batch[0], batch[1]}}));
}

TEST(Subprocess, ServerSurvivesBadRequests) {
  SubprocessEndpoint remote(server_command(" --capabilities predict"), 10s);
  EXPECT_THROW(remote.pos({{"a"}}), ProtocolError);
  EXPECT_EQ(remote.predict({{"Paris"}}).size(), 1u);
  EXPECT_FALSE(remote.handshake().has(Capability::Pos));
}

TEST(Subprocess, ClientOverSubprocess) {
  ModelClient client(make_endpoint("exec:" + server_command()));
  EXPECT_EQ(client.predict({"I", "love", "Paris"})[2].predicted, Label::begin("LOC"));
  EXPECT_EQ(client.queries(), 1u);
}

TEST(Subprocess, SilentProcessTimesOut) {
  SubprocessEndpoint silent("sleep 30", 300ms);
  const auto t0 = std::chrono::steady_clock::now();
  EXPECT_THROW(silent.handshake(), AdapterError);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, 5s);
}

TEST(Subprocess, TeardownKillsGrandchildren) {
  const auto pidfile = nbtest::make_temp_dir("grandchild") + "/pid";
  {
    SubprocessEndpoint ep("sleep 30 & echo $! > " + pidfile + "; wait", 200ms);
    EXPECT_THROW(ep.handshake(), AdapterError);
  }
  const std::string pid = nbtest::read_file(pidfile);
  ASSERT_FALSE(pid.empty());
  // Gone, or at most a zombie waiting for init.
  const auto deadline = std::chrono::steady_clock::now() + 2s;
  bool alive = true;
  while (alive && std::chrono::steady_clock::now() < deadline) {
    std::ifstream stat("/proc/" + std::to_string(std::stol(pid)) + "/stat");
    std::string line;
    alive = stat && std::getline(stat, line) && line.find(") Z") == std::string::npos;
    if (alive) std::this_thread::sleep_for(10ms);
  }
  EXPECT_FALSE(alive);
}

TEST(Subprocess, ExitedProcessIsAdapterError) {
  SubprocessEndpoint gone("exit 0", 5s);
  EXPECT_THROW(gone.handshake(), AdapterError);
  SubprocessEndpoint missing("/nonexistent/model-server", 5s);
  EXPECT_THROW(missing.handshake(), AdapterError);
}

TEST(Subprocess, GarbageOutputIsProtocolError) {
  SubprocessEndpoint noisy("while read l; do echo not-json; done", 5s);
  EXPECT_THROW(noisy.handshake(), ProtocolError);
}

TEST(Http, DeadAddressFailsWithinTimeout) {
  const auto t0 = std::chrono::steady_clock::now();
  HttpEndpoint refused("http://127.0.0.1:1/", 500ms);
  EXPECT_THROW(refused.handshake(), AdapterError);
  HttpEndpoint unroutable("http://10.255.255.1:9/", 500ms);
  EXPECT_THROW(unroutable.handshake(), AdapterError);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, 5s);
}

TEST(Http, TalksToInProcessServer) {
  MockEndpoint mock(load_mock_spec(golden_spec()));
  httplib::Server server;
  server.Post("/ner", [&](const httplib::Request& req, httplib::Response& res) {
    res.set_content(protocol::handle_line(mock, req.body), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread loop([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  {
    ModelClient client(make_endpoint("http://127.0.0.1:" + std::to_string(port) + "/ner"));
    EXPECT_EQ(client.tag_set(), mock.handshake().tag_set);
    const auto pred = client.predict({"He", "visited", "Xanadu"});
    EXPECT_EQ(pred, mock.predict({{"He", "visited", "Xanadu"}})[0]);
    EXPECT_EQ(client.pos_tag({{"visited"}})[0][0], "VBD");

    HttpEndpoint wrong_path("http://127.0.0.1:" + std::to_string(port) + "/nope", 2s);
    EXPECT_THROW(wrong_path.handshake(), AdapterError);
  }
  server.stop();
  loop.join();
}

TEST(Factory, ParsesAdapterSpecs) {
  EXPECT_NE(dynamic_cast<MockEndpoint*>(make_endpoint("mock:" + golden_spec()).get()), nullptr);
  EXPECT_NE(dynamic_cast<HttpEndpoint*>(make_endpoint("http:http://127.0.0.1:1/x").get()), nullptr);
  EXPECT_NE(dynamic_cast<HttpEndpoint*>(make_endpoint("http://127.0.0.1:1").get()), nullptr);
  EXPECT_THROW(make_endpoint("grpc://model"), ConfigError);
  EXPECT_THROW(make_endpoint("mock:/nonexistent.json"), ConfigError);
}

TEST(Factory, TimeoutFromEnvironment) {
  {
    ScopedEnv env("NERBREAKER_TIMEOUT_MS", "1234");
    EXPECT_EQ(adapter_timeout(), 1234ms);
  }
  {
    ScopedEnv env("NERBREAKER_TIMEOUT_MS", "soon");
    EXPECT_THROW(adapter_timeout(), ConfigError);
  }
  unsetenv("NERBREAKER_TIMEOUT_MS");
  EXPECT_EQ(adapter_timeout(), 30000ms);
}
