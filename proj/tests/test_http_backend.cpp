#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "reasonweaver/backend.hpp"
#include "reasonweaver/errors.hpp"

using namespace rw;
using nlohmann::json;

namespace {

/// Minimal OpenAI-compatible chat/completions endpoint on a loopback port.
class MockServer {
 public:
  MockServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      requests_seen.fetch_add(1);
      last_auth = req.get_header_value("Authorization");
      json body = json::parse(req.body);
      last_model = body["model"].get<std::string>();
      last_prompt = body["messages"][0]["content"].get<std::string>();

      if (fail_next.load() > 0) {
        fail_next.fetch_sub(1);
        res.status = fail_status.load();
        res.set_content("overloaded", "text/plain");
        return;
      }
      json reply = {{"choices", json::array({{{"message", {{"role", "assistant"},
                                                           {"content", "echo: " + last_prompt}}}}})}};
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~MockServer() {
    server_.stop();
    thread_.join();
  }

  BackendDescriptor descriptor() const {
    BackendDescriptor d;
    d.backend_id = "live-test";
    d.kind = BackendKind::live;
    d.endpoint = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    d.model = "test-model";
    d.api_key_env = "RW_TEST_KEY";
    d.retry_initial_ms = 1;  // keep retry tests fast
    return d;
  }

  std::atomic<int> requests_seen{0};
  std::atomic<int> fail_next{0};
  std::atomic<int> fail_status{500};
  std::string last_auth;
  std::string last_model;
  std::string last_prompt;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

CompletionRequest req(const std::string& prompt) { return CompletionRequest{prompt, 0.0, 256, 0}; }

}  // namespace

TEST_CASE("live backend speaks the chat completions protocol") {
  setenv("RW_TEST_KEY", "sk-unit-test", 1);
  MockServer server;
  auto backend = make_backend(server.descriptor());

  SUBCASE("happy path carries auth, model, and prompt") {
    CompletionResult result = backend->complete(req("hello live"));
    CHECK(result.text == "echo: hello live");
    CHECK(result.call_index == 1);
    CHECK(server.last_auth == "Bearer sk-unit-test");
    CHECK(server.last_model == "test-model");
    CHECK(server.last_prompt == "hello live");
  }

  SUBCASE("retries transient 500s and succeeds") {
    server.fail_next.store(2);
    CompletionResult result = backend->complete(req("retry me"));
    CHECK(result.text == "echo: retry me");
    CHECK(server.requests_seen.load() == 3);
  }

  SUBCASE("rate-limit 429 responses are retried") {
    server.fail_status.store(429);
    server.fail_next.store(1);
    CHECK(backend->complete(req("throttle")).text == "echo: throttle");
    CHECK(server.requests_seen.load() == 2);
  }

  SUBCASE("exhausted retries raise a transport error with the attempt log") {
    server.fail_next.store(99);
    try {
      backend->complete(req("always failing"));
      FAIL("expected transport error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::transport);
      CHECK(std::string(e.what()).find("attempt 5") != std::string::npos);
    }
    CHECK(server.requests_seen.load() == 5);
  }

  SUBCASE("non-retryable statuses fail immediately") {
    server.fail_status.store(404);
    server.fail_next.store(1);
    CHECK_THROWS_AS(backend->complete(req("missing route")), Error);
    CHECK(server.requests_seen.load() == 1);
  }
}

TEST_CASE("live backend requires its API key environment variable") {
  MockServer server;
  BackendDescriptor d = server.descriptor();
  d.api_key_env = "RW_UNSET_KEY_VARIABLE";
  unsetenv("RW_UNSET_KEY_VARIABLE");
  CHECK_THROWS_AS(make_backend(d), Error);
}

TEST_CASE("recording a live session makes it replayable offline") {
  setenv("RW_TEST_KEY", "sk-unit-test", 1);
  auto tmp = std::filesystem::temp_directory_path() / ("rw-live-" + std::to_string(::getpid()));
  std::filesystem::create_directories(tmp);

  {
    MockServer server;
    RecordingBackend recorder(make_backend(server.descriptor()), tmp / "live.jsonl");
    CHECK(recorder.complete(req("offline later")).text == "echo: offline later");
  }  // server gone

  ReplayBackend replay("replay:live", FixtureStore::load(tmp / "live.jsonl"));
  CHECK(replay.complete(req("offline later")).text == "echo: offline later");
  std::filesystem::remove_all(tmp);
}
