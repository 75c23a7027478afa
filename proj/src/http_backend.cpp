#include <chrono>
#include <cstdlib>
#include <memory>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "reasonweaver/backend.hpp"
#include "reasonweaver/errors.hpp"

namespace rw {

namespace {

using nlohmann::json;

// Splits "https://host:port/v1" into origin and path prefix.
void split_endpoint(const std::string& endpoint, std::string& origin, std::string& prefix) {
  std::size_t scheme = endpoint.find("://");
  std::size_t slash = scheme == std::string::npos ? endpoint.find('/')
                                                  : endpoint.find('/', scheme + 3);
  if (slash == std::string::npos) {
    origin = endpoint;
    prefix.clear();
    return;
  }
  origin = endpoint.substr(0, slash);
  prefix = endpoint.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
}

bool retryable_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

/// OpenAI-compatible chat/completions client. Up to max_attempts tries with
/// exponential backoff, retrying only transport errors and rate-limit /
/// server-side statuses.
class LiveBackend : public Backend {
 public:
  explicit LiveBackend(const BackendDescriptor& descriptor)
      : Backend(descriptor.backend_id),
        descriptor_(descriptor),
        limiter_(descriptor.rate_limit_rpm) {
    if (descriptor_.endpoint.empty()) fail(ErrorKind::config, "live backend needs an endpoint");
    if (descriptor_.model.empty()) fail(ErrorKind::config, "live backend needs a model name");
    const char* key = std::getenv(descriptor_.api_key_env.c_str());
    api_key_ = key ? key : "";
    if (api_key_.empty()) {
      fail(ErrorKind::config, "environment variable " + descriptor_.api_key_env + " is not set");
    }
    split_endpoint(descriptor_.endpoint, origin_, path_prefix_);
  }

  CompletionResult complete(const CompletionRequest& request) override {
    request.validate();
    json body;
    body["model"] = descriptor_.model;
    body["messages"] = json::array({json{{"role", "user"}, {"content", request.prompt}}});
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_output;
    const std::string payload = body.dump();
    const std::string path = path_prefix_ + "/chat/completions";

    std::string attempt_log;
    int backoff_ms = descriptor_.retry_initial_ms;
    for (int attempt = 1; attempt <= descriptor_.max_attempts; ++attempt) {
      limiter_.acquire();
      httplib::Client client(origin_);
      client.set_connection_timeout(30, 0);
      client.set_read_timeout(300, 0);
      httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
      auto response = client.Post(path, headers, payload, "application/json");
      if (response && response->status == 200) {
        return make_result(parse_completion(response->body), /*cached=*/false);
      }
      if (response) {
        attempt_log += "attempt " + std::to_string(attempt) + ": HTTP " +
                       std::to_string(response->status) + "\n";
        if (!retryable_status(response->status)) {
          fail(ErrorKind::transport, "non-retryable HTTP " + std::to_string(response->status) +
                                         " from " + origin_ + path + "\n" + attempt_log);
        }
      } else {
        attempt_log += "attempt " + std::to_string(attempt) + ": " +
                       httplib::to_string(response.error()) + "\n";
      }
      if (attempt < descriptor_.max_attempts) {
        std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
        backoff_ms *= 2;
      }
    }
    fail(ErrorKind::transport, "request failed after " + std::to_string(descriptor_.max_attempts) +
                                   " attempts\n" + attempt_log);
  }

 private:
  static std::string parse_completion(const std::string& body) {
    json parsed;
    try {
      parsed = json::parse(body);
    } catch (const json::parse_error& e) {
      fail(ErrorKind::transport, std::string("unparseable completion response: ") + e.what());
    }
    if (!parsed.contains("choices") || parsed["choices"].empty()) {
      fail(ErrorKind::transport, "completion response has no choices");
    }
    const auto& first = parsed["choices"][0];
    if (first.contains("message") && first["message"].contains("content")) {
      return first["message"]["content"].get<std::string>();
    }
    if (first.contains("text")) return first["text"].get<std::string>();
    fail(ErrorKind::transport, "completion choice has no content");
  }

  BackendDescriptor descriptor_;
  RateLimiter limiter_;
  std::string api_key_;
  std::string origin_;
  std::string path_prefix_;
};

}  // namespace

std::shared_ptr<Backend> make_live_backend(const BackendDescriptor& descriptor) {
  return std::make_shared<LiveBackend>(descriptor);
}

}  // namespace rw
