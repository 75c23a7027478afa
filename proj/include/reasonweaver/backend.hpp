#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace rw {

enum class Purpose { select, adapt, implement, solve, baseline };

const char* to_string(Purpose purpose);
Purpose purpose_from_string(const std::string& text);

struct CompletionRequest {
  std::string prompt;     // non-empty
  double temperature = 0.0;
  int max_output = 1024;  // tokens
  int sample_index = 0;   // distinguishes repeated sampling of one prompt
  Purpose purpose = Purpose::solve;

  /// Digest over (prompt, temperature, sample_index); purpose excluded so a
  /// fixture recorded under one tag replays under another.
  std::string hash() const;

  void validate() const;
};

struct CompletionResult {
  std::string text;
  std::string backend_id;
  std::uint64_t call_index = 0;  // strictly increasing per backend session, non-cached only
  bool cached = false;
};

enum class BackendKind { live, replay, scripted };

struct BackendDescriptor {
  std::string backend_id;
  BackendKind kind = BackendKind::scripted;
  std::string endpoint;     // live: OpenAI-compatible base URL, e.g. https://host/v1
  std::string model;        // live: model name
  std::string api_key_env = "REASONWEAVER_API_KEY";
  std::string fixture_path;       // replay: fixture store to serve from
  int rate_limit_rpm = 0;         // live: requests/minute, 0 = unlimited
  int max_attempts = 5;           // live: retry budget
  int retry_initial_ms = 1000;    // live: first backoff
};

/// Uniform model-invocation interface. Implementations must accept concurrent
/// complete() calls; the call counter is the only shared mutable state here
/// and is updated atomically.
class Backend {
 public:
  explicit Backend(std::string id) : id_(std::move(id)) {}
  virtual ~Backend() = default;

  virtual CompletionResult complete(const CompletionRequest& request) = 0;

  const std::string& id() const { return id_; }
  std::uint64_t calls_made() const { return calls_.load(); }

 protected:
  CompletionResult make_result(std::string text, bool cached);

 private:
  std::string id_;
  std::atomic<std::uint64_t> calls_{0};
};

// ---------------------------------------------------------------------------
// Scripted
// ---------------------------------------------------------------------------

/// Test/demo backend programmed with responses. Lookup order: exact request
/// hash, then per-purpose FIFO queue, then per-purpose responder, then the
/// default responder.
class ScriptedBackend : public Backend {
 public:
  using Responder = std::function<std::string(const CompletionRequest&)>;

  explicit ScriptedBackend(std::string id) : Backend(std::move(id)) {}

  void program(const CompletionRequest& request, std::string response);
  void program_hash(const std::string& request_hash, std::string response);
  void enqueue(Purpose purpose, std::string response);
  void respond_to(Purpose purpose, Responder responder);
  void set_default(Responder responder);

  CompletionResult complete(const CompletionRequest& request) override;

 private:
  std::mutex mutex_;
  std::map<std::string, std::string> by_hash_;
  std::map<Purpose, std::deque<std::string>> queues_;
  std::map<Purpose, Responder> by_purpose_;
  Responder default_;
};

/// Built-in backend for `--backend scripted:demo`: answers each stage with a
/// plausible canned response so pipelines can be exercised offline.
std::shared_ptr<ScriptedBackend> make_demo_backend(const std::string& id);

// ---------------------------------------------------------------------------
// Fixtures: record / replay
// ---------------------------------------------------------------------------

struct FixtureEntry {
  std::string hash;
  std::string prompt;
  double temperature = 0.0;
  int sample_index = 0;
  std::string response;
};

/// One JSON-lines file per session, keyed by request hash.
class FixtureStore {
 public:
  FixtureStore() = default;
  static FixtureStore load(const std::filesystem::path& path);

  void put(FixtureEntry entry);
  std::optional<std::string> find(const std::string& hash) const;
  std::size_t size() const { return entries_.size(); }
  std::string serialize() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<FixtureEntry> entries_;
  std::map<std::string, std::size_t> index_;
};

/// Serves recorded responses by request hash. In strict mode an unrecorded
/// request raises a fixture-miss error carrying the hash. When
/// `mark_cached` is set, served results are flagged cached=true and do not
/// advance the call counter.
class ReplayBackend : public Backend {
 public:
  ReplayBackend(std::string id, FixtureStore store, bool strict = true, bool mark_cached = false)
      : Backend(std::move(id)), store_(std::move(store)), strict_(strict), mark_cached_(mark_cached) {}

  CompletionResult complete(const CompletionRequest& request) override;

 private:
  std::mutex mutex_;
  FixtureStore store_;
  bool strict_;
  bool mark_cached_;
};

/// Wraps another backend and persists every (request hash -> response) pair
/// to a fixture file, one line per call, flushed immediately.
class RecordingBackend : public Backend {
 public:
  RecordingBackend(std::shared_ptr<Backend> inner, std::filesystem::path sink);

  CompletionResult complete(const CompletionRequest& request) override;
  std::size_t recorded() const { return recorded_.load(); }

 private:
  std::shared_ptr<Backend> inner_;
  std::filesystem::path sink_;
  std::mutex mutex_;
  std::atomic<std::size_t> recorded_{0};
};

// ---------------------------------------------------------------------------
// Rate limiting
// ---------------------------------------------------------------------------

/// Token bucket over requests/minute. rpm = 0 means unlimited.
class RateLimiter {
 public:
  explicit RateLimiter(int rpm) : rpm_(rpm), tokens_(rpm) {}

  /// Blocks until a token is available.
  void acquire();

  /// Non-blocking variant used by tests; `now` advances the refill clock.
  bool try_acquire(std::chrono::steady_clock::time_point now);

 private:
  int rpm_;
  double tokens_;
  std::optional<std::chrono::steady_clock::time_point> last_refill_;
  std::mutex mutex_;
};

/// Instantiates a backend from a descriptor (live backends come from
/// http_backend.cpp; scripted "demo" is the canned demo script).
std::shared_ptr<Backend> make_backend(const BackendDescriptor& descriptor);

/// Parses CLI-style backend specs: "scripted:demo", "replay:<fixture-path>",
/// or a named descriptor defined by the run configuration.
BackendDescriptor parse_backend_spec(const std::string& spec);

}  // namespace rw
