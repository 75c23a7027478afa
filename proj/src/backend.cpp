#include "reasonweaver/backend.hpp"

#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "reasonweaver/digest.hpp"
#include "reasonweaver/errors.hpp"
#include "reasonweaver/util.hpp"

namespace rw {

using ordered_json = nlohmann::ordered_json;

const char* to_string(Purpose purpose) {
  switch (purpose) {
    case Purpose::select: return "select";
    case Purpose::adapt: return "adapt";
    case Purpose::implement: return "implement";
    case Purpose::solve: return "solve";
    case Purpose::baseline: return "baseline";
  }
  return "unknown";
}

Purpose purpose_from_string(const std::string& text) {
  if (text == "select") return Purpose::select;
  if (text == "adapt") return Purpose::adapt;
  if (text == "implement") return Purpose::implement;
  if (text == "solve") return Purpose::solve;
  if (text == "baseline") return Purpose::baseline;
  fail(ErrorKind::format, "unknown purpose: " + text);
}

std::string CompletionRequest::hash() const {
  return sha256_fields({prompt, canonical_double(temperature), std::to_string(sample_index)});
}

void CompletionRequest::validate() const {
  if (prompt.empty()) fail(ErrorKind::validation, "request prompt is empty");
  if (temperature < 0.0) fail(ErrorKind::validation, "temperature must be >= 0");
  if (max_output <= 0) fail(ErrorKind::validation, "max_output must be positive");
  if (sample_index < 0) fail(ErrorKind::validation, "sample_index must be >= 0");
}

CompletionResult Backend::make_result(std::string text, bool cached) {
  CompletionResult result;
  result.text = std::move(text);
  result.backend_id = id_;
  result.cached = cached;
  result.call_index = cached ? calls_.load() : calls_.fetch_add(1) + 1;
  return result;
}

// ---------------------------------------------------------------------------
// Scripted
// ---------------------------------------------------------------------------

void ScriptedBackend::program(const CompletionRequest& request, std::string response) {
  program_hash(request.hash(), std::move(response));
}

void ScriptedBackend::program_hash(const std::string& request_hash, std::string response) {
  std::lock_guard<std::mutex> lock(mutex_);
  by_hash_[request_hash] = std::move(response);
}

void ScriptedBackend::enqueue(Purpose purpose, std::string response) {
  std::lock_guard<std::mutex> lock(mutex_);
  queues_[purpose].push_back(std::move(response));
}

void ScriptedBackend::respond_to(Purpose purpose, Responder responder) {
  std::lock_guard<std::mutex> lock(mutex_);
  by_purpose_[purpose] = std::move(responder);
}

void ScriptedBackend::set_default(Responder responder) {
  std::lock_guard<std::mutex> lock(mutex_);
  default_ = std::move(responder);
}

CompletionResult ScriptedBackend::complete(const CompletionRequest& request) {
  request.validate();
  std::string text;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (auto it = by_hash_.find(request.hash()); it != by_hash_.end()) {
      text = it->second;
    } else if (auto qit = queues_.find(request.purpose); qit != queues_.end() && !qit->second.empty()) {
      text = std::move(qit->second.front());
      qit->second.pop_front();
    } else if (auto pit = by_purpose_.find(request.purpose); pit != by_purpose_.end()) {
      text = pit->second(request);
    } else if (default_) {
      text = default_(request);
    } else {
      fail(ErrorKind::lookup, "scripted backend " + id() + " has no response for purpose " +
                                  to_string(request.purpose) + ", hash " + request.hash());
    }
  }
  return make_result(std::move(text), /*cached=*/false);
}

std::shared_ptr<ScriptedBackend> make_demo_backend(const std::string& id) {
  auto backend = std::make_shared<ScriptedBackend>(id);
  backend->respond_to(Purpose::select, [](const CompletionRequest&) {
    return std::string("The most useful modules for this task are:\n38\n9\n");
  });
  backend->respond_to(Purpose::adapt, [](const CompletionRequest&) {
    return std::string(
        "- Work through the task one small step at a time.\n"
        "- Split the task into the smallest checkable sub-results.\n");
  });
  backend->respond_to(Purpose::implement, [](const CompletionRequest&) {
    return std::string(
        "Here is the reasoning plan:\n"
        "{\n"
        "  \"Restate the task in your own words\": \"\",\n"
        "  \"Work through each required step in order\": \"\",\n"
        "  \"Check the intermediate results\": \"\",\n"
        "  \"State the final answer\": \"\"\n"
        "}\n");
  });
  // Solves the bundled word-sorting fixture so offline demos score sensibly;
  // anything else gets a fixed sentinel answer.
  auto answer = [](const CompletionRequest& request) {
    const std::string marker = "Sort the following words alphabetically:";
    std::size_t pos = request.prompt.find(marker);
    if (pos != std::string::npos) {
      std::size_t start = pos + marker.size();
      std::size_t end = request.prompt.find('\n', start);
      std::istringstream words_in(request.prompt.substr(
          start, end == std::string::npos ? std::string::npos : end - start));
      std::vector<std::string> words{std::istream_iterator<std::string>(words_in),
                                     std::istream_iterator<std::string>()};
      std::sort(words.begin(), words.end());
      std::string joined;
      for (const auto& word : words) {
        if (!joined.empty()) joined.push_back(' ');
        joined += word;
      }
      return "Comparing the words one letter at a time. Thus, the final answer is " + joined + ".";
    }
    return std::string("Working through the plan as instructed. Thus, the final answer is demo.");
  };
  backend->respond_to(Purpose::solve, answer);
  backend->respond_to(Purpose::baseline, answer);
  return backend;
}

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

FixtureStore FixtureStore::load(const std::filesystem::path& path) {
  FixtureStore store;
  const std::string content = read_file(path);
  const auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    ordered_json record;
    try {
      record = ordered_json::parse(lines[i]);
    } catch (const ordered_json::parse_error& e) {
      fail(ErrorKind::format, path.string() + " line " + std::to_string(i + 1) + ": " + e.what());
    }
    FixtureEntry entry;
    entry.hash = record.at("hash").get<std::string>();
    entry.prompt = record.at("prompt").get<std::string>();
    entry.temperature = record.at("temperature").get<double>();
    entry.sample_index = record.at("sample_index").get<int>();
    entry.response = record.at("response").get<std::string>();
    store.put(std::move(entry));
  }
  return store;
}

void FixtureStore::put(FixtureEntry entry) {
  auto it = index_.find(entry.hash);
  if (it != index_.end()) {
    entries_[it->second] = std::move(entry);
    return;
  }
  index_[entry.hash] = entries_.size();
  entries_.push_back(std::move(entry));
}

std::optional<std::string> FixtureStore::find(const std::string& hash) const {
  auto it = index_.find(hash);
  if (it == index_.end()) return std::nullopt;
  return entries_[it->second].response;
}

std::string FixtureStore::serialize() const {
  std::string out;
  for (const auto& entry : entries_) {
    ordered_json record;
    record["hash"] = entry.hash;
    record["prompt"] = entry.prompt;
    record["temperature"] = entry.temperature;
    record["sample_index"] = entry.sample_index;
    record["response"] = entry.response;
    out += record.dump();
    out.push_back('\n');
  }
  return out;
}

void FixtureStore::save(const std::filesystem::path& path) const {
  write_file_atomic(path, serialize());
}

CompletionResult ReplayBackend::complete(const CompletionRequest& request) {
  request.validate();
  std::optional<std::string> response;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    response = store_.find(request.hash());
  }
  if (!response) {
    if (strict_) {
      fail(ErrorKind::fixture_miss, "no fixture for request hash " + request.hash());
    }
    return make_result("", /*cached=*/true);
  }
  return make_result(std::move(*response), mark_cached_);
}

RecordingBackend::RecordingBackend(std::shared_ptr<Backend> inner, std::filesystem::path sink)
    : Backend(inner->id()), inner_(std::move(inner)), sink_(std::move(sink)) {
  if (sink_.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(sink_.parent_path(), ec);
  }
  std::ofstream probe(sink_, std::ios::app);
  if (!probe) fail(ErrorKind::persistence, "fixture sink not writable: " + sink_.string());
}

CompletionResult RecordingBackend::complete(const CompletionRequest& request) {
  CompletionResult result = inner_->complete(request);
  ordered_json record;
  record["hash"] = request.hash();
  record["prompt"] = request.prompt;
  record["temperature"] = request.temperature;
  record["sample_index"] = request.sample_index;
  record["response"] = result.text;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    std::ofstream out(sink_, std::ios::app);
    out << record.dump() << '\n';
    out.flush();
    if (!out) fail(ErrorKind::persistence, "failed appending fixture to " + sink_.string());
  }
  recorded_.fetch_add(1);
  return result;
}

// ---------------------------------------------------------------------------
// Rate limiting
// ---------------------------------------------------------------------------

bool RateLimiter::try_acquire(std::chrono::steady_clock::time_point now) {
  if (rpm_ <= 0) return true;
  std::lock_guard<std::mutex> lock(mutex_);
  if (last_refill_) {
    double elapsed_s = std::chrono::duration<double>(now - *last_refill_).count();
    tokens_ = std::min<double>(rpm_, tokens_ + elapsed_s * rpm_ / 60.0);
  }
  last_refill_ = now;
  if (tokens_ >= 1.0) {
    tokens_ -= 1.0;
    return true;
  }
  return false;
}

void RateLimiter::acquire() {
  while (!try_acquire(std::chrono::steady_clock::now())) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

// ---------------------------------------------------------------------------
// Descriptors
// ---------------------------------------------------------------------------

std::shared_ptr<Backend> make_live_backend(const BackendDescriptor& descriptor);  // http_backend.cpp

std::shared_ptr<Backend> make_backend(const BackendDescriptor& descriptor) {
  if (descriptor.backend_id.empty()) fail(ErrorKind::config, "backend_id is empty");
  switch (descriptor.kind) {
    case BackendKind::scripted:
      return make_demo_backend(descriptor.backend_id);
    case BackendKind::replay:
      return std::make_shared<ReplayBackend>(descriptor.backend_id,
                                             FixtureStore::load(descriptor.fixture_path));
    case BackendKind::live:
      return make_live_backend(descriptor);
  }
  fail(ErrorKind::config, "unknown backend kind");
}

BackendDescriptor parse_backend_spec(const std::string& spec) {
  BackendDescriptor d;
  if (spec.rfind("scripted:", 0) == 0) {
    d.kind = BackendKind::scripted;
    d.backend_id = spec;
    return d;
  }
  if (spec.rfind("replay:", 0) == 0) {
    d.kind = BackendKind::replay;
    d.fixture_path = spec.substr(7);
    d.backend_id = spec;
    if (d.fixture_path.empty()) fail(ErrorKind::usage, "replay backend needs a fixture path");
    return d;
  }
  fail(ErrorKind::usage, "unknown backend spec: " + spec +
                             " (expected scripted:<name>, replay:<fixture>, or a configured backend id)");
}

}  // namespace rw
