#pragma once

#include <mutex>
#include <string>
#include <vector>

#include "reasonweaver/backend.hpp"

namespace rw {

/// One backend call as observed by a pipeline. Serialized with a
/// deterministic record-local sequence number so run records are
/// byte-identical under replay regardless of the parallelism bound.
struct CallLogEntry {
  Purpose purpose = Purpose::solve;
  std::string instance_id;  // empty for task-level (discovery) calls
  int sample_index = 0;
  std::string request_hash;
  bool cached = false;
  bool retry = false;  // parse-retry call, logged separately from primary calls
};

/// Thread-safe append-only sink shared by concurrent solvers.
class CallLog {
 public:
  void append(CallLogEntry entry) {
    std::lock_guard<std::mutex> lock(mutex_);
    entries_.push_back(std::move(entry));
  }

  std::vector<CallLogEntry> snapshot() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_;
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
  }

 private:
  mutable std::mutex mutex_;
  std::vector<CallLogEntry> entries_;
};

}  // namespace rw
