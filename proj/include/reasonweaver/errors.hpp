#pragma once

#include <stdexcept>
#include <string>

namespace rw {

enum class ErrorKind {
  format,          // malformed document / file
  validation,      // invariant violated on construction or load
  lookup,          // unknown id or key
  empty_input,     // operation requires non-empty input
  extraction,      // no balanced key-value block in model output
  shape,           // balanced block present but not key-value shaped
  selection_parse, // SELECT output resolved to zero modules
  adaptation,      // ADAPT produced no usable entries
  implementation,  // IMPLEMENT produced no valid structure within retry budget
  transport,       // network / API failure after retries
  fixture_miss,    // replay backend has no entry for the request hash
  persistence,     // filesystem write failure
  scoring,         // gold targets missing or solutions reference unknown instances
  accounting,      // log-derived call totals disagree with self-reported counts
  empty_vote,      // majority vote over zero present answers
  provenance,      // structure file header corrupt or incomplete
  config,          // bad run configuration
  usage,           // bad CLI invocation
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` tells callers (and the CLI
/// exit-code mapping) what went wrong.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace rw
