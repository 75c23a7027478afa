#pragma once

#include <optional>
#include <string>

namespace rw {

/// Search needle for the answer marker models are instructed to end with
/// ("Thus, the final answer is [X]"); the shortened form also catches
/// truncated echoes of the sentinel.
inline constexpr const char* kSentinelPhrase = "final answer is";

/// Canonical answer form: trim, strip wrapping brackets/parentheses/quotes
/// and trailing periods/commas to a fixpoint, lowercase, collapse internal
/// whitespace. Idempotent. No numeric canonicalization ("7,425" != "7425").
std::string normalize_answer(const std::string& text);

/// Captures X from the last (case-insensitive) "... the final answer is X"
/// up to sentence end, normalized. Absent when the sentinel is missing,
/// unless the final-non-empty-line fallback is enabled.
std::optional<std::string> extract_final_answer(const std::string& text,
                                                bool fallback_final_line = false);

}  // namespace rw
