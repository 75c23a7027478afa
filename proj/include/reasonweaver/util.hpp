#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace rw {

std::string trim(std::string_view text);
std::string to_lower(std::string_view text);
std::string collapse_whitespace(std::string_view text);
std::vector<std::string> split_lines(std::string_view text);
bool contains_ci(std::string_view haystack, std::string_view needle);

/// Replaces every occurrence of `from` with `to`.
std::string replace_all(std::string text, std::string_view from, std::string_view to);

/// Normalizes CRLF / CR line endings to LF.
std::string normalize_newlines(std::string text);

std::string read_file(const std::filesystem::path& path);

/// Write-temp-then-rename so concurrent readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Current UTC time as ISO-8601, or the fixed epoch string when `canonical`.
std::string timestamp_utc(bool canonical);

/// Runs fn(i) for i in [0, count) on up to `parallelism` threads. Exceptions
/// are captured and the first one rethrown after all workers join.
void run_parallel(std::size_t count, int parallelism, const std::function<void(std::size_t)>& fn);

}  // namespace rw
