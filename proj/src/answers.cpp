#include "reasonweaver/answers.hpp"

#include <cctype>

#include "reasonweaver/util.hpp"

namespace rw {

namespace {

char closer_for(char opener) {
  switch (opener) {
    case '(': return ')';
    case '[': return ']';
    case '{': return '}';
    default: return '\0';
  }
}

// True when the opener at position 0 closes exactly at the last position,
// so "(a)" is wrapped but "(a) and (b)" is not.
bool is_bracket_wrapped(const std::string& s) {
  if (s.size() < 2) return false;
  char close = closer_for(s.front());
  if (close == '\0' || s.back() != close) return false;
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == s.front()) ++depth;
    else if (s[i] == close && --depth == 0) return i == s.size() - 1;
  }
  return false;
}

bool is_quote_wrapped(const std::string& s) {
  if (s.size() < 2) return false;
  char q = s.front();
  if ((q != '"' && q != '\'') || s.back() != q) return false;
  return s.find(q, 1) == s.size() - 1;  // no interior quote of the same kind
}

}  // namespace

std::string normalize_answer(const std::string& text) {
  std::string s = trim(text);
  while (true) {
    std::string before = s;
    while (!s.empty() && (s.back() == '.' || s.back() == ',')) s.pop_back();
    s = trim(s);
    if (is_bracket_wrapped(s) || is_quote_wrapped(s)) {
      s = trim(s.substr(1, s.size() - 2));
    }
    if (s == before) break;
  }
  return collapse_whitespace(to_lower(s));
}

namespace {

std::size_t find_last_ci(const std::string& haystack, const std::string& needle) {
  const std::string h = to_lower(haystack);
  return h.rfind(needle);
}

// Payload runs until the sentence ends: a newline, or a period followed by
// whitespace / end of text (so decimals like 3.14 survive).
std::string capture_payload(const std::string& text, std::size_t from) {
  std::size_t i = from;
  while (i < text.size() && (text[i] == ' ' || text[i] == ':')) ++i;
  std::size_t end = i;
  while (end < text.size()) {
    char c = text[end];
    if (c == '\n') break;
    if (c == '.' && (end + 1 == text.size() ||
                     std::isspace(static_cast<unsigned char>(text[end + 1])))) {
      break;
    }
    ++end;
  }
  return text.substr(i, end - i);
}

}  // namespace

std::optional<std::string> extract_final_answer(const std::string& text, bool fallback_final_line) {
  const std::string sentinel(kSentinelPhrase);
  std::size_t pos = find_last_ci(text, sentinel);
  if (pos != std::string::npos) {
    std::string answer = normalize_answer(capture_payload(text, pos + sentinel.size()));
    if (!answer.empty()) return answer;
    return std::nullopt;
  }
  if (fallback_final_line) {
    const auto lines = split_lines(text);
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
      std::string answer = normalize_answer(*it);
      if (!answer.empty()) return answer;
    }
  }
  return std::nullopt;
}

}  // namespace rw
