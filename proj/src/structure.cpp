#include "reasonweaver/structure.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>
#include <set>

#include "reasonweaver/errors.hpp"
#include "reasonweaver/util.hpp"

namespace rw {

StructureNode StructureNode::text(std::string value) {
  StructureNode node;
  node.is_text_ = true;
  node.value_ = std::move(value);
  return node;
}

StructureNode StructureNode::map(Entries entries) {
  StructureNode node;
  node.is_text_ = false;
  node.entries_ = std::move(entries);
  return node;
}

const std::string& StructureNode::value() const {
  if (!is_text_) fail(ErrorKind::validation, "node is a map, not a text value");
  return value_;
}

const StructureNode::Entries& StructureNode::entries() const {
  if (is_text_) fail(ErrorKind::validation, "node is a text value, not a map");
  return entries_;
}

bool StructureNode::operator==(const StructureNode& other) const {
  if (is_text_ != other.is_text_) return false;
  if (is_text_) return value_ == other.value_;
  return entries_ == other.entries_;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

// Recursive-descent parser over one candidate brace block. Strict JSON string
// syntax; scalar values (numbers, true/false/null) are coerced to their raw
// token text; arrays reject the candidate.
class BlockParser {
 public:
  explicit BlockParser(std::string_view text) : text_(text) {}

  std::optional<StructureNode::Entries> parse_root() {
    skip_ws();
    auto entries = parse_map_body();
    if (!entries) return std::nullopt;
    skip_ws();
    if (pos_ != text_.size()) return std::nullopt;  // trailing garbage inside the block
    if (entries->empty()) return std::nullopt;      // a structure needs at least one step
    return entries;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                   text_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool eat(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  std::optional<StructureNode::Entries> parse_map_body() {
    if (!eat('{')) return std::nullopt;
    StructureNode::Entries entries;
    skip_ws();
    if (eat('}')) return entries;  // nested empty maps surface through validation
    while (true) {
      skip_ws();
      auto key = parse_string();
      if (!key) return std::nullopt;
      skip_ws();
      if (!eat(':')) return std::nullopt;
      skip_ws();
      auto value = parse_value();
      if (!value) return std::nullopt;
      entries.emplace_back(std::move(*key), std::move(*value));
      skip_ws();
      if (eat(',')) continue;
      if (eat('}')) return entries;
      return std::nullopt;
    }
  }

  std::optional<StructureNode> parse_value() {
    char c = peek();
    if (c == '"') {
      auto s = parse_string();
      if (!s) return std::nullopt;
      return StructureNode::text(std::move(*s));
    }
    if (c == '{') {
      auto entries = parse_map_body();
      if (!entries) return std::nullopt;
      return StructureNode::map(std::move(*entries));
    }
    if (c == '[') return std::nullopt;  // arrays are not key-value shaped
    return parse_scalar();
  }

  // number / true / false / null, kept as verbatim token text
  std::optional<StructureNode> parse_scalar() {
    std::size_t start = pos_;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ',' || c == '}' || c == ']' || c == ' ' || c == '\t' || c == '\n' || c == '\r') break;
      ++pos_;
    }
    if (pos_ == start) return std::nullopt;
    std::string token(text_.substr(start, pos_ - start));
    if (token == "true" || token == "false" || token == "null") return StructureNode::text(token);
    // Validate the token as a JSON number so arbitrary prose cannot slip in.
    std::size_t i = 0;
    if (i < token.size() && token[i] == '-') ++i;
    bool digits = false;
    while (i < token.size() && std::isdigit(static_cast<unsigned char>(token[i]))) { ++i; digits = true; }
    if (i < token.size() && token[i] == '.') {
      ++i;
      while (i < token.size() && std::isdigit(static_cast<unsigned char>(token[i]))) { ++i; digits = true; }
    }
    if (digits && i < token.size() && (token[i] == 'e' || token[i] == 'E')) {
      ++i;
      if (i < token.size() && (token[i] == '+' || token[i] == '-')) ++i;
      bool exp_digits = false;
      while (i < token.size() && std::isdigit(static_cast<unsigned char>(token[i]))) { ++i; exp_digits = true; }
      if (!exp_digits) return std::nullopt;
    }
    if (!digits || i != token.size()) return std::nullopt;
    return StructureNode::text(token);
  }

  std::optional<std::string> parse_string() {
    if (!eat('"')) return std::nullopt;
    std::string out;
    while (pos_ < text_.size()) {
      char c = text_[pos_++];
      if (c == '"') return out;
      if (static_cast<unsigned char>(c) < 0x20) return std::nullopt;  // raw control char
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (pos_ >= text_.size()) return std::nullopt;
      char esc = text_[pos_++];
      switch (esc) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case '/': out.push_back('/'); break;
        case 'b': out.push_back('\b'); break;
        case 'f': out.push_back('\f'); break;
        case 'n': out.push_back('\n'); break;
        case 'r': out.push_back('\r'); break;
        case 't': out.push_back('\t'); break;
        case 'u': {
          auto cp = parse_hex4();
          if (!cp) return std::nullopt;
          std::uint32_t code = *cp;
          if (code >= 0xD800 && code <= 0xDBFF) {  // surrogate pair
            if (pos_ + 1 >= text_.size() || text_[pos_] != '\\' || text_[pos_ + 1] != 'u') return std::nullopt;
            pos_ += 2;
            auto low = parse_hex4();
            if (!low || *low < 0xDC00 || *low > 0xDFFF) return std::nullopt;
            code = 0x10000 + ((code - 0xD800) << 10) + (*low - 0xDC00);
          } else if (code >= 0xDC00 && code <= 0xDFFF) {
            return std::nullopt;  // lone low surrogate
          }
          append_utf8(out, code);
          break;
        }
        default: return std::nullopt;
      }
    }
    return std::nullopt;  // unterminated string
  }

  std::optional<std::uint32_t> parse_hex4() {
    if (pos_ + 4 > text_.size()) return std::nullopt;
    std::uint32_t value = 0;
    for (int i = 0; i < 4; ++i) {
      char c = text_[pos_++];
      value <<= 4;
      if (c >= '0' && c <= '9') value |= static_cast<std::uint32_t>(c - '0');
      else if (c >= 'a' && c <= 'f') value |= static_cast<std::uint32_t>(c - 'a' + 10);
      else if (c >= 'A' && c <= 'F') value |= static_cast<std::uint32_t>(c - 'A' + 10);
      else return std::nullopt;
    }
    return value;
  }

  static void append_utf8(std::string& out, std::uint32_t code) {
    if (code < 0x80) {
      out.push_back(static_cast<char>(code));
    } else if (code < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (code >> 6)));
      out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
    } else if (code < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (code >> 12)));
      out.push_back(static_cast<char>(0x80 | ((code >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (code >> 18)));
      out.push_back(static_cast<char>(0x80 | ((code >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((code >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
    }
  }
};

// Finds the balanced brace block starting at `start` (text[start] == '{'),
// tracking string state so braces inside quoted keys/values do not count.
// Returns one past the closing brace, or npos when the block never closes.
std::size_t find_block_end(std::string_view text, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

// Tries every balanced block in order of start position; returns the first
// one that parses as a non-empty key-value map.
std::optional<StructureNode::Entries> scan_for_structure(std::string_view text, bool& saw_balanced) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{') continue;
    std::size_t end = find_block_end(text, i);
    if (end == std::string_view::npos) continue;
    saw_balanced = true;
    BlockParser parser(text.substr(i, end - i));
    if (auto entries = parser.parse_root()) return entries;
  }
  return std::nullopt;
}

// Content of the largest ``` fenced block, if any.
std::optional<std::string_view> largest_fenced_block(std::string_view text) {
  std::optional<std::string_view> best;
  std::size_t pos = 0;
  while (true) {
    std::size_t open = text.find("```", pos);
    if (open == std::string_view::npos) break;
    std::size_t content_start = text.find('\n', open + 3);
    if (content_start == std::string_view::npos) break;
    ++content_start;
    std::size_t close = text.find("```", content_start);
    if (close == std::string_view::npos) break;
    std::string_view content = text.substr(content_start, close - content_start);
    if (!best || content.size() > best->size()) best = content;
    pos = close + 3;
  }
  return best;
}

}  // namespace

ReasoningStructure extract_structure(const std::string& raw) {
  bool saw_balanced = false;
  if (auto entries = scan_for_structure(raw, saw_balanced)) {
    return ReasoningStructure(std::move(*entries));
  }
  if (auto fenced = largest_fenced_block(raw)) {
    bool fenced_balanced = false;
    if (auto entries = scan_for_structure(*fenced, fenced_balanced)) {
      return ReasoningStructure(std::move(*entries));
    }
    saw_balanced = saw_balanced || fenced_balanced;
  }
  if (saw_balanced) {
    fail(ErrorKind::shape, "balanced block is not key-value shaped in: " + raw);
  }
  fail(ErrorKind::extraction, "no balanced key-value block in: " + raw);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

void append_quoted(std::string& out, std::string_view text) {
  out.push_back('"');
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          static const char* hex = "0123456789abcdef";
          out += "\\u00";
          out.push_back(hex[(static_cast<unsigned char>(c) >> 4) & 0x0f]);
          out.push_back(hex[static_cast<unsigned char>(c) & 0x0f]);
        } else {
          out.push_back(c);
        }
    }
  }
  out.push_back('"');
}

void serialize_entries(std::string& out, const StructureNode::Entries& entries, int indent) {
  out.push_back('{');
  if (entries.empty()) {
    out.push_back('}');
    return;
  }
  std::string pad(static_cast<std::size_t>(indent) + 2, ' ');
  for (std::size_t i = 0; i < entries.size(); ++i) {
    out.push_back('\n');
    out += pad;
    append_quoted(out, entries[i].first);
    out += ": ";
    const StructureNode& node = entries[i].second;
    if (node.is_text()) {
      append_quoted(out, node.value());
    } else {
      serialize_entries(out, node.entries(), indent + 2);
    }
    if (i + 1 < entries.size()) out.push_back(',');
  }
  out.push_back('\n');
  out.append(static_cast<std::size_t>(indent), ' ');
  out.push_back('}');
}

}  // namespace

std::string serialize_structure(const ReasoningStructure& structure) {
  std::string out;
  serialize_entries(out, structure.steps(), 0);
  out.push_back('\n');
  return out;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

void validate_entries(const StructureNode::Entries& entries, const std::string& path,
                      std::vector<ValidationIssue>& issues) {
  if (entries.empty()) {
    issues.push_back({path, path == "/" ? "empty structure" : "empty nested map"});
    return;
  }
  std::set<std::string> seen;
  for (const auto& [key, node] : entries) {
    if (trim(key).empty()) {
      issues.push_back({path, "empty key"});
    } else if (!seen.insert(key).second) {
      issues.push_back({path, "duplicate key \"" + key + "\""});
    }
    if (node.is_map()) {
      std::string child_path = path == "/" ? "/" + key : path + "/" + key;
      validate_entries(node.entries(), child_path, issues);
    }
  }
}

}  // namespace

ValidationReport validate_structure(const ReasoningStructure& structure) {
  ValidationReport report;
  validate_entries(structure.steps(), "/", report.issues);
  report.valid = report.issues.empty();
  return report;
}

}  // namespace rw
