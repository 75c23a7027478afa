#pragma once

#include <string>
#include <utility>
#include <vector>

namespace rw {

/// One node of a reasoning structure: either a text value (possibly empty,
/// acting as a placeholder the model fills during decoding) or a nested
/// ordered map of step-description keys to further nodes.
///
/// Sibling keys may repeat structurally; validate_structure reports that as
/// an issue rather than the parser silently collapsing the duplicates.
class StructureNode {
 public:
  using Entry = std::pair<std::string, StructureNode>;
  using Entries = std::vector<Entry>;

  static StructureNode text(std::string value);
  static StructureNode map(Entries entries);

  bool is_text() const { return is_text_; }
  bool is_map() const { return !is_text_; }
  const std::string& value() const;
  const Entries& entries() const;

  bool operator==(const StructureNode& other) const;

 private:
  bool is_text_ = true;
  std::string value_;
  Entries entries_;
};

/// Ordered key-value reasoning plan. Key order is preserved exactly as
/// extracted; serialization is canonical (same structure => identical bytes).
class ReasoningStructure {
 public:
  ReasoningStructure() = default;
  explicit ReasoningStructure(StructureNode::Entries steps) : steps_(std::move(steps)) {}

  const StructureNode::Entries& steps() const { return steps_; }
  bool operator==(const ReasoningStructure& other) const { return steps_ == other.steps_; }

 private:
  StructureNode::Entries steps_;
};

struct ValidationIssue {
  std::string path;  // "/" for root, "/a/b" for nested
  std::string message;
};

struct ValidationReport {
  bool valid = true;
  std::vector<ValidationIssue> issues;
};

/// Parses the first syntactically balanced top-level key-value block found in
/// raw model output; surrounding prose and code fences are ignored. Falls
/// back to the largest fenced code block when no inline block parses.
ReasoningStructure extract_structure(const std::string& raw);

/// Canonical text: two-space indentation, insertion order, trailing newline.
/// extract_structure(serialize_structure(s)) == s.
std::string serialize_structure(const ReasoningStructure& structure);

/// Reports empty keys, duplicate sibling keys, and zero-key maps. Never
/// throws; valid iff issues is empty.
ValidationReport validate_structure(const ReasoningStructure& structure);

}  // namespace rw
