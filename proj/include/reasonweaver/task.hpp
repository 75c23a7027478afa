#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rw {

enum class AnswerKind { multiple_choice, free_text };

const char* to_string(AnswerKind kind);
AnswerKind answer_kind_from_string(const std::string& text);

struct Instance {
  std::string instance_id;
  std::string input;                  // non-empty
  std::optional<std::string> target;  // gold answer, absent for unlabeled data
};

struct Task {
  std::string task_id;
  std::vector<Instance> instances;  // >= 1, unique ids
  std::optional<std::string> category;
  AnswerKind answer_kind = AnswerKind::free_text;

  const Instance& instance(const std::string& id) const;
  bool has_instance(const std::string& id) const;
};

/// Loads a task document: JSON-lines, a metadata record first
/// ({"task_id":...,"answer_kind":...[,"category":...]}) followed by one
/// instance record per line ({"instance_id":...,"input":...[,"target":...]}).
Task load_task(const std::filesystem::path& path);
Task parse_task(const std::string& document, const std::string& origin);

/// Canonical document for a task (inverse of parse_task).
std::string save_task(const Task& task);

}  // namespace rw
