#include "reasonweaver/task.hpp"

#include <set>

#include <nlohmann/json.hpp>

#include "reasonweaver/errors.hpp"
#include "reasonweaver/util.hpp"

namespace rw {

using ordered_json = nlohmann::ordered_json;

const char* to_string(AnswerKind kind) {
  return kind == AnswerKind::multiple_choice ? "multiple_choice" : "free_text";
}

AnswerKind answer_kind_from_string(const std::string& text) {
  if (text == "multiple_choice") return AnswerKind::multiple_choice;
  if (text == "free_text") return AnswerKind::free_text;
  fail(ErrorKind::format, "unknown answer_kind: " + text);
}

const Instance& Task::instance(const std::string& id) const {
  for (const auto& inst : instances) {
    if (inst.instance_id == id) return inst;
  }
  fail(ErrorKind::lookup, "unknown instance id: " + id);
}

bool Task::has_instance(const std::string& id) const {
  for (const auto& inst : instances) {
    if (inst.instance_id == id) return true;
  }
  return false;
}

Task parse_task(const std::string& document, const std::string& origin) {
  Task task;
  bool have_meta = false;
  std::set<std::string> seen_ids;
  const auto lines = split_lines(document);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    ordered_json record;
    try {
      record = ordered_json::parse(lines[i]);
    } catch (const ordered_json::parse_error& e) {
      fail(ErrorKind::format, origin + " line " + std::to_string(i + 1) + ": " + e.what());
    }
    if (!record.is_object()) {
      fail(ErrorKind::format, origin + " line " + std::to_string(i + 1) + ": expected an object");
    }
    if (!have_meta) {
      if (!record.contains("task_id") || !record["task_id"].is_string()) {
        fail(ErrorKind::format, origin + " line " + std::to_string(i + 1) +
                                    ": first record must be task metadata with a task_id");
      }
      task.task_id = record["task_id"].get<std::string>();
      if (record.contains("answer_kind")) {
        task.answer_kind = answer_kind_from_string(record["answer_kind"].get<std::string>());
      }
      if (record.contains("category") && record["category"].is_string()) {
        task.category = record["category"].get<std::string>();
      }
      have_meta = true;
      continue;
    }
    if (!record.contains("instance_id") || !record.contains("input")) {
      fail(ErrorKind::format, origin + " line " + std::to_string(i + 1) +
                                  ": instance record needs instance_id and input");
    }
    Instance inst;
    inst.instance_id = record["instance_id"].get<std::string>();
    inst.input = record["input"].get<std::string>();
    if (inst.input.empty()) {
      fail(ErrorKind::format, origin + " line " + std::to_string(i + 1) + ": instance input is empty");
    }
    if (record.contains("target") && !record["target"].is_null()) {
      inst.target = record["target"].get<std::string>();
    }
    if (!seen_ids.insert(inst.instance_id).second) {
      fail(ErrorKind::format,
           origin + " line " + std::to_string(i + 1) + ": duplicate instance id " + inst.instance_id);
    }
    task.instances.push_back(std::move(inst));
  }
  if (!have_meta) fail(ErrorKind::format, origin + ": missing task metadata record");
  if (task.instances.empty()) fail(ErrorKind::format, origin + ": task has no instances");
  return task;
}

Task load_task(const std::filesystem::path& path) {
  return parse_task(read_file(path), path.string());
}

std::string save_task(const Task& task) {
  std::string out;
  ordered_json meta;
  meta["task_id"] = task.task_id;
  meta["answer_kind"] = to_string(task.answer_kind);
  if (task.category) meta["category"] = *task.category;
  out += meta.dump();
  out.push_back('\n');
  for (const auto& inst : task.instances) {
    ordered_json record;
    record["instance_id"] = inst.instance_id;
    record["input"] = inst.input;
    if (inst.target) record["target"] = *inst.target;
    out += record.dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace rw
