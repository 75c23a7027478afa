#include "reasonweaver/evaluation.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "reasonweaver/errors.hpp"
#include "reasonweaver/util.hpp"

namespace rw {

using ordered_json = nlohmann::ordered_json;

CategoryTaxonomy CategoryTaxonomy::load(const std::filesystem::path& path) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(read_file(path));
  } catch (const ordered_json::parse_error& e) {
    fail(ErrorKind::format, path.string() + ": " + e.what());
  }
  if (!doc.is_object()) fail(ErrorKind::format, path.string() + ": expected task->category object");
  std::map<std::string, std::string> mapping;
  for (const auto& [task_id, category] : doc.items()) {
    mapping[task_id] = category.get<std::string>();
  }
  return CategoryTaxonomy(std::move(mapping));
}

std::string CategoryTaxonomy::category_of(const std::string& task_id) const {
  auto it = mapping_.find(task_id);
  return it == mapping_.end() ? "uncategorized" : it->second;
}

TaskScore score_task(const std::vector<Solution>& solutions, const Task& task,
                     const std::string& method_label) {
  if (solutions.empty()) fail(ErrorKind::scoring, "no solutions to score for " + task.task_id);
  std::set<std::string> seen;
  TaskScore score;
  score.task_id = task.task_id;
  score.method = method_label;
  score.n_instances = static_cast<int>(task.instances.size());
  for (const auto& solution : solutions) {
    if (!task.has_instance(solution.instance_id)) {
      fail(ErrorKind::scoring, "solution references unknown instance " + solution.instance_id);
    }
    if (!seen.insert(solution.instance_id).second) {
      fail(ErrorKind::scoring, "duplicate solution for instance " + solution.instance_id);
    }
    const Instance& instance = task.instance(solution.instance_id);
    if (!instance.target) {
      fail(ErrorKind::scoring, "instance " + solution.instance_id + " has no gold target");
    }
    score.calls_total += solution.calls_used;
    if (solution.answer && *solution.answer == normalize_answer(*instance.target)) {
      ++score.n_correct;
    }
  }
  score.accuracy = static_cast<double>(score.n_correct) / score.n_instances;
  return score;
}

BestModule best_of_modules(const std::vector<std::pair<int, TaskScore>>& module_scores) {
  if (module_scores.empty()) fail(ErrorKind::scoring, "no module scores");
  BestModule best{-1.0, 0};
  for (const auto& [module_id, score] : module_scores) {
    if (score.accuracy > best.accuracy ||
        (score.accuracy == best.accuracy && module_id < best.module_id) || best.accuracy < 0.0) {
      best = {score.accuracy, module_id};
    }
  }
  return best;
}

CallAccount account_calls(const std::vector<RunRecord>& records) {
  CallAccount account;
  for (const auto& record : records) {
    CallTotals totals;
    for (const auto& entry : record.call_log) {
      switch (entry.purpose) {
        case Purpose::select:
        case Purpose::adapt:
        case Purpose::implement:
          if (entry.instance_id.empty()) ++totals.task_level_calls;
          else ++totals.per_instance_calls;  // instance-level structure composition
          break;
        case Purpose::solve:
        case Purpose::baseline:
          ++totals.per_instance_calls;
          break;
      }
    }
    totals.total = totals.task_level_calls + totals.per_instance_calls;

    int self_reported_task_level = record.discovery_primary_calls + record.discovery_retry_calls;
    int self_reported_solving = 0;
    int instance_level_implement = 0;
    for (const auto& entry : record.call_log) {
      if (entry.purpose == Purpose::implement && !entry.instance_id.empty()) {
        ++instance_level_implement;
      }
    }
    for (const auto& solution : record.solutions) self_reported_solving += solution.calls_used;
    if (totals.task_level_calls != self_reported_task_level) {
      fail(ErrorKind::accounting,
           "run " + record.run_id + ": log shows " + std::to_string(totals.task_level_calls) +
               " task-level calls, header reports " + std::to_string(self_reported_task_level));
    }
    if (totals.per_instance_calls != self_reported_solving + instance_level_implement) {
      fail(ErrorKind::accounting,
           "run " + record.run_id + ": log shows " + std::to_string(totals.per_instance_calls) +
               " per-instance calls, solutions report " +
               std::to_string(self_reported_solving + instance_level_implement));
    }

    auto& bucket = account.per_method[to_string(record.method)];
    bucket.task_level_calls += totals.task_level_calls;
    bucket.per_instance_calls += totals.per_instance_calls;
    bucket.total += totals.total;
  }
  return account;
}

std::map<std::string, double> category_breakdown(const std::vector<TaskScore>& method_scores,
                                                 const std::vector<TaskScore>& baseline_scores,
                                                 const CategoryTaxonomy& taxonomy) {
  std::map<std::string, double> baseline_by_task;
  for (const auto& score : baseline_scores) baseline_by_task[score.task_id] = score.accuracy;

  std::map<std::string, std::pair<double, int>> sums;  // category -> (delta sum, task count)
  for (const auto& score : method_scores) {
    auto it = baseline_by_task.find(score.task_id);
    if (it == baseline_by_task.end()) continue;
    auto& [sum, count] = sums[taxonomy.category_of(score.task_id)];
    sum += score.accuracy - it->second;
    ++count;
  }
  std::map<std::string, double> means;
  for (const auto& [category, acc] : sums) {
    means[category] = acc.first / acc.second;
  }
  return means;
}

}  // namespace rw
