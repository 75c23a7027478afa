#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "reasonweaver/answers.hpp"
#include "reasonweaver/solving.hpp"
#include "reasonweaver/store.hpp"
#include "reasonweaver/task.hpp"

namespace rw {

struct TaskScore {
  std::string task_id;
  std::string method;
  double accuracy = 0.0;  // n_correct / n_instances
  int n_instances = 0;
  int n_correct = 0;
  int calls_total = 0;
};

/// task_id -> category label; unmapped tasks report as "uncategorized".
class CategoryTaxonomy {
 public:
  CategoryTaxonomy() = default;
  explicit CategoryTaxonomy(std::map<std::string, std::string> mapping) : mapping_(std::move(mapping)) {}

  static CategoryTaxonomy load(const std::filesystem::path& path);

  std::string category_of(const std::string& task_id) const;

 private:
  std::map<std::string, std::string> mapping_;
};

struct CallTotals {
  int task_level_calls = 0;
  int per_instance_calls = 0;
  int total = 0;  // task_level + per_instance
};

struct CallAccount {
  std::map<std::string, CallTotals> per_method;
};

/// Exact-match scoring: correct iff normalize_answer(gold) equals the
/// solution's extracted answer; absent answers are incorrect. Solutions must
/// reference known instances and every referenced instance needs a gold
/// target.
TaskScore score_task(const std::vector<Solution>& solutions, const Task& task,
                     const std::string& method_label);

struct BestModule {
  double accuracy = 0.0;
  int module_id = 0;
};

/// Oracle summary over per-module scores: max accuracy, ties to the smallest
/// module id.
BestModule best_of_modules(const std::vector<std::pair<int, TaskScore>>& module_scores);

/// Recomputes per-method call totals from the per-call logs and cross-checks
/// them against the records' self-reported counts (solutions' calls_used and
/// the discovery header). Any disagreement raises an accounting error.
CallAccount account_calls(const std::vector<RunRecord>& records);

/// Per-category mean accuracy delta of `method_scores` over
/// `baseline_scores`, joined by task id. Empty categories are omitted.
std::map<std::string, double> category_breakdown(const std::vector<TaskScore>& method_scores,
                                                 const std::vector<TaskScore>& baseline_scores,
                                                 const CategoryTaxonomy& taxonomy);

// --- report emitters ---------------------------------------------------------

std::string render_per_task_csv(const std::vector<TaskScore>& scores);
std::string render_per_task_table(const std::vector<TaskScore>& scores);

/// Method x task accuracy grid (one row per task, one column per method).
std::string render_comparison_csv(const std::vector<TaskScore>& scores);
std::string render_comparison_table(const std::vector<TaskScore>& scores);

struct EfficiencyRow {
  std::string method;
  double accuracy = 0.0;
  double calls_per_instance = 0.0;
  int task_level_calls = 0;
  int total_calls = 0;
};

/// Accuracy-vs-inference-calls table rows for a set of scored runs.
std::vector<EfficiencyRow> efficiency_rows(const std::vector<TaskScore>& scores,
                                           const CallAccount& account);
std::string render_efficiency_csv(const std::vector<EfficiencyRow>& rows);
std::string render_efficiency_table(const std::vector<EfficiencyRow>& rows);

}  // namespace rw
