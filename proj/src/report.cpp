#include <algorithm>
#include <cstdio>

#include "reasonweaver/evaluation.hpp"

namespace rw {

namespace {

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", fraction * 100.0);
  return buf;
}

std::string fixed1(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", value);
  return buf;
}

std::string csv_cell(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string quoted = "\"";
  for (char c : value) {
    if (c == '"') quoted += "\"\"";
    else quoted.push_back(c);
  }
  quoted.push_back('"');
  return quoted;
}

std::string render_aligned(const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return "";
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
  }
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += "  ";
      out += row[i];
      if (i + 1 < row.size()) out.append(widths[i] - row[i].size(), ' ');
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace

std::string render_per_task_csv(const std::vector<TaskScore>& scores) {
  std::string out = "task_id,method,n_instances,n_correct,accuracy,calls_total\n";
  for (const auto& s : scores) {
    out += csv_cell(s.task_id) + "," + csv_cell(s.method) + "," + std::to_string(s.n_instances) + "," +
           std::to_string(s.n_correct) + "," + fixed1(s.accuracy * 100.0) + "," +
           std::to_string(s.calls_total) + "\n";
  }
  return out;
}

std::string render_per_task_table(const std::vector<TaskScore>& scores) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"task", "method", "correct", "accuracy", "calls"});
  for (const auto& s : scores) {
    rows.push_back({s.task_id, s.method, std::to_string(s.n_correct) + "/" + std::to_string(s.n_instances),
                    percent(s.accuracy), std::to_string(s.calls_total)});
  }
  return render_aligned(rows);
}

namespace {

// task rows x method columns, both in first-seen order
struct Grid {
  std::vector<std::string> tasks;
  std::vector<std::string> methods;
  std::map<std::pair<std::string, std::string>, double> cells;
};

Grid build_grid(const std::vector<TaskScore>& scores) {
  Grid grid;
  for (const auto& s : scores) {
    if (std::find(grid.tasks.begin(), grid.tasks.end(), s.task_id) == grid.tasks.end()) {
      grid.tasks.push_back(s.task_id);
    }
    if (std::find(grid.methods.begin(), grid.methods.end(), s.method) == grid.methods.end()) {
      grid.methods.push_back(s.method);
    }
    grid.cells[{s.task_id, s.method}] = s.accuracy;
  }
  return grid;
}

}  // namespace

std::string render_comparison_csv(const std::vector<TaskScore>& scores) {
  Grid grid = build_grid(scores);
  std::string out = "task";
  for (const auto& method : grid.methods) out += "," + csv_cell(method);
  out.push_back('\n');
  for (const auto& task : grid.tasks) {
    out += csv_cell(task);
    for (const auto& method : grid.methods) {
      auto it = grid.cells.find({task, method});
      out += ",";
      if (it != grid.cells.end()) out += fixed1(it->second * 100.0);
    }
    out.push_back('\n');
  }
  return out;
}

std::string render_comparison_table(const std::vector<TaskScore>& scores) {
  Grid grid = build_grid(scores);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"task"};
  header.insert(header.end(), grid.methods.begin(), grid.methods.end());
  rows.push_back(header);
  for (const auto& task : grid.tasks) {
    std::vector<std::string> row{task};
    for (const auto& method : grid.methods) {
      auto it = grid.cells.find({task, method});
      row.push_back(it == grid.cells.end() ? "-" : percent(it->second));
    }
    rows.push_back(row);
  }
  return render_aligned(rows);
}

std::vector<EfficiencyRow> efficiency_rows(const std::vector<TaskScore>& scores,
                                           const CallAccount& account) {
  std::vector<EfficiencyRow> rows;
  for (const auto& score : scores) {
    EfficiencyRow row;
    row.method = score.method;
    row.accuracy = score.accuracy;
    auto it = account.per_method.find(score.method);
    if (it != account.per_method.end()) {
      row.task_level_calls = it->second.task_level_calls;
      row.total_calls = it->second.total;
      row.calls_per_instance =
          score.n_instances > 0
              ? static_cast<double>(it->second.per_instance_calls) / score.n_instances
              : 0.0;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string render_efficiency_csv(const std::vector<EfficiencyRow>& rows) {
  std::string out = "method,accuracy,calls_per_instance,task_level_calls,total_calls\n";
  for (const auto& row : rows) {
    out += csv_cell(row.method) + "," + fixed1(row.accuracy * 100.0) + "," +
           fixed1(row.calls_per_instance) + "," + std::to_string(row.task_level_calls) + "," +
           std::to_string(row.total_calls) + "\n";
  }
  return out;
}

std::string render_efficiency_table(const std::vector<EfficiencyRow>& rows) {
  std::vector<std::vector<std::string>> table;
  table.push_back({"method", "accuracy", "calls/instance", "task-level", "total"});
  for (const auto& row : rows) {
    table.push_back({row.method, percent(row.accuracy), fixed1(row.calls_per_instance),
                     std::to_string(row.task_level_calls), std::to_string(row.total_calls)});
  }
  return render_aligned(table);
}

}  // namespace rw
