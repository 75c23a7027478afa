#include "reasonweaver/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "reasonweaver/errors.hpp"
#include "reasonweaver/evaluation.hpp"
#include "reasonweaver/resources.hpp"
#include "reasonweaver/solving.hpp"
#include "reasonweaver/store.hpp"
#include "reasonweaver/util.hpp"

namespace rw {

namespace {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

BackendKind backend_kind_from_string(const std::string& text) {
  if (text == "live") return BackendKind::live;
  if (text == "replay") return BackendKind::replay;
  if (text == "scripted") return BackendKind::scripted;
  fail(ErrorKind::config, "unknown backend kind: " + text);
}

}  // namespace

void RunConfig::validate() const {
  if (k < 1) fail(ErrorKind::config, "k must be >= 1");
  if (parallelism < 1) fail(ErrorKind::config, "parallelism must be >= 1");
  if (max_attempts < 1) fail(ErrorKind::config, "max_attempts must be >= 1");
  if (num_examples < 1) fail(ErrorKind::config, "num_examples must be >= 1");
  auto check_exists = [](const std::filesystem::path& path, const char* what) {
    if (!path.empty() && !std::filesystem::exists(path)) {
      fail(ErrorKind::config, std::string(what) + " does not exist: " + path.string());
    }
  };
  check_exists(modules_path, "modules file");
  check_exists(templates_dir, "templates directory");
  check_exists(demo_path, "demo structure file");
}

void RunConfig::apply_config_file(const std::filesystem::path& path) {
  const auto lines = split_lines(read_file(path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string line = trim(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::config, path.string() + " line " + std::to_string(i + 1) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.rfind("backend.", 0) == 0) {
      std::string rest = key.substr(8);
      std::size_t dot = rest.find('.');
      if (dot == std::string::npos) {
        fail(ErrorKind::config, path.string() + ": expected backend.<name>.<field>, got " + key);
      }
      std::string name = rest.substr(0, dot);
      std::string field = rest.substr(dot + 1);
      BackendDescriptor& d = backends[name];
      if (d.backend_id.empty()) d.backend_id = name;
      if (field == "kind") d.kind = backend_kind_from_string(value);
      else if (field == "endpoint") d.endpoint = value;
      else if (field == "model") d.model = value;
      else if (field == "api_key_env") d.api_key_env = value;
      else if (field == "fixture") d.fixture_path = value;
      else if (field == "rate_limit_rpm") d.rate_limit_rpm = std::stoi(value);
      else if (field == "max_attempts") d.max_attempts = std::stoi(value);
      else if (field == "retry_initial_ms") d.retry_initial_ms = std::stoi(value);
      else fail(ErrorKind::config, path.string() + ": unknown backend field " + field);
      continue;
    }
    if (key == "modules") modules_path = value;
    else if (key == "templates_dir") templates_dir = value;
    else if (key == "demo") demo_path = value;
    else if (key == "cache_root") cache_root = value;
    else if (key == "k") k = std::stoi(value);
    else if (key == "parallelism") parallelism = std::stoi(value);
    else if (key == "max_attempts") max_attempts = std::stoi(value);
    else if (key == "num_examples") num_examples = std::stoi(value);
    else if (key == "greedy_temperature") greedy_temperature = std::stod(value);
    else if (key == "sampling_temperature") sampling_temperature = std::stod(value);
    else if (key == "max_output") max_output = std::stoi(value);
    else if (key == "canonical_timestamps") canonical_timestamps = (value == "true" || value == "1");
    else fail(ErrorKind::config, path.string() + ": unknown key " + key);
  }
}

BackendDescriptor RunConfig::resolve_backend(const std::string& spec) const {
  if (spec.rfind("scripted:", 0) == 0 || spec.rfind("replay:", 0) == 0) {
    return parse_backend_spec(spec);
  }
  auto it = backends.find(spec);
  if (it == backends.end()) {
    fail(ErrorKind::usage, "backend " + spec + " is not configured; use scripted:<name>, "
                               "replay:<fixture>, or define backend." + spec + ".* in the config file");
  }
  return it->second;
}

namespace {

// ---------------------------------------------------------------------------
// Shared pipeline plumbing
// ---------------------------------------------------------------------------

/// Extends the descriptor specs with "record:<sink>:<inner spec>", which
/// wraps the inner backend and persists every call as a replayable fixture.
std::shared_ptr<Backend> open_backend(const RunConfig& config, const std::string& spec) {
  if (spec.rfind("record:", 0) == 0) {
    std::string rest = spec.substr(7);
    std::size_t colon = rest.find(':');
    if (colon == std::string::npos) {
      fail(ErrorKind::usage, "record backend spec is record:<sink>:<inner spec>");
    }
    return std::make_shared<RecordingBackend>(open_backend(config, rest.substr(colon + 1)),
                                              rest.substr(0, colon));
  }
  return make_backend(config.resolve_backend(spec));
}

struct Toolkit {
  ModuleCatalog catalog;
  MetaPromptSet prompts;
  DemoStructure demo;
  SolverConfig solver;
  DiscoveryConfig discovery;
};

Toolkit load_toolkit(const RunConfig& config) {
  Toolkit kit;
  kit.catalog = config.modules_path.empty() ? default_catalog() : load_catalog_file(config.modules_path);
  kit.prompts = config.templates_dir.empty() ? default_prompts()
                                             : MetaPromptSet::load_dir(config.templates_dir);
  kit.demo = config.demo_path.empty() ? default_demo() : DemoStructure::load(config.demo_path);
  kit.solver.greedy_temperature = config.greedy_temperature;
  kit.solver.sampling_temperature = config.sampling_temperature;
  kit.solver.max_output = config.max_output;
  kit.solver.plan_and_solve_text = default_plan_and_solve_text();
  kit.discovery.num_examples = config.num_examples;
  kit.discovery.max_attempts = config.max_attempts;
  kit.discovery.max_output = config.max_output;
  kit.discovery.temperature = config.greedy_temperature;
  kit.discovery.canonical_timestamps = config.canonical_timestamps;
  kit.discovery.random_examples = config.random_examples;
  kit.discovery.seed = config.seed;
  return kit;
}

StructureCacheKey cache_key_for(const Toolkit& kit, const std::string& task_id,
                                const std::string& backend_id, PipelineMode mode) {
  return StructureCacheKey{task_id, backend_id, kit.catalog.fingerprint(), mode,
                           kit.prompts.fingerprint()};
}

struct CachedDiscovery {
  DiscoveryRecord record;
  bool fresh = false;  // true when the stages actually ran in this process
};

/// Discovery with the task-level cache: a hit performs zero backend calls.
CachedDiscovery discover_cached(StructureCache& cache, Backend& backend, const Task& task,
                                const Toolkit& kit, PipelineMode mode, CallLog* log) {
  StructureCacheKey key = cache_key_for(kit, task.task_id, backend.id(), mode);
  if (auto cached = cache.get(key)) return {*cached, false};
  DiscoveryConfig config = kit.discovery;
  config.mode = mode;
  DiscoveryRecord record = discover(backend, task, kit.catalog, kit.demo, kit.prompts, config, log);
  cache.put(key, record);
  return {std::move(record), true};
}

std::vector<Solution> order_by_task(std::vector<Solution> solutions, const Task& task) {
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < task.instances.size(); ++i) {
    position[task.instances[i].instance_id] = i;
  }
  std::stable_sort(solutions.begin(), solutions.end(), [&](const Solution& a, const Solution& b) {
    auto pa = position.count(a.instance_id) ? position[a.instance_id] : position.size();
    auto pb = position.count(b.instance_id) ? position[b.instance_id] : position.size();
    if (pa != pb) return pa < pb;
    return to_string(a.method) < to_string(b.method);
  });
  return solutions;
}

struct SolveOutcome {
  RunRecord record;
  std::vector<std::pair<int, std::string>> per_module_errors;
};

/// Runs a method over every task instance, honoring the parallelism bound.
SolveOutcome run_method(Backend& backend, const Task& task, Method method, const Toolkit& kit,
                        const RunConfig& config, StructureCache& cache, bool instance_level,
                        const std::optional<ReasoningStructure>& fixed_structure) {
  CallLog log;
  RunRecord record;
  record.task_id = task.task_id;
  record.backend_id = backend.id();
  record.method = method;
  record.started_at = timestamp_utc(config.canonical_timestamps);

  std::optional<ReasoningStructure> task_structure = fixed_structure;
  if (method.kind == MethodKind::self_discover && !task_structure && !instance_level) {
    CachedDiscovery discovery = discover_cached(cache, backend, task, kit, PipelineMode::SAI, &log);
    if (!discovery.record.structure) {
      fail(ErrorKind::config, "discovery record for " + task.task_id + " carries no structure");
    }
    task_structure = discovery.record.structure;
    // A cache hit cost this run nothing; only freshly-run stages are charged.
    if (discovery.fresh) {
      record.discovery_primary_calls = discovery.record.call_count;
      record.discovery_retry_calls = discovery.record.retry_calls;
    }
  }

  std::vector<std::vector<Solution>> per_instance(task.instances.size());
  std::vector<std::vector<std::pair<int, std::string>>> module_errors(task.instances.size());

  run_parallel(task.instances.size(), config.parallelism, [&](std::size_t i) {
    const Instance& instance = task.instances[i];
    switch (method.kind) {
      case MethodKind::self_discover: {
        ReasoningStructure structure;
        if (instance_level) {
          DiscoveryConfig dconf = kit.discovery;
          structure = discover_instance(backend, instance, kit.demo, kit.prompts, dconf, &log);
        } else {
          structure = *task_structure;
        }
        per_instance[i].push_back(solve_with_structure(backend, structure, instance, kit.solver, &log));
        break;
      }
      case MethodKind::direct:
      case MethodKind::cot:
      case MethodKind::plan_and_solve:
        per_instance[i].push_back(solve_baseline(backend, method.kind, instance, kit.solver, &log));
        break;
      case MethodKind::per_module: {
        PerModuleOutcome outcome = solve_per_module(backend, kit.catalog, instance, kit.solver, &log);
        per_instance[i] = std::move(outcome.solutions);
        module_errors[i] = std::move(outcome.errors);
        break;
      }
      case MethodKind::self_consistency:
        per_instance[i].push_back(
            solve_self_consistency(backend, instance, method.param, kit.solver, &log));
        break;
    }
  });

  SolveOutcome outcome;
  for (auto& batch : per_instance) {
    for (auto& solution : batch) record.solutions.push_back(std::move(solution));
  }
  for (auto& batch : module_errors) {
    for (auto& error : batch) outcome.per_module_errors.push_back(std::move(error));
  }
  record.solutions = order_by_task(std::move(record.solutions), task);
  record.call_log = log.snapshot();
  record.finished_at = timestamp_utc(config.canonical_timestamps);
  outcome.record = std::move(record);
  return outcome;
}

// ---------------------------------------------------------------------------
// Scoring helpers shared by eval / compare / report
// ---------------------------------------------------------------------------

std::vector<TaskScore> score_run(const RunRecord& record, const Task& task) {
  std::vector<TaskScore> scores;
  if (record.method.kind == MethodKind::per_module) {
    std::map<int, std::vector<Solution>> by_module;
    for (const auto& solution : record.solutions) {
      by_module[solution.method.param].push_back(solution);
    }
    std::vector<std::pair<int, TaskScore>> module_scores;
    for (const auto& [module_id, solutions] : by_module) {
      TaskScore score = score_task(solutions, task, "per_module:" + std::to_string(module_id));
      module_scores.emplace_back(module_id, score);
      scores.push_back(std::move(score));
    }

    // Majority voting of each RM: per instance, vote across module answers.
    std::map<std::string, std::vector<std::optional<std::string>>> answers_by_instance;
    for (const auto& solution : record.solutions) {
      answers_by_instance[solution.instance_id].push_back(solution.answer);
    }
    std::vector<Solution> voted;
    for (const auto& instance : task.instances) {
      auto it = answers_by_instance.find(instance.instance_id);
      if (it == answers_by_instance.end()) continue;
      Solution vote;
      vote.instance_id = instance.instance_id;
      vote.method = record.method;
      vote.calls_used = static_cast<int>(it->second.size());
      try {
        vote.answer = majority_vote(it->second).winner;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::empty_vote) throw;
      }
      voted.push_back(std::move(vote));
    }
    scores.push_back(score_task(voted, task, "rm_majority_vote"));

    BestModule best = best_of_modules(module_scores);
    TaskScore oracle;
    oracle.task_id = task.task_id;
    oracle.method = "best_of_rm";
    oracle.accuracy = best.accuracy;
    oracle.n_instances = static_cast<int>(task.instances.size());
    oracle.n_correct = static_cast<int>(best.accuracy * oracle.n_instances + 0.5);
    scores.push_back(oracle);
    return scores;
  }
  scores.push_back(score_task(record.solutions, task, to_string(record.method)));
  return scores;
}

Task find_task(const std::vector<Task>& tasks, const std::string& task_id) {
  for (const auto& task : tasks) {
    if (task.task_id == task_id) return task;
  }
  fail(ErrorKind::usage, "no task file supplied for task " + task_id);
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct CommonArgs {
  std::string config_file;
  std::string modules;
  std::string templates_dir;
  std::string demo;
  std::string cache_root;
  int parallelism = 0;
  int num_examples = 0;
  int max_attempts = 0;
  bool canonical = false;
  bool random_examples = false;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

RunConfig build_config(const CommonArgs& args) {
  RunConfig config;
  if (!args.config_file.empty()) config.apply_config_file(args.config_file);
  if (!args.modules.empty()) config.modules_path = args.modules;
  if (!args.templates_dir.empty()) config.templates_dir = args.templates_dir;
  if (!args.demo.empty()) config.demo_path = args.demo;
  if (!args.cache_root.empty()) config.cache_root = args.cache_root;
  if (args.parallelism > 0) config.parallelism = args.parallelism;
  if (args.num_examples > 0) config.num_examples = args.num_examples;
  if (args.max_attempts > 0) config.max_attempts = args.max_attempts;
  if (args.canonical) config.canonical_timestamps = true;
  if (args.random_examples) config.random_examples = true;
  if (args.seed_given) config.seed = args.seed;
  config.validate();
  return config;
}

int cmd_discover(const RunConfig& config, const std::string& task_path, const std::string& mode_text,
                 const std::string& backend_spec, bool instance_level, bool dry_run,
                 const std::string& out_path, std::ostream& out) {
  Toolkit kit = load_toolkit(config);
  Task task = load_task(task_path);
  PipelineMode mode = pipeline_mode_from_string(mode_text);
  DiscoveryConfig dconf = kit.discovery;
  dconf.mode = mode;

  if (dry_run) {
    const auto examples = unlabeled_examples(task, dconf);
    out << "--- SELECT prompt ---\n" << assemble_select_prompt(kit.prompts, kit.catalog, examples);
    if (mode != PipelineMode::S) {
      out << "--- ADAPT prompt (selection pending) ---\n"
          << assemble_adapt_prompt(kit.prompts, kit.catalog.subset({kit.catalog.modules().front().id}),
                                   examples);
    }
    if (mode == PipelineMode::SAI) {
      AdaptedDescriptions placeholder;
      placeholder.entries = {"<adapted descriptions pending>"};
      out << "--- IMPLEMENT prompt (adaptation pending) ---\n"
          << assemble_implement_prompt(kit.prompts, kit.demo, placeholder, examples);
    }
    if (instance_level) {
      for (const auto& instance : task.instances) {
        out << "--- instance prompt " << instance.instance_id << " ---\n"
            << assemble_instance_prompt(kit.prompts, kit.demo, instance);
      }
    }
    out << "(dry run: no backend calls were made)\n";
    return kExitOk;
  }

  auto backend = open_backend(config, backend_spec);
  StructureCache cache(config.cache_root);

  if (instance_level) {
    if (out_path.empty()) fail(ErrorKind::usage, "--out <dir> is required with --instance-level");
    std::filesystem::create_directories(out_path);
    CallLog log;
    for (const auto& instance : task.instances) {
      ReasoningStructure structure =
          discover_instance(*backend, instance, kit.demo, kit.prompts, dconf, &log);
      StructureFile file;
      file.task_id = task.task_id + ":" + instance.instance_id;
      file.backend_id = backend->id();
      file.discovered_by = backend->id();
      file.catalog_fingerprint = kit.catalog.fingerprint();
      file.template_fingerprint = kit.prompts.fingerprint();
      file.mode = PipelineMode::SAI;
      file.timestamp = timestamp_utc(config.canonical_timestamps);
      file.body = serialize_structure(structure);
      write_file_atomic(std::filesystem::path(out_path) / (instance.instance_id + ".structure"),
                        render_structure_file(file));
    }
    out << "wrote " << task.instances.size() << " instance structures to " << out_path << " ("
        << log.size() << " calls)\n";
    return kExitOk;
  }

  CallLog log;
  CachedDiscovery discovery = discover_cached(cache, *backend, task, kit, mode, &log);
  const DiscoveryRecord& record = discovery.record;
  StructureCacheKey key = cache_key_for(kit, task.task_id, backend->id(), mode);
  out << "mode " << to_string(record.mode) << ", " << record.call_count << " primary calls"
      << (discovery.fresh ? "" : " (cached, no new calls)") << ", " << record.retry_calls
      << " retries; selected modules:";
  for (int id : record.selected.module_ids) out << " " << id;
  out << "\ncache entry " << cache.entry_path(key).string() << "\n";
  if (record.structure) {
    if (!out_path.empty()) {
      std::filesystem::copy_file(cache.export_structure(key), out_path,
                                 std::filesystem::copy_options::overwrite_existing);
      out << "structure exported to " << out_path << "\n";
    }
  } else if (!out_path.empty()) {
    fail(ErrorKind::usage, "mode " + mode_text + " produces no structure to export");
  }
  return kExitOk;
}

int cmd_solve(const RunConfig& config, const std::string& task_path, const std::string& method_text,
              const std::string& backend_spec, const std::string& structure_path, int k_override,
              bool instance_level, bool dry_run, const std::string& out_dir, std::ostream& out) {
  Toolkit kit = load_toolkit(config);
  Task task = load_task(task_path);
  std::string method_name = method_text;
  if (method_name == "self_consistency") method_name += ":" + std::to_string(config.k);
  if (method_name == "per_module") method_name += ":0";  // param 0 = every catalog module
  Method method = method_from_string(method_name);
  if (method.kind == MethodKind::self_consistency && k_override > 0) method.param = k_override;
  if (method.kind == MethodKind::self_consistency && method.param < 1) {
    fail(ErrorKind::usage, "self_consistency needs k >= 1");
  }

  if (!structure_path.empty() && instance_level) {
    fail(ErrorKind::usage, "--structure and --instance-level are mutually exclusive");
  }
  std::optional<ReasoningStructure> fixed_structure;
  if (!structure_path.empty()) {
    StructureFile file = parse_structure_file(read_file(structure_path), structure_path);
    fixed_structure = extract_structure(file.body);
  }

  if (dry_run) {
    for (const auto& instance : task.instances) {
      out << "--- prompt for " << instance.instance_id << " ---\n";
      switch (method.kind) {
        case MethodKind::self_discover:
          if (fixed_structure) {
            out << build_structure_prompt(*fixed_structure, instance);
          } else {
            out << "(structure pending discovery)\n";
          }
          break;
        case MethodKind::per_module:
          for (const auto& module : kit.catalog.modules()) {
            out << build_module_prompt(module, instance);
          }
          break;
        case MethodKind::self_consistency:
          out << build_cot_prompt(instance);
          break;
        default:
          out << build_baseline_prompt(method.kind, instance, kit.solver);
      }
    }
    out << "(dry run: no backend calls were made)\n";
    return kExitOk;
  }

  if (out_dir.empty()) fail(ErrorKind::usage, "--out <run-dir> is required");
  auto backend = open_backend(config, backend_spec);
  StructureCache cache(config.cache_root);

  SolveOutcome outcome =
      run_method(*backend, task, method, kit, config, cache, instance_level, fixed_structure);
  outcome.record.run_id = std::filesystem::path(out_dir).filename().string();
  save_run_record(out_dir, outcome.record);

  int total_calls = static_cast<int>(outcome.record.call_log.size());
  out << "run " << outcome.record.run_id << ": " << outcome.record.solutions.size() << " solutions, "
      << total_calls << " calls logged\n";
  for (const auto& [module_id, message] : outcome.per_module_errors) {
    out << "module " << module_id << " failed: " << message << "\n";
  }
  return kExitOk;
}

int cmd_eval(const RunConfig& config, const std::string& run_dir, const std::string& task_path,
             const std::string& out_path, std::ostream& out) {
  (void)config;
  RunRecord record = load_run_record(run_dir);
  Task task = load_task(task_path);
  if (task.task_id != record.task_id) {
    fail(ErrorKind::usage, "run is for task " + record.task_id + ", got " + task.task_id);
  }
  account_calls({record});  // integrity gate before reporting
  std::vector<TaskScore> scores = score_run(record, task);
  std::string csv = render_per_task_csv(scores);
  std::filesystem::path report_path =
      out_path.empty() ? std::filesystem::path(run_dir) / "report.csv" : std::filesystem::path(out_path);
  write_file_atomic(report_path, csv);
  out << render_per_task_table(scores);
  out << "report written to " << report_path.string() << "\n";
  return kExitOk;
}

std::vector<Task> load_tasks(const std::vector<std::string>& task_paths) {
  std::vector<Task> tasks;
  for (const auto& path : task_paths) tasks.push_back(load_task(path));
  return tasks;
}

int cmd_compare(const std::vector<std::string>& run_dirs, const std::vector<std::string>& task_paths,
                const std::string& baseline_method, const std::string& out_path, std::ostream& out) {
  std::vector<Task> tasks = load_tasks(task_paths);
  std::vector<TaskScore> scores;
  for (const auto& dir : run_dirs) {
    RunRecord record = load_run_record(dir);
    Task task = find_task(tasks, record.task_id);
    for (auto& score : score_run(record, task)) scores.push_back(std::move(score));
  }
  out << render_comparison_table(scores);
  if (!out_path.empty()) {
    write_file_atomic(out_path, render_comparison_csv(scores));
    out << "grid written to " << out_path << "\n";
  }

  // Per-category mean accuracy deltas against a baseline method, when one is
  // available in the grid.
  std::string baseline = baseline_method;
  if (baseline.empty() && !scores.empty()) baseline = scores.front().method;
  std::vector<TaskScore> baseline_scores;
  for (const auto& score : scores) {
    if (score.method == baseline) baseline_scores.push_back(score);
  }
  if (!baseline_scores.empty()) {
    // Task metadata categories fill gaps in the bundled taxonomy.
    CategoryTaxonomy bundled = default_taxonomy();
    std::map<std::string, std::string> mapping;
    for (const auto& task : tasks) {
      std::string category = bundled.category_of(task.task_id);
      if (category == "uncategorized" && task.category) category = *task.category;
      mapping[task.task_id] = category;
    }
    CategoryTaxonomy taxonomy(std::move(mapping));
    std::set<std::string> methods;
    for (const auto& score : scores) methods.insert(score.method);
    for (const auto& method : methods) {
      if (method == baseline) continue;
      std::vector<TaskScore> method_scores;
      for (const auto& score : scores) {
        if (score.method == method) method_scores.push_back(score);
      }
      auto deltas = category_breakdown(method_scores, baseline_scores, taxonomy);
      for (const auto& [category, delta] : deltas) {
        char line[160];
        std::snprintf(line, sizeof(line), "%s vs %s [%s]: %+.1f\n", method.c_str(), baseline.c_str(),
                      category.c_str(), delta * 100.0);
        out << line;
      }
    }
  }
  return kExitOk;
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::vector<std::string>& task_paths,
               const std::string& out_path, std::ostream& out) {
  std::vector<Task> tasks = load_tasks(task_paths);
  std::vector<TaskScore> scores;
  std::vector<RunRecord> records;
  for (const auto& dir : run_dirs) {
    RunRecord record = load_run_record(dir);
    Task task = find_task(tasks, record.task_id);
    // Efficiency rows track whole methods, so per-module runs contribute
    // their aggregated vote row only.
    for (auto& score : score_run(record, task)) {
      if (record.method.kind == MethodKind::per_module && score.method != "rm_majority_vote") continue;
      if (record.method.kind == MethodKind::per_module) score.method = to_string(record.method);
      scores.push_back(std::move(score));
    }
    records.push_back(std::move(record));
  }
  CallAccount account = account_calls(records);
  auto rows = efficiency_rows(scores, account);
  out << render_efficiency_table(rows);
  if (!out_path.empty()) {
    write_file_atomic(out_path, render_efficiency_csv(rows));
    out << "table written to " << out_path << "\n";
  }
  return kExitOk;
}

int cmd_transfer(const RunConfig& config, const std::string& structure_path,
                 const std::string& backend_spec, const std::string& task_path,
                 const std::string& out_dir, std::ostream& out) {
  Toolkit kit = load_toolkit(config);
  auto backend = open_backend(config, backend_spec);
  StructureCache cache(config.cache_root);
  StructureCacheKey key = cache.import_structure(structure_path, backend->id());
  out << "imported structure for backend " << backend->id() << " under key " << key.hash() << "\n";

  Task task = load_task(task_path);
  auto cached = cache.get(key);
  if (!cached || !cached->structure) fail(ErrorKind::provenance, "imported entry carries no structure");

  SolveOutcome outcome = run_method(*backend, task, Method::self_discover(), kit, config, cache,
                                    /*instance_level=*/false, cached->structure);
  outcome.record.run_id = std::filesystem::path(out_dir).filename().string();
  save_run_record(out_dir, outcome.record);
  out << "run " << outcome.record.run_id << ": " << outcome.record.solutions.size() << " solutions, "
      << outcome.record.call_log.size() << " calls charged to " << backend->id() << "\n";
  return kExitOk;
}

int cmd_ingest(const std::string& source_dir, const std::string& out_dir, int sample_n,
               std::uint64_t seed, std::ostream& out) {
  const std::string target = out_dir.empty() ? source_dir : out_dir;
  int written = ingest_bbh_dir(source_dir, target);
  if (sample_n > 0) {
    for (const auto& entry : std::filesystem::directory_iterator(target)) {
      if (entry.path().extension() != ".jsonl") continue;
      Task task = load_task(entry.path());
      if (task.instances.size() <= static_cast<std::size_t>(sample_n)) continue;
      write_file_atomic(entry.path(), save_task(subsample_task(task, sample_n, seed)));
    }
    out << "kept a seeded sample of " << sample_n << " instances per task (seed " << seed << ")\n";
  }
  out << "converted " << written << " task files\n";
  return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"reasonweaver: compose task-intrinsic reasoning structures and evaluate prompting "
               "strategies"};
  app.require_subcommand(1);
  app.footer("Config precedence: flags > config file > environment > defaults.\n"
             "Exit codes: 0 success, 1 pipeline failure, 2 usage, 3 fixture miss.");

  CommonArgs common;
  app.add_option("--config", common.config_file, "key = value configuration file");
  app.add_option("--modules", common.modules, "module catalog (JSON-lines), overrides the bundled one");
  app.add_option("--templates", common.templates_dir, "meta-prompt template directory");
  app.add_option("--demo", common.demo, "demonstration structure file");
  app.add_option("--cache-root", common.cache_root, "directory holding structures/ (default .)");
  app.add_option("--parallelism", common.parallelism, "max concurrent instances");
  app.add_option("--num-examples", common.num_examples, "unlabeled examples per meta-prompt");
  app.add_option("--max-attempts", common.max_attempts, "per-stage parse-retry budget");
  app.add_flag("--canonical-timestamps", common.canonical, "freeze timestamps for reproducible records");
  app.add_flag("--random-examples", common.random_examples,
               "sample discovery examples with --seed instead of taking the first N");
  auto* seed_opt = app.add_option("--seed", common.seed, "seed for --random-examples and sampling");

  std::string task_path, mode_text = "SAI", backend_spec, out_path, method_text, structure_path;
  std::string source_dir;
  std::vector<std::string> run_dirs, task_paths;
  int k_override = 0;
  bool instance_level = false, dry_run = false;

  auto* discover_cmd = app.add_subcommand("discover", "compose a reasoning structure for a task");
  discover_cmd->add_option("--task", task_path, "task file")->required();
  discover_cmd->add_option("--mode", mode_text, "S, SA, or SAI (default SAI)");
  discover_cmd->add_option("--backend", backend_spec, "backend id or spec")->required();
  discover_cmd->add_flag("--instance-level", instance_level, "one structure per instance");
  discover_cmd->add_flag("--dry-run", dry_run, "print assembled prompts, make no calls");
  discover_cmd->add_option("--out", out_path, "export the structure file here");

  auto* solve_cmd = app.add_subcommand("solve", "solve every task instance with a method");
  solve_cmd->add_option("--task", task_path, "task file")->required();
  solve_cmd
      ->add_option("--method", method_text,
                   "self_discover | direct | cot | plan_and_solve | per_module | self_consistency")
      ->required();
  solve_cmd->add_option("--backend", backend_spec, "backend id or spec")->required();
  solve_cmd->add_option("--structure", structure_path, "use this structure file (skip discovery)");
  solve_cmd->add_option("--k", k_override, "samples for self_consistency");
  solve_cmd->add_flag("--instance-level", instance_level, "discover a structure per instance");
  solve_cmd->add_flag("--dry-run", dry_run, "print assembled prompts, make no calls");
  solve_cmd->add_option("--out", out_path, "run record directory");

  auto* eval_cmd = app.add_subcommand("eval", "score a run against gold targets");
  eval_cmd->add_option("--run", run_dirs, "run record directory")->required();
  eval_cmd->add_option("--task", task_path, "task file with gold targets")->required();
  eval_cmd->add_option("--out", out_path, "report CSV path (default <run>/report.csv)");

  auto* compare_cmd = app.add_subcommand("compare", "method x task accuracy grid");
  compare_cmd->add_option("--run", run_dirs, "run record directories")->required();
  compare_cmd->add_option("--task", task_paths, "task files with gold targets")->required();
  compare_cmd->add_option("--out", out_path, "grid CSV path");
  std::string baseline_method;
  compare_cmd->add_option("--baseline", baseline_method,
                          "method for category deltas (default: first method in the grid)");

  auto* report_cmd = app.add_subcommand("report", "accuracy vs inference-call table");
  report_cmd->add_option("--run", run_dirs, "run record directories")->required();
  report_cmd->add_option("--task", task_paths, "task files with gold targets")->required();
  report_cmd->add_option("--out", out_path, "table CSV path");

  auto* transfer_cmd = app.add_subcommand("transfer", "apply a discovered structure under another backend");
  transfer_cmd->add_option("--structure", structure_path, "exported structure file")->required();
  transfer_cmd->add_option("--backend", backend_spec, "target backend")->required();
  transfer_cmd->add_option("--task", task_path, "task file")->required();
  transfer_cmd->add_option("--out", out_path, "run record directory")->required();

  auto* ingest_cmd = app.add_subcommand("ingest-bbh", "convert BBH-style JSON task files");
  ingest_cmd->add_option("dir", source_dir, "directory of BBH task JSON files")->required();
  ingest_cmd->add_option("--out", out_path, "output directory (default: in place)");
  int sample_n = 0;
  ingest_cmd->add_option("--sample", sample_n, "keep a seeded subsample of N instances per task");

  try {
    std::vector<std::string> args(argv.rbegin(), argv.rend());
    app.parse(args);
    common.seed_given = seed_opt->count() > 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    RunConfig config = build_config(common);
    if (discover_cmd->parsed()) {
      return cmd_discover(config, task_path, mode_text, backend_spec, instance_level, dry_run, out_path,
                          out);
    }
    if (solve_cmd->parsed()) {
      return cmd_solve(config, task_path, method_text, backend_spec, structure_path, k_override,
                       instance_level, dry_run, out_path, out);
    }
    if (eval_cmd->parsed()) return cmd_eval(config, run_dirs.at(0), task_path, out_path, out);
    if (compare_cmd->parsed()) {
      return cmd_compare(run_dirs, task_paths, baseline_method, out_path, out);
    }
    if (report_cmd->parsed()) return cmd_report(run_dirs, task_paths, out_path, out);
    if (transfer_cmd->parsed()) {
      return cmd_transfer(config, structure_path, backend_spec, task_path, out_path, out);
    }
    if (ingest_cmd->parsed()) return cmd_ingest(source_dir, out_path, sample_n, config.seed, out);
    err << "usage error: no command\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::usage: return kExitUsage;
      case ErrorKind::fixture_miss: return kExitFixtureMiss;
      default: return kExitPipeline;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitPipeline;
  }
}

}  // namespace rw
