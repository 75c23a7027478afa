#include "reasonweaver/solving.hpp"

#include "reasonweaver/answers.hpp"
#include "reasonweaver/errors.hpp"

namespace rw {

std::string to_string(const Method& method) {
  switch (method.kind) {
    case MethodKind::self_discover: return "self_discover";
    case MethodKind::direct: return "direct";
    case MethodKind::cot: return "cot";
    case MethodKind::plan_and_solve: return "plan_and_solve";
    case MethodKind::per_module: return "per_module:" + std::to_string(method.param);
    case MethodKind::self_consistency: return "self_consistency:" + std::to_string(method.param);
  }
  return "unknown";
}

Method method_from_string(const std::string& text) {
  if (text == "self_discover") return Method::self_discover();
  if (text == "direct") return Method::direct();
  if (text == "cot") return Method::cot();
  if (text == "plan_and_solve") return Method::plan_and_solve();
  auto parse_param = [&](const std::string& prefix) -> std::optional<int> {
    if (text.rfind(prefix, 0) != 0) return std::nullopt;
    try {
      return std::stoi(text.substr(prefix.size()));
    } catch (...) {
      fail(ErrorKind::usage, "bad method parameter in: " + text);
    }
  };
  if (auto id = parse_param("per_module:")) return Method::per_module(*id);
  if (auto k = parse_param("self_consistency:")) return Method::self_consistency(*k);
  fail(ErrorKind::usage, "unknown method: " + text);
}

// ---------------------------------------------------------------------------
// Prompt text
// ---------------------------------------------------------------------------

const std::string& stage2_preamble() {
  static const std::string text =
      "Follow the step-by-step reasoning plan in JSON to correctly solve the task. "
      "Fill in the values following the keys by reasoning specifically about the task given. "
      "Do not simply rephrase the keys.";
  return text;
}

const std::string& sentinel_instruction() {
  static const std::string text =
      "End the answer with \"Thus, the final answer is [X]\", where X is the final answer.";
  return text;
}

const std::string& cot_trigger() {
  static const std::string text = "Let's think step by step.";
  return text;
}

namespace {

const char* kDefaultPlanAndSolve =
    "Let's first understand the problem and devise a plan to solve the problem. "
    "Then, let's carry out the plan to solve the problem step by step.";

std::string task_block(const Instance& instance) {
  return "Task:\n" + instance.input + "\n";
}

}  // namespace

std::string build_structure_prompt(const ReasoningStructure& structure, const Instance& instance) {
  return stage2_preamble() + "\n\nReasoning plan:\n" + serialize_structure(structure) + "\n" +
         task_block(instance) + "\n" + sentinel_instruction() + "\n";
}

std::string build_direct_prompt(const Instance& instance) {
  return task_block(instance) + "\n" + sentinel_instruction() + "\n";
}

std::string build_cot_prompt(const Instance& instance) {
  return task_block(instance) + "\n" + cot_trigger() + "\n\n" + sentinel_instruction() + "\n";
}

std::string build_plan_and_solve_prompt(const Instance& instance, const SolverConfig& config) {
  const std::string& wording =
      config.plan_and_solve_text.empty() ? kDefaultPlanAndSolve : config.plan_and_solve_text;
  return task_block(instance) + "\n" + wording + "\n\n" + sentinel_instruction() + "\n";
}

std::string build_module_prompt(const ReasoningModule& module, const Instance& instance) {
  return module.description + "\n\n" + task_block(instance) + "\n" + sentinel_instruction() + "\n";
}

std::string build_baseline_prompt(MethodKind kind, const Instance& instance, const SolverConfig& config) {
  switch (kind) {
    case MethodKind::direct: return build_direct_prompt(instance);
    case MethodKind::cot: return build_cot_prompt(instance);
    case MethodKind::plan_and_solve: return build_plan_and_solve_prompt(instance, config);
    default: fail(ErrorKind::usage, "not a baseline method: " + to_string(Method{kind, 0}));
  }
}

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------

namespace {

Solution run_single(Backend& backend, const std::string& prompt, const Instance& instance,
                    Method method, Purpose purpose, double temperature, int sample_index,
                    const SolverConfig& config, CallLog* log) {
  CompletionRequest request{prompt, temperature, config.max_output, sample_index, purpose};
  CompletionResult result = backend.complete(request);
  if (log) {
    log->append({purpose, instance.instance_id, sample_index, request.hash(), result.cached, false});
  }
  Solution solution;
  solution.instance_id = instance.instance_id;
  solution.method = method;
  solution.raw_output = result.text;
  solution.answer = extract_final_answer(result.text, config.fallback_final_line);
  solution.calls_used = 1;
  return solution;
}

}  // namespace

Solution solve_with_structure(Backend& backend, const ReasoningStructure& structure,
                              const Instance& instance, const SolverConfig& config, CallLog* log) {
  auto report = validate_structure(structure);
  if (!report.valid) {
    fail(ErrorKind::validation, "structure invalid at " + report.issues[0].path + ": " +
                                    report.issues[0].message);
  }
  return run_single(backend, build_structure_prompt(structure, instance), instance,
                    Method::self_discover(), Purpose::solve, config.greedy_temperature, 0, config, log);
}

Solution solve_baseline(Backend& backend, MethodKind kind, const Instance& instance,
                        const SolverConfig& config, CallLog* log) {
  return run_single(backend, build_baseline_prompt(kind, instance, config), instance, Method{kind, 0},
                    Purpose::baseline, config.greedy_temperature, 0, config, log);
}

PerModuleOutcome solve_per_module(Backend& backend, const ModuleCatalog& catalog,
                                  const Instance& instance, const SolverConfig& config, CallLog* log) {
  if (catalog.empty()) fail(ErrorKind::empty_input, "per-module solving needs a non-empty catalog");
  PerModuleOutcome outcome;
  for (const auto& module : catalog.modules()) {
    try {
      outcome.solutions.push_back(run_single(backend, build_module_prompt(module, instance), instance,
                                             Method::per_module(module.id), Purpose::baseline,
                                             config.greedy_temperature, 0, config, log));
    } catch (const Error& e) {
      outcome.errors.emplace_back(module.id, e.what());
    }
  }
  return outcome;
}

Solution solve_self_consistency(Backend& backend, const Instance& instance, int k,
                                const SolverConfig& config, CallLog* log) {
  if (k < 1) fail(ErrorKind::config, "self-consistency needs k >= 1");
  const std::string prompt = build_cot_prompt(instance);
  std::vector<std::optional<std::string>> answers;
  std::string last_output;
  for (int sample = 0; sample < k; ++sample) {
    CompletionRequest request{prompt, config.sampling_temperature, config.max_output, sample,
                              Purpose::baseline};
    CompletionResult result = backend.complete(request);
    if (log) {
      log->append({Purpose::baseline, instance.instance_id, sample, request.hash(), result.cached, false});
    }
    answers.push_back(extract_final_answer(result.text, config.fallback_final_line));
    last_output = std::move(result.text);
  }
  Solution solution;
  solution.instance_id = instance.instance_id;
  solution.method = Method::self_consistency(k);
  solution.raw_output = last_output;
  solution.calls_used = k;
  try {
    solution.answer = majority_vote(answers).winner;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::empty_vote) throw;
    solution.answer = std::nullopt;  // every sample missed the sentinel
  }
  return solution;
}

VoteTally majority_vote(const std::vector<std::optional<std::string>>& answers) {
  VoteTally tally;
  for (const auto& answer : answers) {
    if (answer) ++tally.counts[*answer];
  }
  if (tally.counts.empty()) fail(ErrorKind::empty_vote, "no present answers to vote over");
  int best = 0;
  for (const auto& [answer, count] : tally.counts) {
    // std::map iterates in lexicographic order, so the first maximal count
    // is already the tie-break winner.
    if (count > best) {
      best = count;
      tally.winner = answer;
    }
  }
  return tally;
}

}  // namespace rw
