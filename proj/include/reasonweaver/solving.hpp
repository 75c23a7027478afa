#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reasonweaver/backend.hpp"
#include "reasonweaver/call_log.hpp"
#include "reasonweaver/catalog.hpp"
#include "reasonweaver/structure.hpp"
#include "reasonweaver/task.hpp"

namespace rw {

enum class MethodKind { self_discover, direct, cot, plan_and_solve, per_module, self_consistency };

/// per_module carries the module id, self_consistency the sample count k.
struct Method {
  MethodKind kind = MethodKind::direct;
  int param = 0;

  static Method self_discover() { return {MethodKind::self_discover, 0}; }
  static Method direct() { return {MethodKind::direct, 0}; }
  static Method cot() { return {MethodKind::cot, 0}; }
  static Method plan_and_solve() { return {MethodKind::plan_and_solve, 0}; }
  static Method per_module(int id) { return {MethodKind::per_module, id}; }
  static Method self_consistency(int k) { return {MethodKind::self_consistency, k}; }

  bool operator==(const Method& other) const = default;
};

std::string to_string(const Method& method);
Method method_from_string(const std::string& text);

struct Solution {
  std::string instance_id;
  Method method;
  std::string raw_output;
  std::optional<std::string> answer;  // normalized extracted answer
  int calls_used = 1;
};

struct VoteTally {
  std::map<std::string, int> counts;
  std::string winner;  // maximal count; ties -> lexicographically smallest
};

struct SolverConfig {
  double greedy_temperature = 0.0;   // single-sample paths
  double sampling_temperature = 0.7; // self-consistency sampling
  int max_output = 2048;
  bool fallback_final_line = false;  // off by default: silent fallbacks mask regressions
  std::string plan_and_solve_text;   // bundled template; empty -> built-in default
};

/// Verbatim decoding preamble placed before the serialized structure.
const std::string& stage2_preamble();
/// Instruction that makes the model end with the extractable sentinel.
const std::string& sentinel_instruction();
/// Zero-shot chain-of-thought trigger.
const std::string& cot_trigger();

// --- prompt builders (pure; used by --dry-run and golden tests) -------------

std::string build_structure_prompt(const ReasoningStructure& structure, const Instance& instance);
std::string build_direct_prompt(const Instance& instance);
std::string build_cot_prompt(const Instance& instance);
std::string build_plan_and_solve_prompt(const Instance& instance, const SolverConfig& config);
std::string build_module_prompt(const ReasoningModule& module, const Instance& instance);
std::string build_baseline_prompt(MethodKind kind, const Instance& instance, const SolverConfig& config);

// --- solvers -----------------------------------------------------------------

/// Stage-2 decoding: exactly one backend call; extraction failure yields a
/// Solution with an absent answer, never an exception.
Solution solve_with_structure(Backend& backend, const ReasoningStructure& structure,
                              const Instance& instance, const SolverConfig& config,
                              CallLog* log = nullptr);

/// direct / cot / plan_and_solve; one call each.
Solution solve_baseline(Backend& backend, MethodKind kind, const Instance& instance,
                        const SolverConfig& config, CallLog* log = nullptr);

struct PerModuleOutcome {
  std::vector<Solution> solutions;                       // one per module that completed
  std::vector<std::pair<int, std::string>> errors;       // (module id, message); run continues
};

/// One solution per catalog module; per-call failures are recorded and do not
/// abort the remaining modules.
PerModuleOutcome solve_per_module(Backend& backend, const ModuleCatalog& catalog,
                                  const Instance& instance, const SolverConfig& config,
                                  CallLog* log = nullptr);

/// k chain-of-thought samples at the sampling temperature, majority-voted.
Solution solve_self_consistency(Backend& backend, const Instance& instance, int k,
                                const SolverConfig& config, CallLog* log = nullptr);

/// Majority vote over present answers; absent entries are dropped. Errors
/// when every entry is absent.
VoteTally majority_vote(const std::vector<std::optional<std::string>>& answers);

}  // namespace rw
