#include "reasonweaver/discovery.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "reasonweaver/digest.hpp"
#include "reasonweaver/errors.hpp"
#include "reasonweaver/util.hpp"

namespace rw {

using ordered_json = nlohmann::ordered_json;

const char* to_string(PipelineMode mode) {
  switch (mode) {
    case PipelineMode::S: return "S";
    case PipelineMode::SA: return "SA";
    case PipelineMode::SAI: return "SAI";
  }
  return "?";
}

PipelineMode pipeline_mode_from_string(const std::string& text) {
  if (text == "S") return PipelineMode::S;
  if (text == "SA") return PipelineMode::SA;
  if (text == "SAI") return PipelineMode::SAI;
  fail(ErrorKind::usage, "unknown mode: " + text + " (expected S, SA, or SAI)");
}

// ---------------------------------------------------------------------------
// Templates
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> slot_names(const std::string& text) {
  std::vector<std::string> names;
  std::size_t pos = 0;
  while (true) {
    std::size_t open = text.find("{{", pos);
    if (open == std::string::npos) break;
    std::size_t close = text.find("}}", open + 2);
    if (close == std::string::npos) break;
    names.push_back(text.substr(open + 2, close - open - 2));
    pos = close + 2;
  }
  return names;
}

void check_slots(const std::string& label, const std::string& text,
                 const std::vector<std::string>& declared) {
  auto found = slot_names(text);
  std::vector<std::string> expected = declared;
  std::sort(found.begin(), found.end());
  std::sort(expected.begin(), expected.end());
  if (found != expected) {
    std::string msg = label + " template must contain exactly the slots {";
    for (std::size_t i = 0; i < declared.size(); ++i) {
      if (i) msg += ", ";
      msg += declared[i];
    }
    msg += "}";
    fail(ErrorKind::validation, msg);
  }
}

std::string fill(std::string tmpl, std::initializer_list<std::pair<const char*, std::string>> slots) {
  for (const auto& [name, value] : slots) {
    tmpl = replace_all(std::move(tmpl), "{{" + std::string(name) + "}}", value);
  }
  return tmpl;
}

}  // namespace

void MetaPromptSet::validate() const {
  check_slots("select", select_template, {"modules", "examples"});
  check_slots("adapt", adapt_template, {"selected", "examples"});
  check_slots("implement", implement_template, {"demo", "adapted", "examples"});
  check_slots("instance", instance_template, {"demo", "instance"});
}

std::string MetaPromptSet::fingerprint() const {
  return sha256_fields({select_template, adapt_template, implement_template, instance_template});
}

MetaPromptSet MetaPromptSet::load_dir(const std::filesystem::path& dir) {
  MetaPromptSet prompts;
  prompts.select_template = normalize_newlines(read_file(dir / "select.txt"));
  prompts.adapt_template = normalize_newlines(read_file(dir / "adapt.txt"));
  prompts.implement_template = normalize_newlines(read_file(dir / "implement.txt"));
  prompts.instance_template = normalize_newlines(read_file(dir / "instance.txt"));
  prompts.validate();
  return prompts;
}

DemoStructure DemoStructure::load(const std::filesystem::path& path) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(read_file(path));
  } catch (const ordered_json::parse_error& e) {
    fail(ErrorKind::format, path.string() + ": " + e.what());
  }
  if (!doc.contains("task_label") || !doc.contains("structure")) {
    fail(ErrorKind::format, path.string() + ": expected fields task_label and structure");
  }
  DemoStructure demo;
  demo.task_label = doc["task_label"].get<std::string>();
  demo.structure = extract_structure(doc["structure"].dump());
  auto report = validate_structure(demo.structure);
  if (!report.valid) {
    fail(ErrorKind::validation, path.string() + ": demo structure invalid: " + report.issues[0].message);
  }
  return demo;
}

// ---------------------------------------------------------------------------
// Prompt assembly
// ---------------------------------------------------------------------------

std::string render_examples(const std::vector<Instance>& examples) {
  std::string out;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (i) out.push_back('\n');
    out += "Example " + std::to_string(i + 1) + ":\n";
    out += examples[i].input;
    out.push_back('\n');
  }
  return out;
}

std::string render_adapted(const std::vector<std::string>& entries) {
  std::string out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    out += std::to_string(i + 1) + ". " + entries[i] + "\n";
  }
  return out;
}

std::string assemble_select_prompt(const MetaPromptSet& prompts, const ModuleCatalog& catalog,
                                   const std::vector<Instance>& examples) {
  return fill(prompts.select_template,
              {{"modules", render_modules(catalog)}, {"examples", render_examples(examples)}});
}

std::string assemble_adapt_prompt(const MetaPromptSet& prompts, const ModuleCatalog& selected_catalog,
                                  const std::vector<Instance>& examples) {
  return fill(prompts.adapt_template,
              {{"selected", render_modules(selected_catalog)}, {"examples", render_examples(examples)}});
}

std::string assemble_implement_prompt(const MetaPromptSet& prompts, const DemoStructure& demo,
                                      const AdaptedDescriptions& adapted,
                                      const std::vector<Instance>& examples) {
  return fill(prompts.implement_template, {{"demo", serialize_structure(demo.structure)},
                                           {"adapted", render_adapted(adapted.entries)},
                                           {"examples", render_examples(examples)}});
}

std::string assemble_instance_prompt(const MetaPromptSet& prompts, const DemoStructure& demo,
                                     const Instance& instance) {
  return fill(prompts.instance_template,
              {{"demo", serialize_structure(demo.structure)}, {"instance", instance.input}});
}

std::vector<Instance> unlabeled_examples(const Task& task, const DiscoveryConfig& config) {
  if (config.num_examples < 1) fail(ErrorKind::config, "num_examples must be >= 1");
  if (task.instances.size() < static_cast<std::size_t>(config.num_examples)) {
    fail(ErrorKind::config, "task " + task.task_id + " has " + std::to_string(task.instances.size()) +
                                " instances, need " + std::to_string(config.num_examples));
  }
  std::vector<std::size_t> order(task.instances.size());
  std::iota(order.begin(), order.end(), 0);
  if (config.random_examples) {
    std::mt19937_64 rng(config.seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<Instance> examples;
  for (int i = 0; i < config.num_examples; ++i) {
    Instance copy = task.instances[order[static_cast<std::size_t>(i)]];
    copy.target.reset();  // label hygiene: gold answers never reach a meta-prompt
    examples.push_back(std::move(copy));
  }
  return examples;
}

// ---------------------------------------------------------------------------
// SELECT
// ---------------------------------------------------------------------------

namespace {

// The leading phrase of a module description: text before the first ':' for
// the named styles ("Critical Thinking: ..."), the whole text otherwise.
std::string description_head(const std::string& description) {
  std::size_t colon = description.find(':');
  if (colon == std::string::npos) return trim(description);
  return trim(description.substr(0, colon));
}

std::vector<int> integer_tokens(const std::string& text) {
  std::vector<int> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    if (i - start <= 6) out.push_back(std::stoi(text.substr(start, i - start)));
  }
  return out;
}

}  // namespace

namespace {

struct SelectionParse {
  std::vector<int> ids;    // catalog order, deduplicated
  std::string resolution;  // audit note: which path resolved what
};

SelectionParse parse_selection(const std::string& output, const ModuleCatalog& catalog) {
  std::set<int> by_id;
  for (int token : integer_tokens(output)) {
    if (catalog.has_id(token)) by_id.insert(token);
  }
  std::set<int> by_description;
  for (const auto& module : catalog.modules()) {
    if (contains_ci(output, description_head(module.description))) by_description.insert(module.id);
  }
  SelectionParse parsed;
  std::string id_note, desc_note;
  for (const auto& module : catalog.modules()) {
    if (by_id.count(module.id) == 0 && by_description.count(module.id) == 0) continue;
    parsed.ids.push_back(module.id);
    std::string& note = by_id.count(module.id) != 0 ? id_note : desc_note;
    if (!note.empty()) note += ",";
    note += std::to_string(module.id);
  }
  if (!id_note.empty()) parsed.resolution = "ids: " + id_note;
  if (!desc_note.empty()) {
    if (!parsed.resolution.empty()) parsed.resolution += "; ";
    parsed.resolution += "descriptions: " + desc_note;
  }
  return parsed;
}

}  // namespace

std::vector<int> parse_selected_ids(const std::string& output, const ModuleCatalog& catalog) {
  return parse_selection(output, catalog).ids;
}

SelectedModules select_modules(Backend& backend, const ModuleCatalog& catalog,
                               const std::vector<Instance>& examples, const MetaPromptSet& prompts,
                               const DiscoveryConfig& config, CallLog* log) {
  if (examples.empty()) fail(ErrorKind::config, "SELECT needs at least one example");
  if (catalog.empty()) fail(ErrorKind::empty_input, "SELECT needs a non-empty catalog");
  const std::string prompt = assemble_select_prompt(prompts, catalog, examples);
  std::string transcript;
  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    CompletionRequest request{prompt, config.temperature, config.max_output, attempt, Purpose::select};
    CompletionResult result = backend.complete(request);
    if (log) log->append({Purpose::select, "", attempt, request.hash(), result.cached, attempt > 0});
    transcript += result.text;
    transcript.push_back('\n');
    SelectionParse parsed = parse_selection(result.text, catalog);
    if (!parsed.ids.empty()) {
      return SelectedModules{std::move(parsed.ids), result.text, std::move(parsed.resolution)};
    }
  }
  fail(ErrorKind::selection_parse,
       "no resolvable modules after " + std::to_string(config.max_attempts) + " attempts; transcript:\n" +
           transcript);
}

// ---------------------------------------------------------------------------
// ADAPT
// ---------------------------------------------------------------------------

namespace {

std::string strip_bullet(const std::string& line) {
  std::string s = trim(line);
  if (s.empty()) return s;
  if (s[0] == '-' || s[0] == '*') return trim(s.substr(1));
  // "3." / "3)" enumerations
  std::size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')')) return trim(s.substr(i + 1));
  return s;
}

}  // namespace

AdaptedDescriptions adapt_modules(Backend& backend, const SelectedModules& selected,
                                  const ModuleCatalog& catalog, const std::vector<Instance>& examples,
                                  const MetaPromptSet& prompts, const DiscoveryConfig& config,
                                  CallLog* log, std::string* transcript_out) {
  if (selected.module_ids.empty()) fail(ErrorKind::config, "ADAPT needs a non-empty selection");
  const ModuleCatalog selected_catalog = catalog.subset(selected.module_ids);
  const std::string prompt = assemble_adapt_prompt(prompts, selected_catalog, examples);
  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    CompletionRequest request{prompt, config.temperature, config.max_output, attempt, Purpose::adapt};
    CompletionResult result = backend.complete(request);
    if (log) log->append({Purpose::adapt, "", attempt, request.hash(), result.cached, attempt > 0});
    if (transcript_out) *transcript_out = result.text;
    AdaptedDescriptions adapted;
    for (const auto& line : split_lines(result.text)) {
      std::string entry = strip_bullet(line);
      if (!entry.empty()) adapted.entries.push_back(std::move(entry));
    }
    if (!adapted.entries.empty()) {
      if (adapted.entries.size() == selected.module_ids.size()) {
        adapted.source_ids = selected.module_ids;
      }
      return adapted;
    }
  }
  fail(ErrorKind::adaptation,
       "empty model output after " + std::to_string(config.max_attempts) + " attempts");
}

// ---------------------------------------------------------------------------
// IMPLEMENT
// ---------------------------------------------------------------------------

namespace {

std::string render_issues(const std::vector<ValidationIssue>& issues) {
  std::string out;
  for (const auto& issue : issues) {
    out += "- " + issue.path + ": " + issue.message + "\n";
  }
  return out;
}

/// Shared retry loop for IMPLEMENT-style queries: extract, validate, and on
/// failure re-query with the validation issues appended, up to R attempts.
ReasoningStructure query_structure(Backend& backend, const std::string& base_prompt,
                                   const DiscoveryConfig& config, const std::string& instance_id,
                                   CallLog* log, std::vector<std::string>* transcripts) {
  std::string prompt = base_prompt;
  std::string all_transcripts;
  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    CompletionRequest request{prompt, config.temperature, config.max_output, 0, Purpose::implement};
    CompletionResult result = backend.complete(request);
    if (log) log->append({Purpose::implement, instance_id, 0, request.hash(), result.cached, attempt > 0});
    if (transcripts) transcripts->push_back(result.text);
    all_transcripts += result.text;
    all_transcripts.push_back('\n');

    std::vector<ValidationIssue> issues;
    try {
      ReasoningStructure structure = extract_structure(result.text);
      auto report = validate_structure(structure);
      if (report.valid) return structure;
      issues = report.issues;
    } catch (const Error&) {
      issues = {{"/", "no parseable key-value block in the response"}};
    }
    prompt = base_prompt + "\nThe previous reasoning plan was not valid:\n" + render_issues(issues) +
             "Write a corrected reasoning plan in JSON.\n";
  }
  fail(ErrorKind::implementation, "no valid structure after " + std::to_string(config.max_attempts) +
                                      " attempts; transcripts:\n" + all_transcripts);
}

}  // namespace

ReasoningStructure implement_structure(Backend& backend, const AdaptedDescriptions& adapted,
                                       const DemoStructure& demo, const std::vector<Instance>& examples,
                                       const MetaPromptSet& prompts, const DiscoveryConfig& config,
                                       CallLog* log, std::vector<std::string>* transcripts) {
  if (adapted.entries.empty()) fail(ErrorKind::config, "IMPLEMENT needs adapted descriptions");
  const std::string prompt = assemble_implement_prompt(prompts, demo, adapted, examples);
  return query_structure(backend, prompt, config, "", log, transcripts);
}

// ---------------------------------------------------------------------------
// Drivers
// ---------------------------------------------------------------------------

DiscoveryRecord discover(Backend& backend, const Task& task, const ModuleCatalog& catalog,
                         const DemoStructure& demo, const MetaPromptSet& prompts,
                         const DiscoveryConfig& config, CallLog* log) {
  const auto examples = unlabeled_examples(task, config);
  DiscoveryRecord record;
  record.task_id = task.task_id;
  record.mode = config.mode;
  record.backend_id = backend.id();
  record.timestamp = timestamp_utc(config.canonical_timestamps);

  const std::uint64_t calls_before = backend.calls_made();
  auto run_stage = [&](const char* stage, auto&& fn) {
    try {
      return fn();
    } catch (const Error& e) {
      throw Error(e.kind(), std::string("stage ") + stage + ": " + e.what());
    }
  };

  record.selected = run_stage("SELECT", [&] {
    return select_modules(backend, catalog, examples, prompts, config, log);
  });
  record.select_transcript = record.selected.rationale_text;
  record.call_count = 1;

  if (config.mode != PipelineMode::S) {
    record.adapted = run_stage("ADAPT", [&] {
      return adapt_modules(backend, record.selected, catalog, examples, prompts, config, log,
                           &record.adapt_transcript);
    });
    record.call_count = 2;
  }
  if (config.mode == PipelineMode::SAI) {
    record.structure = run_stage("IMPLEMENT", [&] {
      return implement_structure(backend, *record.adapted, demo, examples, prompts, config, log,
                                 &record.implement_transcripts);
    });
    record.call_count = 3;
  }
  const std::uint64_t total = backend.calls_made() - calls_before;
  record.retry_calls = static_cast<int>(total) - record.call_count;
  return record;
}

ReasoningStructure discover_instance(Backend& backend, const Instance& instance,
                                     const DemoStructure& demo, const MetaPromptSet& prompts,
                                     const DiscoveryConfig& config, CallLog* log) {
  if (instance.input.empty()) fail(ErrorKind::config, "instance input is empty");
  const std::string prompt = assemble_instance_prompt(prompts, demo, instance);
  return query_structure(backend, prompt, config, instance.instance_id, log, nullptr);
}

}  // namespace rw
