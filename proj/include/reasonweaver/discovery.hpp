#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "reasonweaver/backend.hpp"
#include "reasonweaver/call_log.hpp"
#include "reasonweaver/catalog.hpp"
#include "reasonweaver/structure.hpp"
#include "reasonweaver/task.hpp"

namespace rw {

/// Which composition actions run: SELECT only, SELECT+ADAPT, or all three.
enum class PipelineMode { S, SA, SAI };

const char* to_string(PipelineMode mode);
PipelineMode pipeline_mode_from_string(const std::string& text);

/// The three composition meta-prompts plus the single-instance variant.
/// Slots use {{name}} syntax; each template must contain exactly its
/// declared slots.
struct MetaPromptSet {
  std::string select_template;     // {{modules}}, {{examples}}
  std::string adapt_template;      // {{selected}}, {{examples}}
  std::string implement_template;  // {{demo}}, {{adapted}}, {{examples}}
  std::string instance_template;   // {{demo}}, {{instance}}

  void validate() const;
  std::string fingerprint() const;

  /// Reads select.txt / adapt.txt / implement.txt / instance.txt from a
  /// directory.
  static MetaPromptSet load_dir(const std::filesystem::path& dir);
};

struct SelectedModules {
  std::vector<int> module_ids;  // resolvable in the active catalog, non-empty
  std::string rationale_text;   // raw model output retained for audit
  std::string resolution;       // which parse path fired: "ids: ..."/"descriptions: ..."
};

struct AdaptedDescriptions {
  std::vector<std::string> entries;  // non-empty, each entry non-empty
  std::vector<int> source_ids;       // parallel to entries, empty when unattributable
};

/// Human-written demonstration plan shown to the model during IMPLEMENT.
struct DemoStructure {
  std::string task_label;
  ReasoningStructure structure;

  static DemoStructure load(const std::filesystem::path& path);
};

struct DiscoveryRecord {
  std::string task_id;
  PipelineMode mode = PipelineMode::SAI;
  std::string backend_id;
  SelectedModules selected;
  std::optional<AdaptedDescriptions> adapted;    // absent in mode S
  std::optional<ReasoningStructure> structure;   // present only in mode SAI
  int call_count = 0;   // primary calls: one per stage run
  int retry_calls = 0;  // parse-retry calls, logged separately
  std::string select_transcript;
  std::string adapt_transcript;
  std::vector<std::string> implement_transcripts;  // one per attempt
  std::string timestamp;
};

struct DiscoveryConfig {
  PipelineMode mode = PipelineMode::SAI;
  int num_examples = 3;
  int max_attempts = 3;  // per-stage retry budget R (total attempts)
  bool random_examples = false;
  std::uint64_t seed = 0;
  double temperature = 0.0;
  int max_output = 2048;
  bool canonical_timestamps = false;
};

// --- prompt assembly (pure; also used by --dry-run and golden tests) -------

std::string render_examples(const std::vector<Instance>& examples);
std::string render_adapted(const std::vector<std::string>& entries);

std::string assemble_select_prompt(const MetaPromptSet& prompts, const ModuleCatalog& catalog,
                                   const std::vector<Instance>& examples);
std::string assemble_adapt_prompt(const MetaPromptSet& prompts, const ModuleCatalog& selected_catalog,
                                  const std::vector<Instance>& examples);
std::string assemble_implement_prompt(const MetaPromptSet& prompts, const DemoStructure& demo,
                                      const AdaptedDescriptions& adapted,
                                      const std::vector<Instance>& examples);
std::string assemble_instance_prompt(const MetaPromptSet& prompts, const DemoStructure& demo,
                                     const Instance& instance);

/// First `num_examples` instances (or a seeded sample) with targets stripped.
std::vector<Instance> unlabeled_examples(const Task& task, const DiscoveryConfig& config);

/// Resolves module references in SELECT output, by id token or by verbatim
/// description prefix, into catalog ids (catalog order, deduplicated).
std::vector<int> parse_selected_ids(const std::string& output, const ModuleCatalog& catalog);

// --- stage operations -------------------------------------------------------

SelectedModules select_modules(Backend& backend, const ModuleCatalog& catalog,
                               const std::vector<Instance>& examples, const MetaPromptSet& prompts,
                               const DiscoveryConfig& config, CallLog* log = nullptr);

AdaptedDescriptions adapt_modules(Backend& backend, const SelectedModules& selected,
                                  const ModuleCatalog& catalog, const std::vector<Instance>& examples,
                                  const MetaPromptSet& prompts, const DiscoveryConfig& config,
                                  CallLog* log = nullptr, std::string* transcript = nullptr);

ReasoningStructure implement_structure(Backend& backend, const AdaptedDescriptions& adapted,
                                       const DemoStructure& demo, const std::vector<Instance>& examples,
                                       const MetaPromptSet& prompts, const DiscoveryConfig& config,
                                       CallLog* log = nullptr,
                                       std::vector<std::string>* transcripts = nullptr);

/// Runs the Stage-1 pipeline on the task level. Primary calls equal the
/// number of stages run for the mode; parse retries are logged separately.
DiscoveryRecord discover(Backend& backend, const Task& task, const ModuleCatalog& catalog,
                         const DemoStructure& demo, const MetaPromptSet& prompts,
                         const DiscoveryConfig& config, CallLog* log = nullptr);

/// One-shot structure composition for a single instance.
ReasoningStructure discover_instance(Backend& backend, const Instance& instance,
                                     const DemoStructure& demo, const MetaPromptSet& prompts,
                                     const DiscoveryConfig& config, CallLog* log = nullptr);

}  // namespace rw
