#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "reasonweaver/call_log.hpp"
#include "reasonweaver/discovery.hpp"
#include "reasonweaver/solving.hpp"
#include "reasonweaver/task.hpp"

namespace rw {

/// Identity of a cached discovery: equal keys iff equal field tuples.
struct StructureCacheKey {
  std::string task_id;
  std::string backend_id;
  std::string catalog_fingerprint;
  PipelineMode mode = PipelineMode::SAI;
  std::string template_fingerprint;

  bool operator==(const StructureCacheKey& other) const = default;
  std::string hash() const;
};

/// Full transcript of a method applied to a task. Sealed on save; the call
/// log is serialized in a deterministic order so records are byte-identical
/// under replay.
struct RunRecord {
  std::string run_id;
  std::string task_id;
  std::string backend_id;
  Method method;
  int discovery_primary_calls = 0;  // self-reported task-level calls
  int discovery_retry_calls = 0;
  std::vector<Solution> solutions;
  std::vector<CallLogEntry> call_log;
  std::string started_at;
  std::string finished_at;
};

std::string serialize_run_record(const RunRecord& record);    // record.jsonl content
std::string serialize_call_log(const RunRecord& record);      // calls.jsonl content
void save_run_record(const std::filesystem::path& run_dir, const RunRecord& record);
RunRecord load_run_record(const std::filesystem::path& run_dir);

std::string serialize_discovery_record(const DiscoveryRecord& record);
DiscoveryRecord parse_discovery_record(const std::string& text, const std::string& origin);

/// Two-block structure transfer file: a key-value metadata header followed by
/// the canonical structure body. The body round-trips byte-exactly.
struct StructureFile {
  std::string task_id;
  std::string backend_id;      // backend whose cache key this entry is filed under
  std::string discovered_by;   // backend that originally produced the structure
  std::string catalog_fingerprint;
  std::string template_fingerprint;
  PipelineMode mode = PipelineMode::SAI;
  std::string timestamp;
  std::string body;  // canonical serialized structure, byte-preserved on import
};

std::string render_structure_file(const StructureFile& file);
StructureFile parse_structure_file(const std::string& content, const std::string& origin);

/// Durable cache under <root>/structures/<task>/<key-hash>.{structure,discovery.json}.
/// A cache hit means a repeated discover performs zero backend calls.
class StructureCache {
 public:
  explicit StructureCache(std::filesystem::path root) : root_(std::move(root)) {}

  void put(const StructureCacheKey& key, const DiscoveryRecord& record);
  std::optional<DiscoveryRecord> get(const StructureCacheKey& key) const;

  /// Path of the transfer file for a cached entry (errors when absent).
  std::filesystem::path export_structure(const StructureCacheKey& key) const;

  /// Files an exported structure under a new backend id; provenance
  /// (discovered_by) records the original discovering backend. Returns the
  /// new key.
  StructureCacheKey import_structure(const std::filesystem::path& file, const std::string& new_backend_id);

  std::filesystem::path entry_path(const StructureCacheKey& key) const;

 private:
  std::filesystem::path root_;
};

/// Converts BBH-style JSON ({"examples":[{"input","target"}]}) into the task
/// document format. Returns the number of tasks written.
int ingest_bbh_dir(const std::filesystem::path& source_dir, const std::filesystem::path& out_dir);
Task convert_bbh_json(const std::string& json_text, const std::string& task_id);

/// Seeded uniform subsample of n instances, file order preserved. The kept
/// instance ids stay in the task document, so the draw is reproducible from
/// the artifact alone.
Task subsample_task(const Task& task, std::size_t n, std::uint64_t seed);

}  // namespace rw
