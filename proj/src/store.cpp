#include "reasonweaver/store.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <random>

#include <nlohmann/json.hpp>

#include "reasonweaver/digest.hpp"
#include "reasonweaver/errors.hpp"
#include "reasonweaver/util.hpp"

namespace rw {

using ordered_json = nlohmann::ordered_json;

std::string StructureCacheKey::hash() const {
  return sha256_fields({task_id, backend_id, catalog_fingerprint, to_string(mode), template_fingerprint})
      .substr(0, 16);
}

// ---------------------------------------------------------------------------
// Run records
// ---------------------------------------------------------------------------

namespace {

int purpose_rank(Purpose purpose) {
  switch (purpose) {
    case Purpose::select: return 0;
    case Purpose::adapt: return 1;
    case Purpose::implement: return 2;
    case Purpose::solve: return 3;
    case Purpose::baseline: return 3;
  }
  return 4;
}

std::vector<CallLogEntry> canonical_call_order(std::vector<CallLogEntry> entries) {
  std::stable_sort(entries.begin(), entries.end(), [](const CallLogEntry& a, const CallLogEntry& b) {
    if (a.instance_id != b.instance_id) return a.instance_id < b.instance_id;
    if (purpose_rank(a.purpose) != purpose_rank(b.purpose)) {
      return purpose_rank(a.purpose) < purpose_rank(b.purpose);
    }
    if (a.sample_index != b.sample_index) return a.sample_index < b.sample_index;
    return a.request_hash < b.request_hash;
  });
  return entries;
}

ordered_json solution_to_json(const Solution& solution) {
  ordered_json record;
  record["instance_id"] = solution.instance_id;
  record["method"] = to_string(solution.method);
  record["raw_output"] = solution.raw_output;
  if (solution.answer) record["answer"] = *solution.answer;
  else record["answer"] = nullptr;
  record["calls_used"] = solution.calls_used;
  return record;
}

Solution solution_from_json(const ordered_json& record) {
  Solution solution;
  solution.instance_id = record.at("instance_id").get<std::string>();
  solution.method = method_from_string(record.at("method").get<std::string>());
  solution.raw_output = record.at("raw_output").get<std::string>();
  if (!record.at("answer").is_null()) solution.answer = record.at("answer").get<std::string>();
  solution.calls_used = record.at("calls_used").get<int>();
  return solution;
}

}  // namespace

std::string serialize_run_record(const RunRecord& record) {
  ordered_json header;
  header["run_id"] = record.run_id;
  header["task_id"] = record.task_id;
  header["backend_id"] = record.backend_id;
  header["method"] = to_string(record.method);
  header["discovery_primary_calls"] = record.discovery_primary_calls;
  header["discovery_retry_calls"] = record.discovery_retry_calls;
  header["started_at"] = record.started_at;
  header["finished_at"] = record.finished_at;
  std::string out = header.dump();
  out.push_back('\n');
  for (const auto& solution : record.solutions) {
    out += solution_to_json(solution).dump();
    out.push_back('\n');
  }
  return out;
}

std::string serialize_call_log(const RunRecord& record) {
  std::string out;
  int seq = 0;
  for (const auto& entry : canonical_call_order(record.call_log)) {
    ordered_json line;
    line["seq"] = ++seq;
    line["purpose"] = to_string(entry.purpose);
    line["instance_id"] = entry.instance_id;
    line["sample_index"] = entry.sample_index;
    line["request_hash"] = entry.request_hash;
    line["cached"] = entry.cached;
    line["retry"] = entry.retry;
    out += line.dump();
    out.push_back('\n');
  }
  return out;
}

void save_run_record(const std::filesystem::path& run_dir, const RunRecord& record) {
  write_file_atomic(run_dir / "record.jsonl", serialize_run_record(record));
  write_file_atomic(run_dir / "calls.jsonl", serialize_call_log(record));
}

RunRecord load_run_record(const std::filesystem::path& run_dir) {
  RunRecord record;
  const auto record_path = run_dir / "record.jsonl";
  const auto lines = split_lines(read_file(record_path));
  bool have_header = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    ordered_json parsed;
    try {
      parsed = ordered_json::parse(lines[i]);
    } catch (const ordered_json::parse_error& e) {
      fail(ErrorKind::format, record_path.string() + " line " + std::to_string(i + 1) + ": " + e.what());
    }
    if (!have_header) {
      record.run_id = parsed.at("run_id").get<std::string>();
      record.task_id = parsed.at("task_id").get<std::string>();
      record.backend_id = parsed.at("backend_id").get<std::string>();
      record.method = method_from_string(parsed.at("method").get<std::string>());
      record.discovery_primary_calls = parsed.at("discovery_primary_calls").get<int>();
      record.discovery_retry_calls = parsed.at("discovery_retry_calls").get<int>();
      record.started_at = parsed.at("started_at").get<std::string>();
      record.finished_at = parsed.at("finished_at").get<std::string>();
      have_header = true;
      continue;
    }
    record.solutions.push_back(solution_from_json(parsed));
  }
  if (!have_header) fail(ErrorKind::format, record_path.string() + ": missing run header");

  const auto calls_path = run_dir / "calls.jsonl";
  if (std::filesystem::exists(calls_path)) {
    for (const auto& line : split_lines(read_file(calls_path))) {
      if (trim(line).empty()) continue;
      ordered_json parsed = ordered_json::parse(line);
      CallLogEntry entry;
      entry.purpose = purpose_from_string(parsed.at("purpose").get<std::string>());
      entry.instance_id = parsed.at("instance_id").get<std::string>();
      entry.sample_index = parsed.at("sample_index").get<int>();
      entry.request_hash = parsed.at("request_hash").get<std::string>();
      entry.cached = parsed.at("cached").get<bool>();
      entry.retry = parsed.at("retry").get<bool>();
      record.call_log.push_back(std::move(entry));
    }
  }
  return record;
}

// ---------------------------------------------------------------------------
// Discovery records
// ---------------------------------------------------------------------------

std::string serialize_discovery_record(const DiscoveryRecord& record) {
  ordered_json doc;
  doc["task_id"] = record.task_id;
  doc["mode"] = to_string(record.mode);
  doc["backend_id"] = record.backend_id;
  doc["call_count"] = record.call_count;
  doc["retry_calls"] = record.retry_calls;
  doc["selected"] = ordered_json{{"module_ids", record.selected.module_ids},
                                 {"rationale_text", record.selected.rationale_text},
                                 {"resolution", record.selected.resolution}};
  if (record.adapted) {
    doc["adapted"] = ordered_json{{"entries", record.adapted->entries},
                                  {"source_ids", record.adapted->source_ids}};
  }
  if (record.structure) doc["structure"] = serialize_structure(*record.structure);
  doc["transcripts"] = ordered_json{{"select", record.select_transcript},
                                    {"adapt", record.adapt_transcript},
                                    {"implement", record.implement_transcripts}};
  doc["timestamp"] = record.timestamp;
  return doc.dump(2) + "\n";
}

DiscoveryRecord parse_discovery_record(const std::string& text, const std::string& origin) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    fail(ErrorKind::format, origin + ": " + e.what());
  }
  DiscoveryRecord record;
  record.task_id = doc.at("task_id").get<std::string>();
  record.mode = pipeline_mode_from_string(doc.at("mode").get<std::string>());
  record.backend_id = doc.at("backend_id").get<std::string>();
  record.call_count = doc.at("call_count").get<int>();
  record.retry_calls = doc.at("retry_calls").get<int>();
  record.selected.module_ids = doc.at("selected").at("module_ids").get<std::vector<int>>();
  record.selected.rationale_text = doc.at("selected").at("rationale_text").get<std::string>();
  if (doc["selected"].contains("resolution")) {
    record.selected.resolution = doc["selected"]["resolution"].get<std::string>();
  }
  if (doc.contains("adapted")) {
    AdaptedDescriptions adapted;
    adapted.entries = doc["adapted"].at("entries").get<std::vector<std::string>>();
    adapted.source_ids = doc["adapted"].at("source_ids").get<std::vector<int>>();
    record.adapted = std::move(adapted);
  }
  if (doc.contains("structure")) {
    record.structure = extract_structure(doc["structure"].get<std::string>());
  }
  record.select_transcript = doc.at("transcripts").at("select").get<std::string>();
  record.adapt_transcript = doc.at("transcripts").at("adapt").get<std::string>();
  record.implement_transcripts =
      doc.at("transcripts").at("implement").get<std::vector<std::string>>();
  record.timestamp = doc.at("timestamp").get<std::string>();
  return record;
}

// ---------------------------------------------------------------------------
// Structure transfer files
// ---------------------------------------------------------------------------

std::string render_structure_file(const StructureFile& file) {
  ordered_json header;
  header["task_id"] = file.task_id;
  header["backend_id"] = file.backend_id;
  header["discovered_by"] = file.discovered_by;
  header["catalog_fingerprint"] = file.catalog_fingerprint;
  header["template_fingerprint"] = file.template_fingerprint;
  header["mode"] = to_string(file.mode);
  header["timestamp"] = file.timestamp;
  return header.dump(2) + "\n" + file.body;
}

StructureFile parse_structure_file(const std::string& content, const std::string& origin) {
  const std::string text = normalize_newlines(content);
  std::size_t header_start = text.find('{');
  if (header_start == std::string::npos) {
    fail(ErrorKind::provenance, origin + ": no metadata header block");
  }
  // Header block ends at its balanced closing brace.
  int depth = 0;
  bool in_string = false;
  std::size_t header_end = std::string::npos;
  for (std::size_t i = header_start; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) {
      header_end = i + 1;
      break;
    }
  }
  if (header_end == std::string::npos) fail(ErrorKind::provenance, origin + ": unterminated header block");

  ordered_json header;
  try {
    header = ordered_json::parse(text.substr(header_start, header_end - header_start));
  } catch (const ordered_json::parse_error& e) {
    fail(ErrorKind::provenance, origin + ": corrupt header: " + e.what());
  }
  StructureFile file;
  try {
    file.task_id = header.at("task_id").get<std::string>();
    file.backend_id = header.at("backend_id").get<std::string>();
    file.discovered_by = header.at("discovered_by").get<std::string>();
    file.catalog_fingerprint = header.at("catalog_fingerprint").get<std::string>();
    file.template_fingerprint = header.at("template_fingerprint").get<std::string>();
    file.mode = pipeline_mode_from_string(header.at("mode").get<std::string>());
    file.timestamp = header.at("timestamp").get<std::string>();
  } catch (const ordered_json::out_of_range& e) {
    fail(ErrorKind::provenance, origin + ": incomplete header: " + e.what());
  }

  std::size_t body_start = text.find('{', header_end);
  if (body_start == std::string::npos) fail(ErrorKind::provenance, origin + ": missing structure body");
  file.body = text.substr(body_start);
  extract_structure(file.body);  // body must hold a parseable structure
  return file;
}

// ---------------------------------------------------------------------------
// Cache
// ---------------------------------------------------------------------------

std::filesystem::path StructureCache::entry_path(const StructureCacheKey& key) const {
  return root_ / "structures" / key.task_id / (key.hash() + ".structure");
}

void StructureCache::put(const StructureCacheKey& key, const DiscoveryRecord& record) {
  const auto structure_path = entry_path(key);
  const auto record_path = structure_path.parent_path() / (key.hash() + ".discovery.json");
  write_file_atomic(record_path, serialize_discovery_record(record));
  if (record.structure) {
    StructureFile file;
    file.task_id = key.task_id;
    file.backend_id = key.backend_id;
    file.discovered_by = record.backend_id;
    file.catalog_fingerprint = key.catalog_fingerprint;
    file.template_fingerprint = key.template_fingerprint;
    file.mode = key.mode;
    file.timestamp = record.timestamp;
    file.body = serialize_structure(*record.structure);
    write_file_atomic(structure_path, render_structure_file(file));
  }
}

std::optional<DiscoveryRecord> StructureCache::get(const StructureCacheKey& key) const {
  const auto record_path = entry_path(key).parent_path() / (key.hash() + ".discovery.json");
  if (!std::filesystem::exists(record_path)) return std::nullopt;
  return parse_discovery_record(read_file(record_path), record_path.string());
}

std::filesystem::path StructureCache::export_structure(const StructureCacheKey& key) const {
  const auto path = entry_path(key);
  if (!std::filesystem::exists(path)) {
    fail(ErrorKind::lookup, "no cached structure for key " + key.hash());
  }
  return path;
}

StructureCacheKey StructureCache::import_structure(const std::filesystem::path& file,
                                                   const std::string& new_backend_id) {
  StructureFile parsed = parse_structure_file(read_file(file), file.string());
  StructureCacheKey key{parsed.task_id, new_backend_id, parsed.catalog_fingerprint, parsed.mode,
                        parsed.template_fingerprint};
  parsed.backend_id = new_backend_id;  // discovered_by keeps the original provenance
  write_file_atomic(entry_path(key), render_structure_file(parsed));

  DiscoveryRecord record;
  record.task_id = parsed.task_id;
  record.mode = parsed.mode;
  record.backend_id = parsed.discovered_by;
  record.structure = extract_structure(parsed.body);
  record.timestamp = parsed.timestamp;
  const auto record_path = entry_path(key).parent_path() / (key.hash() + ".discovery.json");
  write_file_atomic(record_path, serialize_discovery_record(record));
  return key;
}

// ---------------------------------------------------------------------------
// BBH ingestion
// ---------------------------------------------------------------------------

Task convert_bbh_json(const std::string& json_text, const std::string& task_id) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const ordered_json::parse_error& e) {
    fail(ErrorKind::format, task_id + ": " + e.what());
  }
  if (!doc.contains("examples") || !doc["examples"].is_array()) {
    fail(ErrorKind::format, task_id + ": expected an examples array");
  }
  Task task;
  task.task_id = task_id;
  bool all_option_letters = true;
  int index = 0;
  for (const auto& example : doc["examples"]) {
    Instance inst;
    inst.instance_id = task_id + "-" + std::to_string(index++);
    inst.input = example.at("input").get<std::string>();
    if (example.contains("target") && !example["target"].is_null()) {
      std::string target = example["target"].get<std::string>();
      bool option = target.size() == 3 && target.front() == '(' && target.back() == ')' &&
                    std::isalpha(static_cast<unsigned char>(target[1]));
      all_option_letters = all_option_letters && option;
      inst.target = std::move(target);
    } else {
      all_option_letters = false;
    }
    task.instances.push_back(std::move(inst));
  }
  if (task.instances.empty()) fail(ErrorKind::format, task_id + ": no examples");
  task.answer_kind = all_option_letters ? AnswerKind::multiple_choice : AnswerKind::free_text;
  return task;
}

Task subsample_task(const Task& task, std::size_t n, std::uint64_t seed) {
  if (n == 0 || n > task.instances.size()) {
    fail(ErrorKind::config, "cannot sample " + std::to_string(n) + " of " +
                                std::to_string(task.instances.size()) + " instances");
  }
  std::vector<std::size_t> order(task.instances.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(n);
  std::sort(order.begin(), order.end());  // keep file order among the kept instances
  Task sampled;
  sampled.task_id = task.task_id;
  sampled.category = task.category;
  sampled.answer_kind = task.answer_kind;
  for (std::size_t index : order) sampled.instances.push_back(task.instances[index]);
  return sampled;
}

int ingest_bbh_dir(const std::filesystem::path& source_dir, const std::filesystem::path& out_dir) {
  if (!std::filesystem::is_directory(source_dir)) {
    fail(ErrorKind::usage, "not a directory: " + source_dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(source_dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  int written = 0;
  for (const auto& file : files) {
    Task task = convert_bbh_json(read_file(file), file.stem().string());
    write_file_atomic(out_dir / (task.task_id + ".jsonl"), save_task(task));
    ++written;
  }
  return written;
}

}  // namespace rw
