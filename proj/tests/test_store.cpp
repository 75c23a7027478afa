#include <doctest.h>

#include "reasonweaver/errors.hpp"
#include "reasonweaver/resources.hpp"
#include "reasonweaver/store.hpp"
#include "reasonweaver/util.hpp"
#include "test_support.hpp"

using namespace rw;

TEST_CASE("load_task parses instances in file order") {
  rwtest::TempDir tmp;
  const std::string doc =
      "{\"task_id\":\"demo\",\"answer_kind\":\"free_text\"}\n"
      "{\"instance_id\":\"i1\",\"input\":\"first\",\"target\":\"one\"}\n"
      "{\"instance_id\":\"i2\",\"input\":\"second\"}\n"
      "{\"instance_id\":\"i3\",\"input\":\"third\",\"target\":\"three\"}\n";
  write_file_atomic(tmp / "demo.jsonl", doc);
  Task task = load_task(tmp / "demo.jsonl");
  CHECK(task.task_id == "demo");
  REQUIRE(task.instances.size() == 3);
  CHECK(task.instances[0].instance_id == "i1");
  CHECK(task.instances[1].target == std::nullopt);  // loads fine; scoring errors only if attempted

  SUBCASE("duplicate instance id names the offending record") {
    write_file_atomic(tmp / "dup.jsonl",
                      "{\"task_id\":\"d\"}\n"
                      "{\"instance_id\":\"i1\",\"input\":\"a\"}\n"
                      "{\"instance_id\":\"i1\",\"input\":\"b\"}\n");
    try {
      load_task(tmp / "dup.jsonl");
      FAIL("expected format error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::format);
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  SUBCASE("missing metadata record") {
    write_file_atomic(tmp / "meta.jsonl", "{\"instance_id\":\"i1\",\"input\":\"a\"}\n");
    CHECK_THROWS_AS(load_task(tmp / "meta.jsonl"), Error);
  }
  SUBCASE("save round-trips") {
    CHECK(parse_task(save_task(task), "mem").instances.size() == 3);
  }
}

namespace {

DiscoveryRecord make_record(const std::string& backend_id, bool with_structure = true) {
  DiscoveryRecord record;
  record.task_id = "toy_sort";
  record.mode = PipelineMode::SAI;
  record.backend_id = backend_id;
  record.call_count = 3;
  record.selected.module_ids = {9, 38};
  record.selected.rationale_text = "9 and 38";
  AdaptedDescriptions adapted;
  adapted.entries = {"compare", "order"};
  adapted.source_ids = {9, 38};
  record.adapted = adapted;
  if (with_structure) {
    record.structure = extract_structure("{\"compare\": \"\", \"order\": \"\"}");
  }
  record.select_transcript = "9 and 38";
  record.adapt_transcript = "compare\norder";
  record.implement_transcripts = {"{\"compare\": \"\", \"order\": \"\"}"};
  record.timestamp = "1970-01-01T00:00:00Z";
  return record;
}

StructureCacheKey make_key(const std::string& backend_id) {
  return StructureCacheKey{"toy_sort", backend_id, "catfp", PipelineMode::SAI, "tmplfp"};
}

}  // namespace

TEST_CASE("discovery records serialize and parse losslessly") {
  DiscoveryRecord record = make_record("scripted:a");
  DiscoveryRecord back = parse_discovery_record(serialize_discovery_record(record), "mem");
  CHECK(back.task_id == record.task_id);
  CHECK(back.mode == record.mode);
  CHECK(back.selected.module_ids == record.selected.module_ids);
  CHECK(back.adapted->entries == record.adapted->entries);
  REQUIRE(back.structure.has_value());
  CHECK(*back.structure == *record.structure);
  CHECK(back.call_count == 3);
}

TEST_CASE("structure cache: hit means zero backend calls on repeat discovery") {
  rwtest::TempDir tmp;
  StructureCache cache(tmp.path());
  StructureCacheKey key = make_key("scripted:a");
  cache.put(key, make_record("scripted:a"));

  auto cached = cache.get(key);
  REQUIRE(cached.has_value());
  CHECK(cached->selected.module_ids == std::vector<int>{9, 38});

  SUBCASE("key sensitivity: backend id") {
    CHECK_FALSE(cache.get(make_key("scripted:b")).has_value());
  }
  SUBCASE("key sensitivity: catalog fingerprint") {
    StructureCacheKey other = key;
    other.catalog_fingerprint = "different";
    CHECK_FALSE(cache.get(other).has_value());
  }
  SUBCASE("key sensitivity: mode") {
    StructureCacheKey other = key;
    other.mode = PipelineMode::SA;
    CHECK_FALSE(cache.get(other).has_value());
  }
  SUBCASE("keys are equal iff field tuples are equal") {
    CHECK(key == make_key("scripted:a"));
    CHECK(key.hash() == make_key("scripted:a").hash());
    CHECK_FALSE(key == make_key("scripted:b"));
  }
}

TEST_CASE("export, import, transfer provenance") {
  rwtest::TempDir tmp;
  StructureCache cache(tmp.path());
  StructureCacheKey key_a = make_key("scripted:a");
  cache.put(key_a, make_record("scripted:a"));

  const auto exported = cache.export_structure(key_a);
  StructureFile original = parse_structure_file(read_file(exported), "exported");
  CHECK(original.backend_id == "scripted:a");
  CHECK(original.discovered_by == "scripted:a");

  SUBCASE("import preserves the structure body byte-exactly") {
    StructureCacheKey key_b = cache.import_structure(exported, "scripted:b");
    CHECK(key_b.backend_id == "scripted:b");
    StructureFile imported =
        parse_structure_file(read_file(cache.export_structure(key_b)), "imported");
    CHECK(imported.body == original.body);
    CHECK(imported.backend_id == "scripted:b");
    CHECK(imported.discovered_by == "scripted:a");

    auto cached = cache.get(key_b);
    REQUIRE(cached.has_value());
    REQUIRE(cached->structure.has_value());
    CHECK(serialize_structure(*cached->structure) == original.body);
  }
  SUBCASE("corrupted header is a provenance error") {
    std::string mangled = read_file(exported);
    mangled = replace_all(mangled, "\"task_id\"", "\"task_oops\"");
    write_file_atomic(tmp / "mangled.structure", mangled);
    try {
      cache.import_structure(tmp / "mangled.structure", "scripted:b");
      FAIL("expected provenance error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::provenance);
    }
  }
  SUBCASE("export of a missing entry is a lookup error") {
    CHECK_THROWS_AS(cache.export_structure(make_key("scripted:never")), Error);
  }
  SUBCASE("mode S records cache without a structure file") {
    StructureCacheKey key_s{"toy_sort", "scripted:a", "catfp", PipelineMode::S, "tmplfp"};
    DiscoveryRecord record = make_record("scripted:a", /*with_structure=*/false);
    record.mode = PipelineMode::S;
    cache.put(key_s, record);
    CHECK(cache.get(key_s).has_value());
    CHECK_THROWS_AS(cache.export_structure(key_s), Error);
  }
}

TEST_CASE("run records serialize deterministically") {
  RunRecord record;
  record.run_id = "run1";
  record.task_id = "toy";
  record.backend_id = "replay:x";
  record.method = Method::cot();
  record.started_at = record.finished_at = "1970-01-01T00:00:00Z";
  Solution s;
  s.instance_id = "toy-1";
  s.method = Method::cot();
  s.raw_output = "Thus, the final answer is a.";
  s.answer = "a";
  record.solutions.push_back(s);
  record.call_log.push_back({Purpose::baseline, "toy-1", 0, "h1", false, false});
  record.call_log.push_back({Purpose::select, "", 0, "h0", false, false});

  SUBCASE("round-trip through disk") {
    rwtest::TempDir tmp;
    record.discovery_primary_calls = 1;
    save_run_record(tmp / "run1", record);
    RunRecord back = load_run_record(tmp / "run1");
    CHECK(back.run_id == "run1");
    CHECK(back.method == Method::cot());
    REQUIRE(back.solutions.size() == 1);
    CHECK(back.solutions[0].answer == "a");
    CHECK(back.call_log.size() == 2);
    CHECK(serialize_run_record(back) == serialize_run_record(record));
  }
  SUBCASE("call log order is canonical regardless of append order") {
    RunRecord shuffled = record;
    std::swap(shuffled.call_log[0], shuffled.call_log[1]);
    CHECK(serialize_call_log(shuffled) == serialize_call_log(record));
    CHECK(serialize_call_log(record).find("\"seq\":1,\"purpose\":\"select\"") != std::string::npos);
  }
}

TEST_CASE("structure files survive CRLF mangling with the body normalized") {
  StructureFile file;
  file.task_id = "toy";
  file.backend_id = "scripted:a";
  file.discovered_by = "scripted:a";
  file.catalog_fingerprint = "c";
  file.template_fingerprint = "t";
  file.mode = PipelineMode::SAI;
  file.timestamp = "1970-01-01T00:00:00Z";
  file.body = serialize_structure(extract_structure("{\"step\": \"\"}"));

  std::string rendered = render_structure_file(file);
  std::string crlf = replace_all(rendered, "\n", "\r\n");
  StructureFile parsed = parse_structure_file(crlf, "crlf");
  CHECK(parsed.body == file.body);
  CHECK(parsed.task_id == "toy");
}

TEST_CASE("seeded subsampling is reproducible and order-preserving") {
  Task task = rwtest::make_task("big", 50);
  Task a = subsample_task(task, 10, 7);
  Task b = subsample_task(task, 10, 7);
  REQUIRE(a.instances.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(a.instances[i].instance_id == b.instances[i].instance_id);
  }
  // kept instances appear in original file order
  std::size_t cursor = 0;
  for (const auto& inst : a.instances) {
    while (cursor < task.instances.size() && task.instances[cursor].instance_id != inst.instance_id) {
      ++cursor;
    }
    REQUIRE(cursor < task.instances.size());
    ++cursor;
  }
  Task c = subsample_task(task, 10, 8);
  bool any_difference = false;
  for (std::size_t i = 0; i < 10; ++i) {
    any_difference = any_difference || c.instances[i].instance_id != a.instances[i].instance_id;
  }
  CHECK(any_difference);  // different seed, different draw
  CHECK_THROWS_AS(subsample_task(task, 0, 1), Error);
  CHECK_THROWS_AS(subsample_task(task, 51, 1), Error);
}

TEST_CASE("BBH-style JSON converts to the task format") {
  const std::string bbh = R"json({"examples": [
    {"input": "Which option?\n(A) x\n(B) y", "target": "(A)"},
    {"input": "Which option?\n(A) p\n(B) q", "target": "(B)"}
  ]})json";
  Task task = convert_bbh_json(bbh, "mini_mc");
  CHECK(task.task_id == "mini_mc");
  CHECK(task.answer_kind == AnswerKind::multiple_choice);
  REQUIRE(task.instances.size() == 2);
  CHECK(task.instances[0].target == "(A)");

  SUBCASE("free text targets switch the answer kind") {
    Task free = convert_bbh_json(R"({"examples": [{"input": "sort", "target": "a b"}]})", "mini_ft");
    CHECK(free.answer_kind == AnswerKind::free_text);
  }
  SUBCASE("directory conversion writes loadable tasks") {
    rwtest::TempDir tmp;
    std::filesystem::create_directories(tmp / "src");
    write_file_atomic(tmp / "src" / "mini.json", bbh);
    CHECK(ingest_bbh_dir(tmp / "src", tmp / "out") == 1);
    Task loaded = load_task(tmp / "out" / "mini.jsonl");
    CHECK(loaded.instances.size() == 2);
  }
}
