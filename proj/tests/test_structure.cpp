#include <doctest.h>

#include <random>

#include "reasonweaver/errors.hpp"
#include "reasonweaver/structure.hpp"
#include "test_support.hpp"

using namespace rw;

TEST_CASE("extraction finds the first balanced key-value block") {
  SUBCASE("prose around a single block") {
    ReasoningStructure s = extract_structure("Here is the plan: {\"step 1\": \"\"} Done.");
    REQUIRE(s.steps().size() == 1);
    CHECK(s.steps()[0].first == "step 1");
    CHECK(s.steps()[0].second.value() == "");
  }
  SUBCASE("nesting preserved") {
    ReasoningStructure s = extract_structure("{\"a\": {\"b\": \"\"}}");
    REQUIRE(s.steps().size() == 1);
    REQUIRE(s.steps()[0].second.is_map());
    CHECK(s.steps()[0].second.entries()[0].first == "b");
  }
  SUBCASE("no braces at all") {
    CHECK_THROWS_AS(extract_structure("no braces at all"), Error);
    try {
      extract_structure("no braces at all");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::extraction);
      CHECK(std::string(e.what()).find("no braces at all") != std::string::npos);
    }
  }
  SUBCASE("earlier unparseable block is skipped") {
    ReasoningStructure s = extract_structure("set {x} then {\"a\": \"\"} trailing");
    REQUIRE(s.steps().size() == 1);
    CHECK(s.steps()[0].first == "a");
  }
  SUBCASE("balanced but not key-value shaped") {
    try {
      extract_structure("the set {1, 2, 3} is small");
      FAIL("expected a shape error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::shape);
    }
  }
  SUBCASE("arrays are rejected, later object wins") {
    ReasoningStructure s = extract_structure("{\"a\": [1]} then {\"b\": \"\"}");
    CHECK(s.steps()[0].first == "b");
  }
  SUBCASE("fenced code block fallback") {
    ReasoningStructure s = extract_structure("```json\n{\"fenced\": \"\"}\n```");
    CHECK(s.steps()[0].first == "fenced");
  }
  SUBCASE("empty root object is not a structure") {
    CHECK_THROWS_AS(extract_structure("{}"), Error);
  }
  SUBCASE("braces inside strings do not confuse the scanner") {
    ReasoningStructure s = extract_structure("{\"key with } brace\": \"value { brace\"}");
    CHECK(s.steps()[0].first == "key with } brace");
    CHECK(s.steps()[0].second.value() == "value { brace");
  }
  SUBCASE("scalars coerce to their token text") {
    ReasoningStructure s = extract_structure("{\"n\": 3, \"f\": 1.50, \"b\": true, \"z\": null}");
    CHECK(s.steps()[0].second.value() == "3");
    CHECK(s.steps()[1].second.value() == "1.50");
    CHECK(s.steps()[2].second.value() == "true");
    CHECK(s.steps()[3].second.value() == "null");
  }
  SUBCASE("duplicate sibling keys survive extraction for validation to flag") {
    ReasoningStructure s = extract_structure("{\"a\": \"1\", \"a\": \"2\"}");
    CHECK(s.steps().size() == 2);
    CHECK_FALSE(validate_structure(s).valid);
  }
}

TEST_CASE("extraction is deterministic") {
  const std::string raw = "one {\"a\": \"\"} two {\"b\": \"\"}";
  CHECK(extract_structure(raw) == extract_structure(raw));
  CHECK(extract_structure(raw).steps()[0].first == "a");
}

TEST_CASE("serialization is canonical") {
  SUBCASE("one-key structure has exactly one key line") {
    ReasoningStructure s({{"a", StructureNode::text("")}});
    CHECK(serialize_structure(s) == "{\n  \"a\": \"\"\n}\n");
  }
  SUBCASE("insertion order is preserved") {
    ReasoningStructure s({{"k2", StructureNode::text("")}, {"k1", StructureNode::text("")}});
    std::string text = serialize_structure(s);
    CHECK(text.find("k2") < text.find("k1"));
  }
  SUBCASE("serialize after extract is idempotent") {
    const std::string raw = "prefix {\"a\": {\"b\": \"v\"}, \"c\": \"\"} suffix";
    std::string once = serialize_structure(extract_structure(raw));
    CHECK(serialize_structure(extract_structure(once)) == once);
  }
}

TEST_CASE("round-trip property: extract(serialize(s)) == s") {
  std::mt19937_64 rng(20240131);
  for (int i = 0; i < 200; ++i) {
    ReasoningStructure s = rwtest::random_structure(rng);
    ReasoningStructure back = extract_structure(serialize_structure(s));
    REQUIRE(back == s);
  }
}

TEST_CASE("validation reports issues without throwing") {
  SUBCASE("valid single step") {
    CHECK(validate_structure(ReasoningStructure({{"a", StructureNode::text("")}})).valid);
  }
  SUBCASE("empty key at root") {
    auto report = validate_structure(ReasoningStructure({{"", StructureNode::text("")}}));
    REQUIRE_FALSE(report.valid);
    CHECK(report.issues[0].path == "/");
    CHECK(report.issues[0].message == "empty key");
  }
  SUBCASE("empty nested map") {
    auto report = validate_structure(ReasoningStructure({{"a", StructureNode::map({})}}));
    REQUIRE_FALSE(report.valid);
    CHECK(report.issues[0].path == "/a");
    CHECK(report.issues[0].message == "empty nested map");
  }
  SUBCASE("duplicate sibling keys") {
    auto report = validate_structure(
        ReasoningStructure({{"a", StructureNode::text("")}, {"a", StructureNode::text("")}}));
    REQUIRE_FALSE(report.valid);
    CHECK(report.issues[0].message == "duplicate key \"a\"");
  }
  SUBCASE("nested paths") {
    auto report = validate_structure(
        ReasoningStructure({{"a", StructureNode::map({{"b", StructureNode::map({})}})}}));
    REQUIRE_FALSE(report.valid);
    CHECK(report.issues[0].path == "/a/b");
  }
  SUBCASE("empty structure") {
    auto report = validate_structure(ReasoningStructure(StructureNode::Entries{}));
    REQUIRE_FALSE(report.valid);
    CHECK(report.issues[0].path == "/");
  }
}

TEST_CASE("unicode escapes parse to UTF-8") {
  ReasoningStructure s = extract_structure(R"({"café": "€", "pair": "😀"})");
  CHECK(s.steps()[0].first == "caf\xc3\xa9");
  CHECK(s.steps()[0].second.value() == "\xe2\x82\xac");
  CHECK(s.steps()[1].second.value() == "\xf0\x9f\x98\x80");
}
