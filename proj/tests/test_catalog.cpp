#include <doctest.h>

#include <random>
#include <set>

#include "reasonweaver/catalog.hpp"
#include "reasonweaver/errors.hpp"
#include "reasonweaver/resources.hpp"
#include "reasonweaver/util.hpp"

using namespace rw;

TEST_CASE("bundled catalog has the full 39-module seed set") {
  ModuleCatalog catalog = default_catalog();
  CHECK(catalog.size() == 39);
  CHECK(catalog.by_id(10).description.find("Critical Thinking") == 0);
  CHECK(catalog.by_id(38).description == "Let's think step by step.");
  CHECK(catalog.by_id(15).description.find("Use Reflective Thinking") == 0);
}

TEST_CASE("load_catalog parses documents and reports malformed input") {
  ModuleCatalog two = load_catalog("{\"id\":1,\"description\":\"a\"}\n{\"id\":2,\"description\":\"b\"}\n");
  CHECK(two.size() == 2);
  std::string fingerprint = two.fingerprint();
  ModuleCatalog again = load_catalog(two.save());
  CHECK(again.fingerprint() == fingerprint);

  SUBCASE("duplicate id") {
    CHECK_THROWS_WITH_AS(load_catalog("{\"id\":1,\"description\":\"a\"}\n{\"id\":1,\"description\":\"b\"}\n"),
                         doctest::Contains("duplicate id 1"), Error);
  }
  SUBCASE("malformed line is named") {
    try {
      load_catalog("{\"id\":1,\"description\":\"a\"}\nnot json\n");
      FAIL("expected a format error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::format);
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("ids must increase") {
    CHECK_THROWS_AS(load_catalog("{\"id\":2,\"description\":\"a\"}\n{\"id\":1,\"description\":\"b\"}\n"),
                    Error);
  }
}

TEST_CASE("save round-trips byte-identically for canonical documents") {
  ModuleCatalog catalog = default_catalog();
  std::string saved = catalog.save();
  ModuleCatalog reloaded = load_catalog(saved);
  CHECK(reloaded.save() == saved);
  CHECK(reloaded.fingerprint() == catalog.fingerprint());
}

TEST_CASE("subset restricts in catalog order") {
  ModuleCatalog catalog = default_catalog();

  SUBCASE("singleton 38") {
    ModuleCatalog one = catalog.subset({38});
    REQUIRE(one.size() == 1);
    CHECK(one.modules()[0].description == "Let's think step by step.");
    CHECK(one.fingerprint() != catalog.fingerprint());
  }
  SUBCASE("identity subset equals input modulo fingerprint recomputation") {
    std::vector<int> all;
    for (const auto& m : catalog.modules()) all.push_back(m.id);
    ModuleCatalog same = catalog.subset(all);
    REQUIRE(same.size() == catalog.size());
    for (std::size_t i = 0; i < same.size(); ++i) {
      CHECK(same.modules()[i].id == catalog.modules()[i].id);
      CHECK(same.modules()[i].description == catalog.modules()[i].description);
    }
    CHECK(same.fingerprint() == catalog.fingerprint());
  }
  SUBCASE("unknown ids are listed") {
    ModuleCatalog two = load_catalog("{\"id\":1,\"description\":\"a\"}\n{\"id\":2,\"description\":\"b\"}\n");
    CHECK_THROWS_WITH_AS(two.subset({7}), doctest::Contains("missing: 7"), Error);
  }
}

TEST_CASE("subset yields a subsequence of the source catalog") {
  ModuleCatalog catalog = default_catalog();
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> id_dist(1, 39);
  for (int round = 0; round < 50; ++round) {
    std::set<int> wanted;
    int n = 1 + static_cast<int>(rng() % 10);
    for (int i = 0; i < n; ++i) wanted.insert(id_dist(rng));
    ModuleCatalog sub = catalog.subset({wanted.begin(), wanted.end()});
    // subsequence check: every picked module appears in source order
    std::size_t cursor = 0;
    for (const auto& m : sub.modules()) {
      while (cursor < catalog.size() && catalog.modules()[cursor].id != m.id) ++cursor;
      REQUIRE(cursor < catalog.size());
      CHECK(catalog.modules()[cursor].description == m.description);
      ++cursor;
    }
  }
}

TEST_CASE("render_modules formats one line per module") {
  CHECK(render_modules(load_catalog("{\"id\":1,\"description\":\"x\"}\n")) == "1. x\n");
  CHECK(render_modules(load_catalog("{\"id\":1,\"description\":\"x\"}\n{\"id\":2,\"description\":\"y\"}\n")) ==
        "1. x\n2. y\n");

  ModuleCatalog catalog = default_catalog();
  auto lines = split_lines(render_modules(catalog));
  REQUIRE(lines.size() >= 10);
  CHECK(lines[9].rfind("10. Critical Thinking", 0) == 0);

  SUBCASE("empty catalog refuses to render") {
    CHECK_THROWS_AS(render_modules(ModuleCatalog()), Error);
  }
  SUBCASE("render is injective on differing descriptions") {
    ModuleCatalog a = load_catalog("{\"id\":1,\"description\":\"x\"}\n");
    ModuleCatalog b = load_catalog("{\"id\":1,\"description\":\"y\"}\n");
    CHECK(render_modules(a) != render_modules(b));
  }
}

TEST_CASE("fingerprint tracks content") {
  ModuleCatalog a = load_catalog("{\"id\":1,\"description\":\"x\"}\n{\"id\":2,\"description\":\"y\"}\n");
  ModuleCatalog changed = load_catalog("{\"id\":1,\"description\":\"x!\"}\n{\"id\":2,\"description\":\"y\"}\n");
  CHECK(a.fingerprint() != changed.fingerprint());
}
