#include "reasonweaver/resources.hpp"

#include <cstdlib>

#include "reasonweaver/errors.hpp"
#include "reasonweaver/util.hpp"

#ifndef REASONWEAVER_BUNDLED_DATA_DIR
#define REASONWEAVER_BUNDLED_DATA_DIR ""
#endif

namespace rw {

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("REASONWEAVER_DATA_DIR"); env && *env) {
    return env;
  }
  std::filesystem::path compiled = REASONWEAVER_BUNDLED_DATA_DIR;
  if (!compiled.empty() && std::filesystem::is_directory(compiled)) return compiled;
  fail(ErrorKind::config, "bundled data directory not found; set REASONWEAVER_DATA_DIR");
}

std::filesystem::path bundled_catalog_path() { return data_dir() / "modules.jsonl"; }
std::filesystem::path bundled_templates_dir() { return data_dir() / "templates"; }
std::filesystem::path bundled_demo_path() { return data_dir() / "demo_structure.json"; }
std::filesystem::path bundled_taxonomy_path() { return data_dir() / "bbh_categories.json"; }
std::filesystem::path bundled_plan_and_solve_path() { return data_dir() / "templates" / "plan_and_solve.txt"; }
std::filesystem::path bundled_fixtures_dir() { return data_dir() / "fixtures"; }

ModuleCatalog default_catalog() { return load_catalog_file(bundled_catalog_path()); }
MetaPromptSet default_prompts() { return MetaPromptSet::load_dir(bundled_templates_dir()); }
DemoStructure default_demo() { return DemoStructure::load(bundled_demo_path()); }
CategoryTaxonomy default_taxonomy() { return CategoryTaxonomy::load(bundled_taxonomy_path()); }

std::string default_plan_and_solve_text() {
  return trim(read_file(bundled_plan_and_solve_path()));
}

}  // namespace rw
