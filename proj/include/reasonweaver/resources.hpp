#pragma once

#include <filesystem>
#include <string>

#include "reasonweaver/catalog.hpp"
#include "reasonweaver/discovery.hpp"
#include "reasonweaver/evaluation.hpp"

namespace rw {

/// Root of the bundled data files. REASONWEAVER_DATA_DIR overrides the
/// compiled-in location.
std::filesystem::path data_dir();

std::filesystem::path bundled_catalog_path();
std::filesystem::path bundled_templates_dir();
std::filesystem::path bundled_demo_path();
std::filesystem::path bundled_taxonomy_path();
std::filesystem::path bundled_plan_and_solve_path();
std::filesystem::path bundled_fixtures_dir();

ModuleCatalog default_catalog();
MetaPromptSet default_prompts();
DemoStructure default_demo();
CategoryTaxonomy default_taxonomy();
std::string default_plan_and_solve_text();

}  // namespace rw
