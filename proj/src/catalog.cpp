#include "reasonweaver/catalog.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "reasonweaver/digest.hpp"
#include "reasonweaver/errors.hpp"
#include "reasonweaver/util.hpp"

namespace rw {

using ordered_json = nlohmann::ordered_json;

ModuleCatalog ModuleCatalog::from_modules(std::vector<ReasoningModule> modules) {
  int previous_id = 0;
  std::set<int> seen;
  for (const auto& m : modules) {
    if (m.id <= 0) fail(ErrorKind::validation, "module id must be positive, got " + std::to_string(m.id));
    if (!seen.insert(m.id).second) fail(ErrorKind::validation, "duplicate module id " + std::to_string(m.id));
    if (m.id <= previous_id) {
      fail(ErrorKind::validation, "module ids must be strictly increasing, got " + std::to_string(m.id) +
                                      " after " + std::to_string(previous_id));
    }
    if (trim(m.description).empty()) {
      fail(ErrorKind::validation, "module " + std::to_string(m.id) + " has an empty description");
    }
    previous_id = m.id;
  }
  ModuleCatalog catalog;
  catalog.modules_ = std::move(modules);
  catalog.fingerprint_ = sha256_hex(catalog.save());
  return catalog;
}

bool ModuleCatalog::has_id(int id) const {
  return std::any_of(modules_.begin(), modules_.end(), [&](const auto& m) { return m.id == id; });
}

const ReasoningModule& ModuleCatalog::by_id(int id) const {
  for (const auto& m : modules_) {
    if (m.id == id) return m;
  }
  fail(ErrorKind::lookup, "missing: " + std::to_string(id));
}

ModuleCatalog ModuleCatalog::subset(const std::vector<int>& ids) const {
  std::set<int> wanted(ids.begin(), ids.end());
  std::vector<int> missing;
  for (int id : wanted) {
    if (!has_id(id)) missing.push_back(id);
  }
  if (!missing.empty()) {
    std::string msg = "missing:";
    for (int id : missing) msg += " " + std::to_string(id);
    fail(ErrorKind::lookup, msg);
  }
  std::vector<ReasoningModule> picked;
  for (const auto& m : modules_) {
    if (wanted.count(m.id) != 0) picked.push_back(m);
  }
  return from_modules(std::move(picked));
}

std::string ModuleCatalog::save() const {
  std::string out;
  for (const auto& m : modules_) {
    ordered_json record;
    record["id"] = m.id;
    record["description"] = m.description;
    out += record.dump();
    out.push_back('\n');
  }
  return out;
}

ModuleCatalog load_catalog(const std::string& document) {
  std::vector<ReasoningModule> modules;
  std::set<int> seen;
  const auto lines = split_lines(document);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    ordered_json record;
    try {
      record = ordered_json::parse(lines[i]);
    } catch (const ordered_json::parse_error& e) {
      fail(ErrorKind::format, "line " + std::to_string(i + 1) + ": " + e.what());
    }
    if (!record.is_object() || !record.contains("id") || !record.contains("description")) {
      fail(ErrorKind::format, "line " + std::to_string(i + 1) + ": expected fields id and description");
    }
    if (!record["id"].is_number_integer() || !record["description"].is_string()) {
      fail(ErrorKind::format, "line " + std::to_string(i + 1) + ": id must be an integer, description a string");
    }
    ReasoningModule m{record["id"].get<int>(), record["description"].get<std::string>()};
    if (!seen.insert(m.id).second) {
      fail(ErrorKind::validation, "line " + std::to_string(i + 1) + ": duplicate id " + std::to_string(m.id));
    }
    modules.push_back(std::move(m));
  }
  return ModuleCatalog::from_modules(std::move(modules));
}

ModuleCatalog load_catalog_file(const std::filesystem::path& path) {
  return load_catalog(read_file(path));
}

std::string render_modules(const ModuleCatalog& catalog) {
  if (catalog.empty()) fail(ErrorKind::empty_input, "cannot render an empty catalog");
  std::string out;
  for (const auto& m : catalog.modules()) {
    out += std::to_string(m.id);
    out += ". ";
    out += m.description;
    out.push_back('\n');
  }
  return out;
}

}  // namespace rw
