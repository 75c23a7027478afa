#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace rw {

/// One atomic problem-solving heuristic from the seed catalog.
struct ReasoningModule {
  int id = 0;               // 1-based, unique within a catalog
  std::string description;  // non-empty after trimming
};

/// Immutable, ordered set of reasoning modules. Safe to share across threads
/// once constructed.
class ModuleCatalog {
 public:
  ModuleCatalog() = default;

  /// Validates ids (strictly increasing, unique) and descriptions (non-empty).
  static ModuleCatalog from_modules(std::vector<ReasoningModule> modules);

  const std::vector<ReasoningModule>& modules() const { return modules_; }
  std::size_t size() const { return modules_.size(); }
  bool empty() const { return modules_.empty(); }
  const std::string& fingerprint() const { return fingerprint_; }

  bool has_id(int id) const;
  const ReasoningModule& by_id(int id) const;

  /// Catalog-order restriction to `ids`. Unknown ids raise a lookup error
  /// listing every missing id.
  ModuleCatalog subset(const std::vector<int>& ids) const;

  /// Canonical JSON-lines document; load_catalog round-trips it byte-exactly.
  std::string save() const;

 private:
  std::vector<ReasoningModule> modules_;
  std::string fingerprint_;
};

/// Parses a JSON-lines catalog document (one {"id":..,"description":..} per
/// line; blank lines ignored).
ModuleCatalog load_catalog(const std::string& document);
ModuleCatalog load_catalog_file(const std::filesystem::path& path);

/// "<id>. <description>\n" per module, document order.
std::string render_modules(const ModuleCatalog& catalog);

}  // namespace rw
