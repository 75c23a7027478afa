#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "reasonweaver/backend.hpp"

namespace rw {

/// Exit codes: scripts can branch on replay gaps.
inline constexpr int kExitOk = 0;
inline constexpr int kExitPipeline = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitFixtureMiss = 3;

/// Resolved run configuration. Precedence: flags > config file > environment
/// > defaults.
struct RunConfig {
  std::map<std::string, BackendDescriptor> backends;  // named live/replay backends
  std::filesystem::path modules_path;                 // empty -> bundled catalog
  std::filesystem::path templates_dir;                // empty -> bundled templates
  std::filesystem::path demo_path;                    // empty -> bundled demo
  std::filesystem::path cache_root = ".";             // structures/ live here
  int k = 10;
  int parallelism = 1;
  int max_attempts = 3;  // per-stage retry budget R
  int num_examples = 3;
  double greedy_temperature = 0.0;
  double sampling_temperature = 0.7;
  int max_output = 2048;
  bool canonical_timestamps = false;
  bool random_examples = false;  // seed-controlled example choice for discovery
  std::uint64_t seed = 0;

  void validate() const;
  void apply_config_file(const std::filesystem::path& path);

  BackendDescriptor resolve_backend(const std::string& spec) const;
};

/// Entry point behind the `reasonweaver` binary; also called in-process by
/// tests. argv excludes the program name.
int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace rw
