#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "mpc/data.hpp"

namespace mpc::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Runs one `mpc` invocation. Errors are reported on `err` and mapped to exit
// codes: 2 usage/config, 3 data/format, 4 numeric.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct GenDataOptions {
  std::vector<std::string> families;
  std::vector<std::size_t> counts;  // one per family, or a single count for all
  std::vector<data::PartialMethod> methods;
  std::uint64_t seed = 0;
};

struct GeneratedData {
  std::vector<data::ShapeRecord> completes;
  std::vector<data::PartialRecord> partials;  // one per shape and method
};

// Shape i of a family uses seed * 1000000 + i, so ids read "family:<n>".
GeneratedData generate_data(const GenDataOptions& options);

// Resolves a checkpoint directory, or a run directory holding last.json.
std::filesystem::path resolve_checkpoint(const std::filesystem::path& path);

// Orthographic scatter of `cloud` (and optionally `overlay`, drawn gray on
// top) projected onto the given axes as a standalone SVG document.
std::string render_svg(const geometry::PointCloud& cloud, const geometry::PointCloud* overlay, int axis_u,
                       int axis_v, const std::string& title);

// Common manifest fields; callers add command specific ones.
nlohmann::json run_manifest(const std::string& command, const std::vector<std::string>& args);
std::string json_hash(const nlohmann::json& j);
std::string utc_now();

}  // namespace mpc::cli
