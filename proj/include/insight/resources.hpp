#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace insight::resources {

/// Returns a bundled data file by its path relative to `data/`
/// (e.g. "templates.json"). Throws std::out_of_range for unknown names.
std::string_view get(std::string_view name);

/// Reads a whole file from disk; throws std::runtime_error on failure.
std::string read_file(const std::string& path);

namespace detail {
struct EmbeddedFile {
  std::string_view name;
  std::string_view contents;
};
const std::vector<EmbeddedFile>& embedded_files();
}  // namespace detail

}  // namespace insight::resources
