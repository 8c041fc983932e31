#include <insight/resources.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace insight::resources {

std::string_view get(std::string_view name) {
  for (const auto& f : detail::embedded_files()) {
    if (f.name == name) return f.contents;
  }
  throw std::out_of_range("no bundled resource named '" + std::string(name) + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace insight::resources
