#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "sgid/graph.hpp"

namespace sgid::testing {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string data_path(const std::string& name) { return std::string(SGID_DATA_DIR) + "/" + name; }

inline MixedGraph load_fixture(const std::string& name) { return parse_graph(read_file(data_path(name))); }

}  // namespace sgid::testing
