#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "pirates/common/errors.hpp"
#include "pirates/nodes/node.hpp"

namespace pirates::tools {

inline void write_port_file(const std::string& path, std::uint16_t port) {
  const auto tmp = path + ".tmp";
  {
    std::ofstream f(tmp);
    if (!(f << port << "\n")) throw Error(ErrorCode::IoError, "cannot write " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

// Writes the node log to `path`, or to `dir/<name>.jsonl` when only a
// directory is given.
inline void save_log(const nodes::Recorder& rec, const std::string& name, const std::string& path,
                     const std::string& dir) {
  if (!path.empty()) {
    rec.write_jsonl(path, name);
  } else if (!dir.empty()) {
    std::filesystem::create_directories(dir);
    rec.write_jsonl((std::filesystem::path(dir) / (name + ".jsonl")).string(), name);
  }
}

template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace pirates::tools
