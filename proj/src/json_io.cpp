#include "dsegym/json_io.hpp"

#include <cstdlib>
#include <fstream>

#include "dsegym/error.hpp"

#ifndef DSEGYM_DATA_DIR
#define DSEGYM_DATA_DIR "data"
#endif

namespace dsegym {

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& doc, int indent) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(indent) << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("DSEGYM_DATA"); env != nullptr && *env != '\0') return env;
  return DSEGYM_DATA_DIR;
}

}  // namespace dsegym
