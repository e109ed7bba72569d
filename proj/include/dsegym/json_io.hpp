#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace dsegym {

// Key order is preserved so emitted documents are byte-stable.
using Json = nlohmann::ordered_json;

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& doc, int indent = 2);

// Directory holding the shipped fixtures (env models, grids, mixtures).
// DSEGYM_DATA in the environment overrides the compiled-in default.
std::filesystem::path data_dir();

}  // namespace dsegym
