#pragma once

#include <filesystem>
#include <string_view>

namespace lolo::io {

/// Write `content` to `<path>.tmp` and rename it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace lolo::io
