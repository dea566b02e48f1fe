#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace tqd::io {

/// Whole-file read; throws Error(Io) naming the path on failure.
std::string read_text(const std::filesystem::path& path);

/// Writes bytes, creating parent directories.
void write_text(const std::filesystem::path& path, std::string_view content);

/// 64-bit FNV-1a, used for run ids.
std::uint64_t fnv1a(std::string_view bytes);

std::string hex64(std::uint64_t value);

}  // namespace tqd::io
