#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace urbanrhythm::io {

// Shortest round-trip decimal representation; stable across runs.
std::string format_double(double value);

std::vector<std::string_view> split(std::string_view line, char delimiter);
std::string_view trim(std::string_view text);

bool parse_int64(std::string_view text, std::int64_t& out);
bool parse_double(std::string_view text, double& out);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace urbanrhythm::io
