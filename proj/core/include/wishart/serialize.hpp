#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wishart {

// Shared CSV plumbing: writers format with max_digits10 round-trip precision
// and '\n' line endings so identical inputs reproduce byte-identical files.
std::string format_double(double v);
void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<std::string>>& rows);

// FNV-1a over a canonical rendering of the effective config (volatile fields
// such as generation timestamps excluded by the caller).
std::uint64_t fnv1a_hash(const std::string& data);
std::string hex64(std::uint64_t v);

void ensure_directory(const std::string& path);

} // namespace wishart
