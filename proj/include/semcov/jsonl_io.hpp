#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace semcov {

using Json = nlohmann::json;

/// Reads a file and invokes `fn(line_number, parsed_json)` per non-empty line.
/// Line numbers are 1-based. Throws ValidationError on unreadable files or
/// malformed JSON, naming the offending line.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t, const Json&)>& fn);

std::vector<Json> read_jsonl(const std::filesystem::path& path);

/// Writes content to path atomically (write temp file in the same directory,
/// then rename over the target).
void atomic_write(const std::filesystem::path& path, const std::string& content);

/// Serializes one JSON value per line (trailing newline included) and writes
/// the result atomically.
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& lines);

std::string read_file(const std::filesystem::path& path);

} // namespace semcov
