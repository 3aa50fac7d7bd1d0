#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ragprobe {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

struct JsonlLine {
    std::size_t line_number = 0; // 1-based
    std::string raw;
};

/// Calls `fn` for every non-blank line of a line-delimited record file.
/// Throws IoError if the file cannot be opened.
void for_each_line(const std::filesystem::path& path, const std::function<void(const JsonlLine&)>& fn);

/// Parses every non-blank line as JSON. Throws SchemaError naming the first malformed line.
std::vector<Json> read_jsonl(const std::filesystem::path& path);

/// Appends one record (compact, newline-terminated) and flushes.
void append_jsonl(const std::filesystem::path& path, const Json& record);

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& records);

std::string read_file(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames, so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

} // namespace ragprobe
