#include "ragprobe/common/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "ragprobe/common/error.hpp"
#include "ragprobe/common/text.hpp"

namespace ragprobe {

void for_each_line(const std::filesystem::path& path, const std::function<void(const JsonlLine&)>& fn)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (text::trim(line).empty()) {
            continue;
        }
        fn(JsonlLine{n, line});
    }
}

std::vector<Json> read_jsonl(const std::filesystem::path& path)
{
    std::vector<Json> out;
    for_each_line(path, [&](const JsonlLine& l) {
        try {
            out.push_back(Json::parse(l.raw));
        } catch (const Json::parse_error& e) {
            throw SchemaError(path.string() + ":" + std::to_string(l.line_number) + ": malformed record: " + e.what());
        }
    });
    return out;
}

void append_jsonl(const std::filesystem::path& path, const Json& record)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) {
        throw IoError("cannot append to " + path.string());
    }
    // One write per record keeps each line intact under concurrent appenders in this process.
    const std::string line = record.dump() + "\n";
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
    out.flush();
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& records)
{
    std::string buf;
    for (const auto& r : records) {
        buf += r.dump();
        buf += '\n';
    }
    write_file_atomic(path, buf);
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write " + tmp.string());
        }
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) {
            throw IoError("write failed: " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

} // namespace ragprobe
