#include "ragprobe/citation/reference_section.hpp"

#include <regex>
#include <set>

#include "ragprobe/common/text.hpp"

namespace ragprobe::citation {
namespace {

const std::regex& heading_re()
{
    static const std::regex re(
        R"(^[ \t]{0,3}(?:#{1,6}[ \t]*(?:\*\*)?references?(?:\*\*)?[ \t]*[:,.]?[ \t]*#*|\*\*references?[ \t]*:?\*\*[ \t]*:?|references?[ \t]*:?)[ \t]*$)",
        std::regex::icase);
    return re;
}

const std::regex& entry_re()
{
    static const std::regex re(R"(^[ \t]*(?:[-*][ \t]+)?(?:\[(\d{1,3})\][ \t]*|(\d{1,3})[.)](?:[ \t]+|$))(.*)$)");
    return re;
}

struct Line {
    std::size_t offset;
    std::string_view text;
};

std::vector<Line> lines_of(std::string_view s)
{
    std::vector<Line> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        auto nl = s.find('\n', pos);
        if (nl == std::string_view::npos) nl = s.size();
        std::string_view line = s.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        out.push_back({pos, line});
        if (nl == s.size()) break;
        pos = nl + 1;
    }
    return out;
}

std::optional<std::size_t> find_heading(const std::vector<Line>& lines)
{
    std::optional<std::size_t> found;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string line(lines[i].text);
        if (std::regex_match(line, heading_re())) found = i;
    }
    return found;
}

std::string_view rtrim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

} // namespace

ReferenceSection parse_reference_section(std::string_view response_text)
{
    ReferenceSection out;
    const auto lines = lines_of(response_text);
    const auto heading = find_heading(lines);
    if (!heading) {
        out.missing_section = true;
        out.heading_offset = response_text.size();
        return out;
    }
    out.heading_offset = lines[*heading].offset;

    std::set<int> seen;
    Reference* current = nullptr;
    bool skipping_duplicate = false;
    for (std::size_t i = *heading + 1; i < lines.size(); ++i) {
        const std::string_view raw = lines[i].text;
        const std::string_view t = text::trim(raw);
        if (t.empty()) continue;
        if (t.front() == '#') break;
        const std::string line(raw);
        std::smatch m;
        if (std::regex_match(line, m, entry_re())) {
            const int ordinal = std::stoi(m[1].matched ? m[1].str() : m[2].str());
            const std::string body(text::trim(m[3].str()));
            if (!seen.insert(ordinal).second) {
                out.warnings.push_back("duplicate reference ordinal " + std::to_string(ordinal) +
                                       " (first entry kept)");
                current = nullptr;
                skipping_duplicate = true;
                continue;
            }
            skipping_duplicate = false;
            Reference ref;
            ref.ordinal = ordinal;
            ref.raw_text = body;
            out.references.push_back(std::move(ref));
            current = &out.references.back();
            continue;
        }
        if (current) {
            if (!current->raw_text.empty()) current->raw_text += ' ';
            current->raw_text += std::string(t);
        } else if (!skipping_duplicate && out.references.empty()) {
            out.warnings.push_back("unnumbered line in reference section ignored: " + std::string(t.substr(0, 60)));
        }
    }

    int expected = 1;
    for (const auto& r : out.references) {
        if (r.ordinal != expected) {
            out.warnings.push_back("non-consecutive reference ordinal: expected " + std::to_string(expected) +
                                   ", found " + std::to_string(r.ordinal));
        }
        expected = r.ordinal + 1;
    }
    return out;
}

std::string response_body(std::string_view response_text)
{
    const auto section = parse_reference_section(response_text);
    return std::string(rtrim(response_text.substr(0, section.heading_offset)));
}

std::string reference_section_text(std::string_view response_text)
{
    const auto section = parse_reference_section(response_text);
    if (section.missing_section) return {};
    return std::string(rtrim(response_text.substr(section.heading_offset)));
}

std::string render_reference_section(const std::vector<Reference>& refs)
{
    std::string out = "### References\n\n";
    for (const auto& r : refs) {
        out += std::to_string(r.ordinal);
        out += ". ";
        out += r.raw_text;
        out += '\n';
    }
    return out;
}

} // namespace ragprobe::citation
