#include "ragprobe/citation/inline_citations.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

namespace ragprobe::citation {
namespace {

constexpr int kMaxOrdinal = 999;
constexpr int kMaxRangeSpan = 100;

bool is_hspace(char c) { return c == ' ' || c == '\t'; }

std::optional<int> read_int(std::string_view s, std::size_t& i)
{
    const std::size_t start = i;
    int v = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])) && i - start < 4) {
        v = v * 10 + (s[i] - '0');
        ++i;
    }
    if (i == start || v < 1 || v > kMaxOrdinal) return std::nullopt;
    return v;
}

void skip_hspace(std::string_view s, std::size_t& i)
{
    while (i < s.size() && is_hspace(s[i])) ++i;
}

/// Reads the inside of a bracket (without brackets). Returns nullopt for
/// anything that is not a list of ordinals and ranges.
std::optional<std::vector<int>> parse_marker_body(std::string_view body)
{
    std::vector<int> out;
    std::size_t i = 0;
    skip_hspace(body, i);
    while (true) {
        auto a = read_int(body, i);
        if (!a) return std::nullopt;
        skip_hspace(body, i);
        int b = *a;
        if (i < body.size() && (body[i] == '-' || body.substr(i).starts_with("\xE2\x80\x93"))) {
            i += body[i] == '-' ? 1 : 3;
            skip_hspace(body, i);
            auto hi = read_int(body, i);
            if (!hi || *hi < *a || *hi - *a > kMaxRangeSpan) return std::nullopt;
            b = *hi;
            skip_hspace(body, i);
        }
        for (int v = *a; v <= b; ++v) out.push_back(v);
        if (i == body.size()) break;
        if (body[i] != ',' && body[i] != ';') return std::nullopt;
        ++i;
        skip_hspace(body, i);
    }
    return out;
}

} // namespace

InlineCitations parse_inline_citations(std::string_view text)
{
    InlineCitations out;
    out.clean_text.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '[') {
            out.clean_text.push_back(text[i++]);
            continue;
        }
        const auto close = text.find(']', i + 1);
        if (close == std::string_view::npos) {
            out.clean_text.append(text.substr(i));
            break;
        }
        auto ords = parse_marker_body(text.substr(i + 1, close - i - 1));
        if (!ords) {
            out.clean_text.push_back(text[i++]);
            continue;
        }

        MarkerRemoval m;
        m.ordinals = std::move(*ords);
        // Take the horizontal whitespace already emitted before the marker.
        std::size_t ws = 0;
        while (ws < out.clean_text.size() && is_hspace(out.clean_text[out.clean_text.size() - 1 - ws])) ++ws;
        const bool at_line_start =
            out.clean_text.size() == ws || out.clean_text[out.clean_text.size() - 1 - ws] == '\n';
        std::string removed;
        std::size_t end = close + 1;
        if (at_line_start) {
            removed.assign(text.substr(i, end - i));
            while (end < text.size() && is_hspace(text[end])) removed.push_back(text[end++]);
        } else {
            removed = out.clean_text.substr(out.clean_text.size() - ws);
            out.clean_text.resize(out.clean_text.size() - ws);
            removed.append(text.substr(i, end - i));
        }
        m.clean_offset = out.clean_text.size();
        m.removed = std::move(removed);
        out.ordinals.insert(out.ordinals.end(), m.ordinals.begin(), m.ordinals.end());
        out.markers.push_back(std::move(m));
        i = end;
    }
    std::sort(out.ordinals.begin(), out.ordinals.end());
    out.ordinals.erase(std::unique(out.ordinals.begin(), out.ordinals.end()), out.ordinals.end());
    return out;
}

std::string reinsert_markers(std::string_view clean_text, const std::vector<MarkerRemoval>& markers)
{
    std::string out;
    out.reserve(clean_text.size() + markers.size() * 5);
    std::size_t cursor = 0;
    for (const auto& m : markers) {
        const std::size_t at = std::min(m.clean_offset, clean_text.size());
        if (at > cursor) {
            out.append(clean_text.substr(cursor, at - cursor));
            cursor = at;
        }
        out.append(m.removed);
    }
    out.append(clean_text.substr(cursor));
    return out;
}

} // namespace ragprobe::citation
