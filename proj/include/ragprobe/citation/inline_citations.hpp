#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ragprobe::citation {

/// One removed citation marker. `removed` holds the exact bytes cut out
/// (including the whitespace taken with the marker), `clean_offset` is where
/// they were cut in the cleaned text.
struct MarkerRemoval {
    std::size_t clean_offset = 0;
    std::string removed;
    std::vector<int> ordinals;
};

struct InlineCitations {
    std::string clean_text;
    std::vector<int> ordinals; // sorted ascending, unique
    std::vector<MarkerRemoval> markers; // in text order
};

/// Recognises `[n]`, `[n, m]` and `[n-m]` markers. Brackets holding anything
/// else (e.g. `[sic]`) are left alone. The marker takes the horizontal
/// whitespace before it, or after it when nothing precedes it on the line.
InlineCitations parse_inline_citations(std::string_view text);

/// Inverse of parse_inline_citations: re-inserts every removed marker.
std::string reinsert_markers(std::string_view clean_text, const std::vector<MarkerRemoval>& markers);

} // namespace ragprobe::citation
