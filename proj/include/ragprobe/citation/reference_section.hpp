#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ragprobe/citation/types.hpp"

namespace ragprobe::citation {

struct ReferenceSection {
    std::vector<Reference> references; // origin unresolved
    bool missing_section = false;
    std::vector<std::string> warnings; // duplicate / non-consecutive ordinals
    std::size_t heading_offset = 0;    // start of the heading line; text size when missing
};

/// Locates the last "References" heading (markdown `#` heading, bold or a
/// bare "References:" line) and reads the numbered entries below it.
/// Accepts `1.`, `[1]` and `1)` numbering; unnumbered lines continue the
/// previous entry. Duplicate ordinals keep the first entry.
ReferenceSection parse_reference_section(std::string_view response_text);

/// Response text before the reference section, trailing whitespace removed.
std::string response_body(std::string_view response_text);

/// Raw text of the section (heading included), or empty when absent.
std::string reference_section_text(std::string_view response_text);

/// "### References\n\n1. ...\n2. ...\n"
std::string render_reference_section(const std::vector<Reference>& refs);

} // namespace ragprobe::citation
