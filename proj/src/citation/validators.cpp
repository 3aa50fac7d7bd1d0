#include "ragprobe/citation/validators.hpp"

#include "ragprobe/citation/inline_citations.hpp"
#include "ragprobe/citation/reference_section.hpp"
#include "ragprobe/common/text.hpp"

namespace ragprobe::citation {

llm::Validator reference_section_present()
{
    return {"reference-section-present",
            [](std::string_view s) { return !parse_reference_section(s).references.empty(); }};
}

llm::Validator citations_resolvable()
{
    return {"citations-resolvable", [](std::string_view s) {
                if (text::trim(s).empty()) return false;
                const auto section = parse_reference_section(s);
                const auto body = parse_inline_citations(s.substr(0, section.heading_offset));
                return body.markers.empty() || !section.references.empty();
            }};
}

} // namespace ragprobe::citation
