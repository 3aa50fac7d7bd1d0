#pragma once

#include "ragprobe/llm/validators.hpp"

namespace ragprobe::citation {

/// The output has a reference section with at least one numbered entry.
llm::Validator reference_section_present();

/// Non-empty output; when the body carries inline citations, a parseable
/// reference section must be present too.
llm::Validator citations_resolvable();

} // namespace ragprobe::citation
