#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "ragprobe/common/jsonl.hpp"

namespace ragprobe::llm {

inline constexpr int kDefaultMaxTokens = 2048;

struct SamplingParams {
    double temperature = 0.0;
    double top_p = 1.0;
    int max_tokens = kDefaultMaxTokens;
    std::optional<std::int64_t> seed;

    bool operator==(const SamplingParams&) const = default;
};

/// Throws InvalidArgument if temperature < 0, top_p outside (0, 1] or max_tokens < 1.
void validate(const SamplingParams& p);

/// Named sampling profiles:
///   "primary"        temperature 0.8 (proprietary response model)
///   "open"           temperature 1.0, top_p 0.9 (open-weights response model)
///   "deterministic"  temperature 0 (extraction, classification and alignment prompts)
SamplingParams sampling_profile(std::string_view name);

Json to_json(const SamplingParams& p);
SamplingParams sampling_from_json(const Json& j);

} // namespace ragprobe::llm
