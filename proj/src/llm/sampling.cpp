#include "ragprobe/llm/sampling.hpp"

#include "ragprobe/common/error.hpp"

namespace ragprobe::llm {

void validate(const SamplingParams& p)
{
    if (!(p.temperature >= 0.0)) {
        throw InvalidArgument("temperature must be >= 0, got " + std::to_string(p.temperature));
    }
    if (!(p.top_p > 0.0 && p.top_p <= 1.0)) {
        throw InvalidArgument("top_p must be in (0, 1], got " + std::to_string(p.top_p));
    }
    if (p.max_tokens < 1) {
        throw InvalidArgument("max_tokens must be >= 1, got " + std::to_string(p.max_tokens));
    }
}

SamplingParams sampling_profile(std::string_view name)
{
    SamplingParams p;
    if (name == "primary") {
        p.temperature = 0.8;
    } else if (name == "open") {
        p.temperature = 1.0;
        p.top_p = 0.9;
    } else if (name == "deterministic") {
        p.temperature = 0.0;
    } else {
        throw InvalidArgument("unknown sampling profile '" + std::string(name) +
                              "' (expected primary, open or deterministic)");
    }
    return p;
}

Json to_json(const SamplingParams& p)
{
    Json j{{"temperature", p.temperature}, {"top_p", p.top_p}, {"max_tokens", p.max_tokens}};
    j["seed"] = p.seed ? Json(*p.seed) : Json(nullptr);
    return j;
}

SamplingParams sampling_from_json(const Json& j)
{
    if (!j.is_object()) throw SchemaError("sampling params must be an object");
    SamplingParams p;
    try {
        p.temperature = j.value("temperature", p.temperature);
        p.top_p = j.value("top_p", p.top_p);
        p.max_tokens = j.value("max_tokens", p.max_tokens);
        if (auto it = j.find("seed"); it != j.end() && !it->is_null()) p.seed = it->get<std::int64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("invalid sampling params: ") + e.what());
    }
    validate(p);
    return p;
}

} // namespace ragprobe::llm
