#include "ragprobe/llm/validators.hpp"

#include <algorithm>

#include "ragprobe/common/text.hpp"

namespace ragprobe::llm {
namespace {

std::string strip_decoration(std::string_view output)
{
    std::string_view s = text::trim(output);
    auto strip_edges = [&](std::string_view chars) {
        bool changed = true;
        while (changed && !s.empty()) {
            changed = false;
            if (chars.find(s.front()) != std::string_view::npos) {
                s.remove_prefix(1);
                changed = true;
            }
            if (!s.empty() && chars.find(s.back()) != std::string_view::npos) {
                s.remove_suffix(1);
                changed = true;
            }
            s = text::trim(s);
        }
    };
    strip_edges("\"'`*.!");
    return text::to_lower_ascii(s);
}

std::string_view strip_fence(std::string_view s)
{
    s = text::trim(s);
    if (s.starts_with("```")) {
        auto nl = s.find('\n');
        if (nl == std::string_view::npos) return s;
        s.remove_prefix(nl + 1);
        if (auto end = s.rfind("```"); end != std::string_view::npos) s = s.substr(0, end);
    }
    return text::trim(s);
}

} // namespace

std::optional<bool> parse_yes_no(std::string_view output)
{
    const std::string s = strip_decoration(output);
    if (s == "yes") return true;
    if (s == "no") return false;
    return std::nullopt;
}

std::optional<bool> parse_distinctive(std::string_view output)
{
    const std::string s = strip_decoration(output);
    if (s == "distinctive") return true;
    if (s == "non-distinctive" || s == "non distinctive" || s == "nondistinctive") return false;
    return std::nullopt;
}

std::optional<std::vector<std::string>> parse_string_list(std::string_view output)
{
    const std::string_view body = strip_fence(output);
    const auto open = body.find('[');
    const auto close = body.rfind(']');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) return std::nullopt;
    Json j = Json::parse(body.substr(open, close - open + 1), nullptr, false);
    if (j.is_discarded() || !j.is_array()) return std::nullopt;
    std::vector<std::string> out;
    out.reserve(j.size());
    for (const auto& e : j) {
        if (!e.is_string()) return std::nullopt;
        out.push_back(e.get<std::string>());
    }
    return out;
}

std::optional<Json> parse_json_object(std::string_view output)
{
    const std::string_view body = strip_fence(output);
    const auto open = body.find('{');
    const auto close = body.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) return std::nullopt;
    Json j = Json::parse(body.substr(open, close - open + 1), nullptr, false, true);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    return j;
}

namespace validators {

Validator non_empty()
{
    return {"non-empty", [](std::string_view s) { return !text::trim(s).empty(); }};
}

Validator yes_no()
{
    return {"yes-no-token", [](std::string_view s) { return parse_yes_no(s).has_value(); }};
}

Validator distinctive_verdict()
{
    return {"distinctive-verdict", [](std::string_view s) { return parse_distinctive(s).has_value(); }};
}

Validator string_list()
{
    return {"string-list", [](std::string_view s) {
                auto items = parse_string_list(s);
                return items && !items->empty() &&
                       std::none_of(items->begin(), items->end(),
                                    [](const std::string& x) { return text::trim(x).empty(); });
            }};
}

Validator label_list(std::size_t n, std::vector<std::string> allowed)
{
    for (auto& a : allowed) a = text::to_lower_ascii(a);
    return {"label-list", [n, allowed = std::move(allowed)](std::string_view s) {
                auto items = parse_string_list(s);
                if (!items || items->size() != n) return false;
                return std::all_of(items->begin(), items->end(), [&](const std::string& x) {
                    const std::string l = text::to_lower_ascii(text::trim(x));
                    return std::find(allowed.begin(), allowed.end(), l) != allowed.end();
                });
            }};
}

} // namespace validators
} // namespace ragprobe::llm
