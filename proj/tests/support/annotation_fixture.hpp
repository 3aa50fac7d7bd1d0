#pragma once

#include <cstddef>
#include <functional>

#include "ragprobe/annotation/types.hpp"

namespace ragprobe::testing {

// A complete, valid label list for `task`; `pick` chooses among the stage's values.
inline Json full_labels(const annotation::AnnotationTask& task, std::function<std::size_t(std::size_t)> pick = {})
{
    static const char* const levels[] = {"full", "partial", "none"};
    if (!pick) pick = [](std::size_t) { return std::size_t{0}; };
    const Json& p = task.payload;
    Json out = Json::array();
    std::size_t i = 0;
    switch (task.stage) {
    case annotation::Stage::relevance:
        for (const auto& passage : p.at("passages"))
            for (const auto& s : p.at("statements"))
                out.push_back({{"passage_id", passage.at("passage_id")},
                               {"statement_id", s.at("statement_id")},
                               {"level", levels[pick(i++) % 3]}});
        break;
    case annotation::Stage::selection:
        for (const auto& r : p.at("references")) {
            Json ids = Json::array();
            if (pick(i++) % 2 == 0) ids.push_back(p.at("passages").at(0).at("passage_id"));
            out.push_back({{"ref_ordinal", r.at("ordinal")}, {"matched_passage_ids", ids}});
        }
        break;
    case annotation::Stage::factuality:
        for (const auto& s : p.at("statements"))
            out.push_back({{"statement_id", s.at("statement_id")}, {"verdict", pick(i++) % 2 == 0}});
        break;
    case annotation::Stage::completeness:
        for (const auto& s : p.at("statements"))
            out.push_back({{"statement_id", s.at("statement_id")}, {"level", levels[pick(i++) % 3]}});
        break;
    }
    return out;
}

} // namespace ragprobe::testing
