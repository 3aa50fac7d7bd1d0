#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ragprobe/common/jsonl.hpp"

namespace ragprobe::citation {

enum class Owner { gold_answer, model_response };
enum class Necessity { must_have, nice_to_have };
enum class Origin { retrieval_based, self_generated, unresolved };
enum class Verifiability { verified, unverifiable };

std::string_view to_string(Owner v);
std::string_view to_string(Necessity v);
std::string_view to_string(Origin v);
std::string_view to_string(Verifiability v);
Owner parse_owner(std::string_view s);
Necessity parse_necessity(std::string_view s);
Origin parse_origin(std::string_view s);
Verifiability parse_verifiability(std::string_view s);

struct Statement {
    std::string statement_id;
    Owner owner = Owner::model_response;
    std::string text;
    std::vector<int> citations; // sorted ascending, unique
    std::optional<Necessity> necessity; // gold_answer only
    std::optional<bool> distinctive;    // model_response only

    bool operator==(const Statement&) const = default;
};

/// Throws InvalidArgument when the owner-specific fields are inconsistent
/// or the citations are not sorted and unique.
void check_invariants(const Statement& s);

struct Reference {
    int ordinal = 0;
    std::string raw_text;
    std::vector<std::string> matched_passages;
    Origin origin = Origin::unresolved;
    std::optional<Verifiability> verifiability;
    double match_score = 0.0; // best assisted-matching similarity, for triage

    bool operator==(const Reference&) const = default;
};

struct ParsedResponse {
    std::vector<Statement> body_statements;
    std::vector<Reference> references;
    std::vector<int> unmatched_citation_ordinals;
    bool missing_reference_section = false;
    std::vector<std::string> warnings;
};

Json to_json(const Statement& s);
Json to_json(const Reference& r);
Json to_json(const ParsedResponse& p);
Statement statement_from_json(const Json& j);
Reference reference_from_json(const Json& j);
ParsedResponse parsed_response_from_json(const Json& j);

} // namespace ragprobe::citation
