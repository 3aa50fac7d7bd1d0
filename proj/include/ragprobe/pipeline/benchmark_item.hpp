#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ragprobe/common/jsonl.hpp"

namespace ragprobe::pipeline {

enum class Dataset { medqa, medmcqa, mmlu, mmlu_pro, medxpertqa, custom };

std::string_view to_string(Dataset d);
Dataset parse_dataset(std::string_view s);

struct BenchmarkItem {
    std::string item_id;
    std::string question;
    std::map<std::string, std::string> options; // letter -> text
    std::string gold;
    Dataset dataset = Dataset::custom;
};

/// Throws SchemaError unless the item has an id, a question, at least two
/// options with single-letter keys, and a gold letter among them.
void validate(const BenchmarkItem& item);

Json to_json(const BenchmarkItem& item);
BenchmarkItem benchmark_item_from_json(const Json& j);

/// Throws SchemaError naming the offending line; duplicate ids are rejected.
std::vector<BenchmarkItem> load_benchmark(const std::filesystem::path& path);

/// Uniform sample without replacement when there are more than `limit`
/// items; the kept items stay in their original order.
std::vector<BenchmarkItem> sample_items(const std::vector<BenchmarkItem>& items, std::size_t limit,
                                        std::uint64_t seed);

/// Question followed by one "X. option" line per option.
std::string format_question(const BenchmarkItem& item);

/// A query as the pipeline sees it: free text, or a multiple-choice item.
struct Query {
    std::string query_id;
    std::string text; // as shown to the models
    std::string query_type; // "patient" or "usmle" for free text and exam questions
    std::optional<BenchmarkItem> item;
};

Query query_from_item(const BenchmarkItem& item);
Query free_text_query(std::string query_id, std::string text);

} // namespace ragprobe::pipeline
