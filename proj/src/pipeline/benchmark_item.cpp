#include "ragprobe/pipeline/benchmark_item.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>

#include "ragprobe/common/error.hpp"
#include "ragprobe/common/text.hpp"
#include "ragprobe/metrics/resampling.hpp"

namespace ragprobe::pipeline {

namespace {

constexpr std::pair<Dataset, std::string_view> kDatasets[] = {
    {Dataset::medqa, "medqa"}, {Dataset::medmcqa, "medmcqa"}, {Dataset::mmlu, "mmlu"},
    {Dataset::mmlu_pro, "mmlu_pro"}, {Dataset::medxpertqa, "medxpertqa"}, {Dataset::custom, "custom"},
};

} // namespace

std::string_view to_string(Dataset d)
{
    for (auto [value, name] : kDatasets)
        if (value == d) return name;
    return "custom";
}

Dataset parse_dataset(std::string_view s)
{
    const std::string lower = text::to_lower_ascii(text::trim(s));
    for (auto [value, name] : kDatasets)
        if (lower == name) return value;
    throw InvalidArgument("unknown dataset '" + std::string(s) + "'");
}

void validate(const BenchmarkItem& item)
{
    if (item.item_id.empty()) throw SchemaError("benchmark item without item_id");
    const std::string where = "benchmark item '" + item.item_id + "': ";
    if (text::trim(item.question).empty()) throw SchemaError(where + "empty question");
    if (item.options.size() < 2) throw SchemaError(where + "needs at least two options");
    for (const auto& [letter, option] : item.options) {
        if (letter.size() != 1 || letter[0] < 'A' || letter[0] > 'Z')
            throw SchemaError(where + "option key '" + letter + "' is not a capital letter");
        if (text::trim(option).empty()) throw SchemaError(where + "option " + letter + " is empty");
    }
    if (!item.options.contains(item.gold)) throw SchemaError(where + "gold '" + item.gold + "' is not an option key");
}

Json to_json(const BenchmarkItem& item)
{
    return Json{{"item_id", item.item_id},
                {"question", item.question},
                {"options", item.options},
                {"gold", item.gold},
                {"dataset", std::string(to_string(item.dataset))}};
}

BenchmarkItem benchmark_item_from_json(const Json& j)
{
    BenchmarkItem item;
    try {
        item.item_id = j.at("item_id").get<std::string>();
        item.question = j.at("question").get<std::string>();
        const auto& options = j.at("options");
        if (options.is_array()) {
            char letter = 'A';
            for (const auto& o : options) item.options[std::string(1, letter++)] = o.get<std::string>();
        } else {
            item.options = options.get<std::map<std::string, std::string>>();
        }
        item.gold = std::string(text::trim(j.at("gold").get<std::string>()));
        std::transform(item.gold.begin(), item.gold.end(), item.gold.begin(),
                       [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
        item.dataset = parse_dataset(j.value("dataset", std::string("custom")));
    } catch (const Json::exception& e) {
        throw SchemaError(std::string("benchmark item: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw SchemaError(std::string("benchmark item: ") + e.what());
    }
    validate(item);
    return item;
}

std::vector<BenchmarkItem> load_benchmark(const std::filesystem::path& path)
{
    std::vector<BenchmarkItem> items;
    std::set<std::string> seen;
    for_each_line(path, [&](const JsonlLine& line) {
        const std::string where = path.string() + ":" + std::to_string(line.line_number) + ": ";
        Json j = Json::parse(line.raw, nullptr, false);
        if (j.is_discarded()) throw SchemaError(where + "malformed JSON");
        try {
            items.push_back(benchmark_item_from_json(j));
        } catch (const SchemaError& e) {
            throw SchemaError(where + e.what());
        }
        if (!seen.insert(items.back().item_id).second)
            throw SchemaError(where + "duplicate item_id '" + items.back().item_id + "'");
    });
    if (items.empty()) throw SchemaError(path.string() + ": no benchmark items");
    return items;
}

std::vector<BenchmarkItem> sample_items(const std::vector<BenchmarkItem>& items, std::size_t limit,
                                        std::uint64_t seed)
{
    if (items.size() <= limit) return items;
    std::vector<std::size_t> idx(items.size());
    std::iota(idx.begin(), idx.end(), 0);
    metrics::ReplicateStream stream(seed, 0);
    // Partial Fisher-Yates: the first `limit` slots become the sample.
    for (std::size_t i = 0; i < limit; ++i) {
        const std::size_t j = i + stream.index(idx.size() - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(limit);
    std::sort(idx.begin(), idx.end());
    std::vector<BenchmarkItem> out;
    out.reserve(limit);
    for (std::size_t i : idx) out.push_back(items[i]);
    return out;
}

std::string format_question(const BenchmarkItem& item)
{
    std::string out(text::trim(item.question));
    out += "\n";
    for (const auto& [letter, option] : item.options) out += "\n" + letter + ". " + option;
    return out;
}

Query query_from_item(const BenchmarkItem& item)
{
    return Query{item.item_id, format_question(item), "usmle", item};
}

Query free_text_query(std::string query_id, std::string text)
{
    if (text::trim(text).empty()) throw InvalidArgument("query '" + query_id + "' is empty");
    return Query{std::move(query_id), std::move(text), "patient", std::nullopt};
}

} // namespace ragprobe::pipeline
