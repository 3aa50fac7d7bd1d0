#include "ragprobe/pipeline/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <set>
#include <map>
#include <thread>

#include "ragprobe/common/error.hpp"
#include "ragprobe/metrics/resampling.hpp"

namespace ragprobe::pipeline {
namespace {

void check_grid(const std::vector<BenchmarkItem>& items, const std::vector<PipelineConfig>& grid)
{
    if (items.empty()) throw InvalidArgument("benchmark needs at least one item");
    if (grid.empty()) throw InvalidArgument("benchmark needs at least one configuration");
    std::set<std::string> names;
    for (const auto& c : grid) {
        validate(c);
        if (!names.insert(c.name).second) throw ConfigError("duplicate configuration name '" + c.name + "'");
    }
}

bool record_correct(const RunRecord& r) { return r.ok() && r.correct.value_or(false); }

BenchmarkCell make_cell(const PipelineConfig& config, const std::vector<const RunRecord*>& records,
                        const BenchmarkOptions& options)
{
    BenchmarkCell cell;
    cell.config = config;
    cell.n = records.size();
    for (const RunRecord* r : records) {
        cell.per_item_correct.push_back(record_correct(*r));
        if (!r->ok()) ++cell.failed;
        else if (!r->extracted_option) ++cell.unparsed;
    }
    std::size_t correct = 0;
    for (bool c : cell.per_item_correct) correct += c;
    const metrics::Stratum stratum{{"config", config.name}, {"k", config.use_retrieval ? std::to_string(config.k) : "0"}};
    cell.accuracy = metrics::defined_metric("accuracy", static_cast<double>(correct) / static_cast<double>(cell.n),
                                            cell.n, stratum);
    const auto& flags = cell.per_item_correct;
    auto ci = metrics::bootstrap_ci(
        cell.n,
        [&](std::span<const std::size_t> idx) -> std::optional<double> {
            std::size_t hits = 0;
            for (std::size_t i : idx) hits += flags[i];
            return static_cast<double>(hits) / static_cast<double>(idx.size());
        },
        options.bootstrap_replicates, options.seed);
    if (ci) {
        cell.accuracy.ci_low = ci->low;
        cell.accuracy.ci_high = ci->high;
    }
    return cell;
}

void compare_to_baseline(BenchmarkTable& table)
{
    const BenchmarkCell* baseline = nullptr;
    for (const auto& c : table.cells)
        if (!c.config.use_retrieval) {
            baseline = &c;
            break;
        }
    if (!baseline) return;
    table.baseline_name = baseline->config.name;
    for (auto& c : table.cells) {
        if (&c == baseline) continue;
        c.delta_vs_baseline = *c.accuracy.value - *baseline->accuracy.value;
        c.mcnemar_p = metrics::mcnemar_exact(c.per_item_correct, baseline->per_item_correct).p_value;
    }
}

} // namespace

BenchmarkTable run_benchmark(const std::vector<BenchmarkItem>& items, const std::vector<PipelineConfig>& grid,
                             const PipelineFactory& factory, const BenchmarkOptions& options, const RecordSink& sink)
{
    check_grid(items, grid);
    std::vector<Query> queries;
    queries.reserve(items.size());
    for (const auto& item : items) queries.push_back(query_from_item(item));

    BenchmarkTable table;
    for (const auto& config : grid) {
        Pipeline pipeline = factory(config);
        const std::string digest = config_digest(config);
        std::vector<RunRecord> records(queries.size());
        std::atomic<std::size_t> next{0};
        std::mutex sink_mu;
        std::exception_ptr failure;
        auto worker = [&] {
            try {
                for (std::size_t i = next++; i < queries.size(); i = next++) {
                    const std::string id = make_record_id(queries[i].query_id, digest);
                    std::optional<RunRecord> stored = options.existing ? options.existing(id) : std::nullopt;
                    if (stored) {
                        records[i] = std::move(*stored);
                        continue;
                    }
                    records[i] = pipeline.run(queries[i]);
                    if (sink) {
                        std::lock_guard lock(sink_mu);
                        sink(records[i]);
                    }
                }
            } catch (...) {
                std::lock_guard lock(sink_mu);
                if (!failure) failure = std::current_exception();
                next = queries.size();
            }
        };
        const std::size_t threads = std::clamp<std::size_t>(options.parallelism, 1, queries.size());
        if (threads == 1) {
            worker();
        } else {
            std::vector<std::jthread> pool;
            for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        }
        if (failure) std::rethrow_exception(failure);

        std::vector<const RunRecord*> ptrs;
        for (const auto& r : records) ptrs.push_back(&r);
        table.cells.push_back(make_cell(config, ptrs, options));
    }
    compare_to_baseline(table);
    return table;
}

BenchmarkTable tabulate(const std::vector<BenchmarkItem>& items, const std::vector<PipelineConfig>& grid,
                        const std::vector<RunRecord>& records, const BenchmarkOptions& options)
{
    check_grid(items, grid);
    std::map<std::string, const RunRecord*> by_id;
    for (const auto& r : records) by_id[r.record_id] = &r;
    BenchmarkTable table;
    for (const auto& config : grid) {
        const std::string digest = config_digest(config);
        std::vector<const RunRecord*> cell_records;
        for (const auto& item : items) {
            auto it = by_id.find(make_record_id(item.item_id, digest));
            if (it == by_id.end())
                throw NotFound("no run record for item '" + item.item_id + "' under configuration '" + config.name + "'");
            cell_records.push_back(it->second);
        }
        table.cells.push_back(make_cell(config, cell_records, options));
    }
    compare_to_baseline(table);
    return table;
}

Json to_json(const BenchmarkTable& t)
{
    Json cells = Json::array();
    for (const auto& c : t.cells) {
        Json j{{"config", to_json(c.config)},
               {"accuracy", metrics::to_json(c.accuracy)},
               {"n", c.n},
               {"failed", c.failed},
               {"unparsed", c.unparsed}};
        j["delta_vs_baseline"] = c.delta_vs_baseline ? Json(*c.delta_vs_baseline) : Json(nullptr);
        j["mcnemar_p"] = c.mcnemar_p ? Json(*c.mcnemar_p) : Json(nullptr);
        cells.push_back(std::move(j));
    }
    return Json{{"baseline", t.baseline_name.empty() ? Json(nullptr) : Json(t.baseline_name)}, {"cells", cells}};
}

} // namespace ragprobe::pipeline
