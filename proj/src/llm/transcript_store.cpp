#include "ragprobe/llm/transcript_store.hpp"

#include "ragprobe/common/digest.hpp"
#include "ragprobe/common/error.hpp"
#include "ragprobe/common/jsonl.hpp"

namespace ragprobe::llm {

Json to_json(const ChatExchange& e)
{
    return Json{{"exchange_id", e.exchange_id}, {"kind", e.kind},
                {"prompt", e.prompt},           {"params", to_json(e.params)},
                {"response_text", e.response_text}, {"attempt", e.attempt},
                {"endpoint_id", e.endpoint_id}, {"model", e.model},
                {"timestamp", e.timestamp},     {"transport_tries", e.transport_tries}};
}

ChatExchange exchange_from_json(const Json& j)
{
    ChatExchange e;
    try {
        e.exchange_id = j.at("exchange_id").get<std::string>();
        e.kind = j.value("kind", std::string{});
        e.prompt = j.at("prompt").get<std::string>();
        e.params = sampling_from_json(j.at("params"));
        e.response_text = j.at("response_text").get<std::string>();
        e.attempt = j.value("attempt", std::size_t{1});
        e.endpoint_id = j.value("endpoint_id", std::string{});
        e.model = j.value("model", std::string{});
        e.timestamp = j.value("timestamp", std::string{});
        e.transport_tries = j.value("transport_tries", std::size_t{1});
    } catch (const nlohmann::json::exception& ex) {
        throw SchemaError(std::string("malformed transcript record: ") + ex.what());
    }
    return e;
}

TranscriptMode parse_transcript_mode(std::string_view s)
{
    if (s == "cache") return TranscriptMode::cache;
    if (s == "replay") return TranscriptMode::replay;
    if (s == "refresh") return TranscriptMode::refresh;
    throw InvalidArgument("unknown transcript mode '" + std::string(s) + "' (expected cache, replay or refresh)");
}

std::string ExchangeKey::digest() const
{
    Json j{{"endpoint_id", endpoint_id}, {"model", model},      {"kind", kind},
           {"prompt", sha256_hex(prompt)}, {"params", to_json(params)}, {"attempt", attempt}};
    return sha256_hex(j.dump());
}

TranscriptStore::TranscriptStore(std::filesystem::path path, TranscriptMode mode)
    : path_(std::move(path)), mode_(mode)
{
    if (path_.empty()) return;
    if (!std::filesystem::exists(path_)) {
        if (mode_ == TranscriptMode::replay) {
            throw NotFound("transcript file " + path_.string() + " does not exist (replay mode)");
        }
        return;
    }
    for (const auto& j : read_jsonl(path_)) {
        ChatExchange e = exchange_from_json(j);
        by_id_[e.exchange_id] = std::move(e);
    }
}

std::optional<ChatExchange> TranscriptStore::find(const std::string& exchange_id) const
{
    std::lock_guard lock(mu_);
    auto it = by_id_.find(exchange_id);
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

void TranscriptStore::append(const ChatExchange& e)
{
    std::lock_guard lock(mu_);
    if (!path_.empty()) {
        if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
        append_jsonl(path_, to_json(e));
    }
    by_id_[e.exchange_id] = e;
}

std::size_t TranscriptStore::size() const
{
    std::lock_guard lock(mu_);
    return by_id_.size();
}

} // namespace ragprobe::llm
