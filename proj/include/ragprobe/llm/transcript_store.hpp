#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "ragprobe/llm/sampling.hpp"

namespace ragprobe::llm {

struct ChatExchange {
    std::string exchange_id; // content address
    std::string kind;        // template kind or free-form label
    std::string prompt;
    SamplingParams params;
    std::string response_text;
    std::size_t attempt = 1;
    std::string endpoint_id;
    std::string model;
    std::string timestamp; // UTC ISO-8601
    std::size_t transport_tries = 1;
};

Json to_json(const ChatExchange& e);
ChatExchange exchange_from_json(const Json& j);

/// cache:   serve recorded exchanges, call the endpoint on a miss and record it
/// replay:  recorded exchanges only; a miss is an error and no call is made
/// refresh: always call the endpoint and record the new exchange
enum class TranscriptMode { cache, replay, refresh };

TranscriptMode parse_transcript_mode(std::string_view s);

/// Identity of one model call: content-addressed on everything that can
/// change the output.
struct ExchangeKey {
    std::string endpoint_id;
    std::string model;
    std::string kind;
    std::string prompt;
    SamplingParams params;
    std::size_t attempt = 1;

    std::string digest() const;
};

/// Append-only record file of every model exchange, keyed by content address.
/// An empty path keeps the transcript in memory only.
class TranscriptStore {
public:
    explicit TranscriptStore(std::filesystem::path path = {}, TranscriptMode mode = TranscriptMode::cache);

    TranscriptMode mode() const { return mode_; }
    void set_mode(TranscriptMode mode) { mode_ = mode; }

    std::optional<ChatExchange> find(const std::string& exchange_id) const;

    /// Persists before returning. Appends are serialised.
    void append(const ChatExchange& e);

    std::size_t size() const;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    TranscriptMode mode_;
    mutable std::mutex mu_;
    std::unordered_map<std::string, ChatExchange> by_id_;
};

} // namespace ragprobe::llm
