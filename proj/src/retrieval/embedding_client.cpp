#include "ragprobe/retrieval/embedding_client.hpp"

#include <cstdlib>
#include <future>

#include "ragprobe/common/jsonl.hpp"

namespace ragprobe::retrieval {

EmbeddingClient::EmbeddingClient(HttpTransport& transport, EncoderEndpoints endpoints, EmbeddingOptions options)
    : transport_(transport), endpoints_(std::move(endpoints)), options_(std::move(options))
{
    if (options_.batch_size == 0 || options_.max_in_flight == 0) {
        throw InvalidArgument("embedding batch_size and max_in_flight must be >= 1");
    }
}

std::vector<std::vector<double>> EmbeddingClient::embed_batch(std::span<const std::string> texts,
                                                              const std::string& url) const
{
    HttpHeaders headers;
    if (!options_.api_key_env.empty()) {
        if (const char* key = std::getenv(options_.api_key_env.c_str())) {
            headers["Authorization"] = std::string("Bearer ") + key;
        }
    }
    Json req{{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
    auto res = transport_.post_json(url, req.dump(), headers);
    if (res.status != 200) {
        throw Error("embedding endpoint " + url + " returned HTTP " + std::to_string(res.status));
    }
    Json body;
    try {
        body = Json::parse(res.body);
    } catch (const Json::parse_error&) {
        throw SchemaError("embedding endpoint " + url + " returned a non-JSON body");
    }
    if (!body.contains("vectors") || !body["vectors"].is_array() || body["vectors"].size() != texts.size()) {
        throw SchemaError("embedding endpoint " + url + " returned " +
                          (body.contains("vectors") ? std::to_string(body["vectors"].size()) : std::string("no")) +
                          " vectors for " + std::to_string(texts.size()) + " texts");
    }
    std::vector<std::vector<double>> out;
    for (const auto& v : body["vectors"]) {
        out.push_back(normalized(v.get<std::vector<double>>()));
    }
    return out;
}

std::vector<std::vector<double>> EmbeddingClient::embed(std::span<const std::string> texts, Encoder encoder) const
{
    const std::string& url = encoder == Encoder::query ? endpoints_.query_url : endpoints_.article_url;
    if (url.empty()) {
        throw ConfigError(std::string("no ") + (encoder == Encoder::query ? "query" : "article") +
                          " encoder URL configured");
    }
    std::vector<std::span<const std::string>> batches;
    for (std::size_t i = 0; i < texts.size(); i += options_.batch_size) {
        batches.push_back(texts.subspan(i, std::min(options_.batch_size, texts.size() - i)));
    }
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    // Waves of at most max_in_flight concurrent requests; results keep input order.
    for (std::size_t w = 0; w < batches.size(); w += options_.max_in_flight) {
        std::vector<std::future<std::vector<std::vector<double>>>> wave;
        for (std::size_t b = w; b < std::min(batches.size(), w + options_.max_in_flight); ++b) {
            wave.push_back(std::async(std::launch::async, [this, batch = batches[b], &url] {
                return embed_batch(batch, url);
            }));
        }
        for (auto& f : wave) {
            for (auto& v : f.get()) {
                out.push_back(std::move(v));
            }
        }
    }
    if (!out.empty()) {
        const auto d = out.front().size();
        for (const auto& v : out) {
            if (v.size() != d) {
                throw SchemaError("embedding endpoint returned vectors of mixed dimension");
            }
        }
    }
    return out;
}

} // namespace ragprobe::retrieval
