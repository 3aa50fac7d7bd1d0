#pragma once

#include <span>
#include <string>
#include <vector>

#include "ragprobe/common/http.hpp"
#include "ragprobe/retrieval/dense.hpp"

namespace ragprobe::retrieval {

enum class Encoder { query, article };

struct EmbeddingOptions {
    std::size_t batch_size = 32;
    std::size_t max_in_flight = 4;
    std::string api_key_env; // optional bearer token variable
};

/// Batched text-in / vector-out client: POST {"texts": [...]} -> {"vectors": [[...], ...]}.
/// Vectors are unit-normalised on receipt.
class EmbeddingClient {
public:
    EmbeddingClient(HttpTransport& transport, EncoderEndpoints endpoints, EmbeddingOptions options = {});

    std::vector<std::vector<double>> embed(std::span<const std::string> texts, Encoder encoder) const;

    const EncoderEndpoints& endpoints() const { return endpoints_; }

private:
    std::vector<std::vector<double>> embed_batch(std::span<const std::string> texts, const std::string& url) const;

    HttpTransport& transport_;
    EncoderEndpoints endpoints_;
    EmbeddingOptions options_;
};

} // namespace ragprobe::retrieval
