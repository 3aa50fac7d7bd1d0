#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <vector>

#include "ragprobe/llm/chat_client.hpp"
#include "ragprobe/llm/sampling.hpp"
#include "ragprobe/llm/transcript_store.hpp"
#include "ragprobe/llm/validators.hpp"

namespace ragprobe::llm {

/// Every resample failed validation. Carries the last raw output.
class ValidationExhausted : public Error {
public:
    ValidationExhausted(const std::string& validator, std::size_t attempts, std::string last_output)
        : Error("output failed validator '" + validator + "' after " + std::to_string(attempts) + " attempt(s)"),
          last_output_(std::move(last_output))
    {
    }
    const std::string& last_output() const { return last_output_; }

private:
    std::string last_output_;
};

/// The endpoint could not be reached within the transport retry cap.
class EndpointUnavailable : public Error {
public:
    using Error::Error;
};

/// Replay mode found no recorded exchange for a call.
class ReplayMiss : public Error {
public:
    using Error::Error;
};

struct GatewayOptions {
    std::size_t max_attempts = 3;        // validation resamples
    std::size_t transport_retry_cap = 5; // tries per attempt for transient failures
    std::chrono::milliseconds backoff_base{500};
    std::chrono::milliseconds backoff_max{30000};
    std::size_t max_in_flight = 8;
    /// Injected so tests do not wait; defaults to std::this_thread::sleep_for.
    std::function<void(std::chrono::milliseconds)> sleep;
};

struct CallContext {
    std::string kind = "free";
    std::size_t first_attempt = 1;
};

struct TransportFailureRecord {
    std::string endpoint_id;
    std::size_t try_index = 0;
    std::string message;
};

/// Brokers every model call: transcript lookup, bounded concurrency,
/// transient-failure retry with exponential backoff, and validation resampling.
class Gateway {
public:
    Gateway(ChatClient& client, TranscriptStore& transcripts, std::string model, GatewayOptions options = {});

    /// One attempt. Transport retries do not advance `attempt`.
    ChatExchange complete(std::string_view prompt, const SamplingParams& params, const CallContext& ctx = {});

    /// Resamples (attempt = first_attempt, first_attempt + 1, ...) until `validator`
    /// accepts the output or max_attempts is spent. When the params carry a
    /// seed, attempt n uses seed + n - 1.
    ChatExchange complete_validated(std::string_view prompt, const SamplingParams& params, const Validator& validator,
                                    const CallContext& ctx = {});

    /// Calls that reached the chat client (cache hits excluded).
    std::size_t network_calls() const { return network_calls_.load(); }
    std::vector<TransportFailureRecord> failures() const;

    const GatewayOptions& options() const { return options_; }
    TranscriptStore& transcripts() { return transcripts_; }
    const std::string& model() const { return model_; }

private:
    std::string call_with_retry(const ChatRequest& request, std::size_t& tries);

    ChatClient& client_;
    TranscriptStore& transcripts_;
    std::string model_;
    GatewayOptions options_;
    std::unique_ptr<std::counting_semaphore<>> in_flight_;
    std::atomic<std::size_t> network_calls_{0};
    mutable std::mutex failures_mu_;
    std::vector<TransportFailureRecord> failures_;
};

} // namespace ragprobe::llm
