#include "ragprobe/llm/gateway.hpp"

#include <algorithm>
#include <ctime>
#include <thread>

#include <spdlog/spdlog.h>

#include "ragprobe/common/text.hpp"

namespace ragprobe::llm {
namespace {

std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class SemaphoreGuard {
public:
    explicit SemaphoreGuard(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
    ~SemaphoreGuard() { s_.release(); }
    SemaphoreGuard(const SemaphoreGuard&) = delete;
    SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

private:
    std::counting_semaphore<>& s_;
};

} // namespace

Gateway::Gateway(ChatClient& client, TranscriptStore& transcripts, std::string model, GatewayOptions options)
    : client_(client), transcripts_(transcripts), model_(std::move(model)), options_(std::move(options))
{
    if (options_.max_attempts == 0) throw InvalidArgument("max_attempts must be >= 1");
    if (options_.transport_retry_cap == 0) throw InvalidArgument("transport_retry_cap must be >= 1");
    if (options_.max_in_flight == 0) throw InvalidArgument("max_in_flight must be >= 1");
    if (!options_.sleep) {
        options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }
    in_flight_ = std::make_unique<std::counting_semaphore<>>(static_cast<std::ptrdiff_t>(options_.max_in_flight));
}

std::string Gateway::call_with_retry(const ChatRequest& request, std::size_t& tries)
{
    auto delay = options_.backoff_base;
    for (tries = 1;; ++tries) {
        try {
            SemaphoreGuard guard(*in_flight_);
            network_calls_.fetch_add(1);
            return client_.complete(request);
        } catch (const TransientError& e) {
            {
                std::lock_guard lock(failures_mu_);
                failures_.push_back({client_.endpoint_id(), tries, e.what()});
            }
            spdlog::warn("transport failure on {} (try {}/{}): {}", client_.endpoint_id(), tries,
                         options_.transport_retry_cap, e.what());
            if (tries >= options_.transport_retry_cap) {
                throw EndpointUnavailable("endpoint " + client_.endpoint_id() + " unreachable after " +
                                          std::to_string(tries) + " tries: " + e.what());
            }
            options_.sleep(delay);
            delay = std::min(delay * 2, options_.backoff_max);
        }
    }
}

ChatExchange Gateway::complete(std::string_view prompt, const SamplingParams& params, const CallContext& ctx)
{
    if (text::trim(prompt).empty()) throw InvalidArgument("prompt must be non-empty");
    validate(params);

    ExchangeKey key{client_.endpoint_id(), model_, ctx.kind, std::string(prompt), params, ctx.first_attempt};
    const std::string id = key.digest();

    if (transcripts_.mode() != TranscriptMode::refresh) {
        if (auto hit = transcripts_.find(id)) return *hit;
        if (transcripts_.mode() == TranscriptMode::replay) {
            throw ReplayMiss("no recorded exchange for " + ctx.kind + " call (attempt " +
                             std::to_string(ctx.first_attempt) + ", id " + id.substr(0, 12) + ")");
        }
    }

    ChatRequest request{model_, {{"user", std::string(prompt)}}, params};
    ChatExchange e;
    try {
        e.response_text = call_with_retry(request, e.transport_tries);
    } catch (const ContextLengthError& err) {
        throw ContextLengthError(std::string(err.what()) + "; prompt estimate ~" +
                                     std::to_string(estimate_tokens(prompt)) + " tokens",
                                 estimate_tokens(prompt));
    }
    e.exchange_id = id;
    e.kind = ctx.kind;
    e.prompt = std::string(prompt);
    e.params = params;
    e.attempt = ctx.first_attempt;
    e.endpoint_id = client_.endpoint_id();
    e.model = model_;
    e.timestamp = utc_timestamp();
    transcripts_.append(e);
    return e;
}

ChatExchange Gateway::complete_validated(std::string_view prompt, const SamplingParams& params,
                                         const Validator& validator, const CallContext& ctx)
{
    if (ctx.first_attempt == 0) throw InvalidArgument("attempt numbers start at 1");
    std::string last;
    for (std::size_t i = 0; i < options_.max_attempts; ++i) {
        CallContext attempt_ctx = ctx;
        attempt_ctx.first_attempt = ctx.first_attempt + i;
        SamplingParams p = params;
        if (p.seed) p.seed = *p.seed + static_cast<std::int64_t>(attempt_ctx.first_attempt) - 1;
        ChatExchange e = complete(prompt, p, attempt_ctx);
        if (validator.check(e.response_text)) return e;
        spdlog::debug("{} output failed validator {} on attempt {}", ctx.kind, validator.name,
                      attempt_ctx.first_attempt);
        last = std::move(e.response_text);
    }
    throw ValidationExhausted(validator.name, options_.max_attempts, std::move(last));
}

std::vector<TransportFailureRecord> Gateway::failures() const
{
    std::lock_guard lock(failures_mu_);
    return failures_;
}

} // namespace ragprobe::llm
