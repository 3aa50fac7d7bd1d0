#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ragprobe/common/error.hpp"
#include "ragprobe/common/http.hpp"
#include "ragprobe/llm/sampling.hpp"

namespace ragprobe::llm {

struct ChatMessage {
    std::string role;
    std::string content;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    SamplingParams params;
};

/// Retryable transport-level failure (connection error, HTTP 408/429/5xx).
class TransientError : public Error {
public:
    using Error::Error;
};

/// HTTP 401/403. Never retried.
class AuthError : public Error {
public:
    using Error::Error;
};

/// The endpoint rejected the prompt as too long. Never retried.
class ContextLengthError : public Error {
public:
    ContextLengthError(const std::string& what, std::size_t estimated_prompt_tokens)
        : Error(what), estimated_prompt_tokens_(estimated_prompt_tokens)
    {
    }
    std::size_t estimated_prompt_tokens() const { return estimated_prompt_tokens_; }

private:
    std::size_t estimated_prompt_tokens_;
};

/// Rough token estimate (4 bytes per token) used in context-length diagnostics.
std::size_t estimate_tokens(std::string_view text);

class ChatClient {
public:
    virtual ~ChatClient() = default;
    /// Returns the assistant message text.
    virtual std::string complete(const ChatRequest& request) = 0;
    virtual std::string endpoint_id() const = 0;
};

struct ChatEndpoint {
    std::string id = "default";
    std::string url;   // full URL of the chat-completions route
    std::string model;
    std::string api_key_env; // environment variable holding the bearer token; may be empty
};

/// Chat-completions client over HTTP:
///   POST {"model", "messages": [{"role","content"}], "temperature", "top_p", "max_tokens", "seed"?}
///   reply: {"choices": [{"message": {"content": ...}}]}
class HttpChatClient final : public ChatClient {
public:
    HttpChatClient(HttpTransport& transport, ChatEndpoint endpoint);
    std::string complete(const ChatRequest& request) override;
    std::string endpoint_id() const override { return endpoint_.id; }
    const ChatEndpoint& endpoint() const { return endpoint_; }

private:
    HttpTransport& transport_;
    ChatEndpoint endpoint_;
};

/// Test and demo double: every call is answered by `script(request, call_index)`.
/// The script may throw TransientError/AuthError to simulate failures.
class ScriptedChatClient final : public ChatClient {
public:
    using Script = std::function<std::string(const ChatRequest&, std::size_t call_index)>;

    explicit ScriptedChatClient(Script script, std::string id = "scripted");
    std::string complete(const ChatRequest& request) override;
    std::string endpoint_id() const override { return id_; }

    std::size_t calls() const { return calls_.load(); }

private:
    Script script_;
    std::string id_;
    std::atomic<std::size_t> calls_{0};
};

/// Last user message of a request; what scripted endpoints usually inspect.
const std::string& user_prompt(const ChatRequest& request);

} // namespace ragprobe::llm
