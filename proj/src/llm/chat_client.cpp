#include "ragprobe/llm/chat_client.hpp"

#include <cstdlib>

#include "ragprobe/common/jsonl.hpp"

namespace ragprobe::llm {

std::size_t estimate_tokens(std::string_view text)
{
    return (text.size() + 3) / 4;
}

const std::string& user_prompt(const ChatRequest& request)
{
    for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
        if (it->role == "user") return it->content;
    }
    throw InvalidArgument("chat request has no user message");
}

HttpChatClient::HttpChatClient(HttpTransport& transport, ChatEndpoint endpoint)
    : transport_(transport), endpoint_(std::move(endpoint))
{
    parse_url(endpoint_.url);
}

std::string HttpChatClient::complete(const ChatRequest& request)
{
    Json body{{"model", request.model.empty() ? endpoint_.model : request.model},
              {"temperature", request.params.temperature},
              {"top_p", request.params.top_p},
              {"max_tokens", request.params.max_tokens}};
    if (request.params.seed) body["seed"] = *request.params.seed;
    Json messages = Json::array();
    for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
    body["messages"] = std::move(messages);

    HttpHeaders headers;
    if (!endpoint_.api_key_env.empty()) {
        if (const char* key = std::getenv(endpoint_.api_key_env.c_str()); key && *key) {
            headers["Authorization"] = std::string("Bearer ") + key;
        }
    }

    HttpResponse resp;
    try {
        resp = transport_.post_json(endpoint_.url, body.dump(), headers);
    } catch (const TransportFailure& e) {
        throw TransientError(endpoint_.id + ": " + e.what());
    }

    if (resp.status == 401 || resp.status == 403) {
        throw AuthError(endpoint_.id + ": authentication failed (HTTP " + std::to_string(resp.status) + ")");
    }
    if (resp.status == 408 || resp.status == 429 || resp.status >= 500) {
        throw TransientError(endpoint_.id + ": HTTP " + std::to_string(resp.status));
    }
    if (resp.status == 400 || resp.status == 413) {
        const std::string lowered = [&] {
            std::string s = resp.body;
            for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            return s;
        }();
        if (lowered.find("context") != std::string::npos || lowered.find("too long") != std::string::npos ||
            resp.status == 413) {
            std::size_t total = 0;
            for (const auto& m : request.messages) total += estimate_tokens(m.content);
            throw ContextLengthError(endpoint_.id + ": prompt rejected as too long (~" + std::to_string(total) +
                                         " tokens)",
                                     total);
        }
    }
    if (resp.status != 200) {
        throw Error(endpoint_.id + ": HTTP " + std::to_string(resp.status) + ": " + resp.body.substr(0, 200));
    }

    Json reply = Json::parse(resp.body, nullptr, false);
    if (reply.is_discarded()) throw SchemaError(endpoint_.id + ": reply is not JSON");
    try {
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw SchemaError(endpoint_.id + ": reply lacks choices[0].message.content");
    }
}

ScriptedChatClient::ScriptedChatClient(Script script, std::string id) : script_(std::move(script)), id_(std::move(id)) {}

std::string ScriptedChatClient::complete(const ChatRequest& request)
{
    const std::size_t index = calls_.fetch_add(1);
    return script_(request, index);
}

} // namespace ragprobe::llm
