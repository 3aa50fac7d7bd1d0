#include <gtest/gtest.h>

#include <thread>

#include <httplib.h>

#include "ragprobe/llm/gateway.hpp"
#include "ragprobe/llm/templates.hpp"
#include "scripted.hpp"
#include "test_support.hpp"

namespace ragprobe::llm {
namespace {

using ragprobe::testing::TempDir;

GatewayOptions fast_options(std::vector<std::chrono::milliseconds>* sleeps = nullptr)
{
    GatewayOptions o;
    o.sleep = [sleeps](std::chrono::milliseconds d) {
        if (sleeps) sleeps->push_back(d);
    };
    return o;
}

Validator starts_with_references()
{
    return {"reference-section", [](std::string_view s) { return s.find("### References") != std::string_view::npos; }};
}

// ---- templates ------------------------------------------------------------

TEST(Templates, EvidenceFilterCarriesBindingsAndInstruction)
{
    const auto out = render_prompt(TemplateKind::evidence_filter, {{"question", "Q"}, {"passage", "P"}});
    EXPECT_NE(out.find("contains supporting evidence for the query"), std::string::npos);
    EXPECT_NE(out.find("Question: Q"), std::string::npos);
    EXPECT_TRUE(out.ends_with("Passage: P"));
}

TEST(Templates, MissingBindingIsNamed)
{
    try {
        render_prompt(TemplateKind::evidence_filter, {{"question", "Q"}});
        FAIL();
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("'passage'"), std::string::npos);
    }
    EXPECT_THROW(parse_template_kind("haiku"), InvalidArgument);
}

TEST(Templates, RagPromptHasOneBlockPerPassageInOrder)
{
    Bindings b{{"task_instruction", std::string(response_instruction(QueryStyle::patient))}, {"query", "What now?"}};
    for (int i = 1; i <= 16; ++i) {
        b["passage_" + std::to_string(i)] = "PASSAGE<" + std::to_string(i) + ">";
        b["metadata_" + std::to_string(i)] = "meta " + std::to_string(i);
    }
    const auto out = render_prompt(TemplateKind::response_rag, b);
    EXPECT_EQ(scripted::document_blocks(out), 16u);
    std::size_t last = 0;
    for (int i = 1; i <= 16; ++i) {
        const auto pos = out.find("PASSAGE<" + std::to_string(i) + ">");
        ASSERT_NE(pos, std::string::npos);
        EXPECT_GT(pos, last);
        last = pos;
    }
    EXPECT_NE(out.find("Metadata: meta 16"), std::string::npos);
    b.erase("metadata_9");
    EXPECT_THROW(render_prompt(TemplateKind::response_rag, b), InvalidArgument);
}

TEST(Templates, NonRagPromptHasNoDocumentBlock)
{
    const auto out = render_prompt(TemplateKind::response_nonrag,
                                   {{"task_instruction", std::string(response_instruction(QueryStyle::usmle))},
                                    {"query", "Which drug?"}});
    EXPECT_EQ(scripted::document_blocks(out), 0u);
    EXPECT_NE(out.find("### References"), std::string::npos);
    EXPECT_NE(out.find("final answer"), std::string::npos);
}

TEST(Templates, RenderingIsTotalAndVerbatim)
{
    for (auto kind : {TemplateKind::statement_extraction, TemplateKind::must_have, TemplateKind::response_nonrag,
                      TemplateKind::distinctive_filter, TemplateKind::citation_alignment, TemplateKind::evidence_filter,
                      TemplateKind::rationale_reformulation}) {
        Bindings b;
        for (const auto& name : required_placeholders(kind)) b[name] = "<" + name + " & {x} \\n 5% μg>";
        const auto out = render_prompt(kind, b);
        for (const auto& name : required_placeholders(kind)) {
            EXPECT_NE(out.find("<" + name + " & {x} \\n 5% μg>"), std::string::npos) << to_string(kind);
            EXPECT_EQ(out.find("{" + name + "}"), std::string::npos) << to_string(kind);
        }
        EXPECT_EQ(parse_template_kind(to_string(kind)), kind);
    }
}

TEST(TemplatesProperty, InjectiveOverBindings)
{
    testing::Gen g(4);
    for (auto kind : {TemplateKind::evidence_filter, TemplateKind::must_have, TemplateKind::rationale_reformulation}) {
        const auto names = required_placeholders(kind);
        for (int trial = 0; trial < 100; ++trial) {
            Bindings a, b;
            for (const auto& n : names) a[n] = b[n] = g.sentence(0, 6, 20);
            const auto& changed = g.pick(names);
            do {
                b[changed] = g.sentence(0, 6, 20);
            } while (b[changed] == a[changed]);
            EXPECT_NE(render_prompt(kind, a), render_prompt(kind, b));
        }
    }
}

// ---- sampling -------------------------------------------------------------

TEST(Sampling, ProfilesAndValidation)
{
    EXPECT_EQ(sampling_profile("primary").temperature, 0.8);
    EXPECT_EQ(sampling_profile("open").top_p, 0.9);
    EXPECT_EQ(sampling_profile("open").temperature, 1.0);
    EXPECT_EQ(sampling_profile("deterministic").temperature, 0.0);
    EXPECT_EQ(sampling_profile("primary").max_tokens, 2048);
    EXPECT_THROW(sampling_profile("greedy"), InvalidArgument);
    EXPECT_THROW(validate({-0.1, 1.0, 10, {}}), InvalidArgument);
    EXPECT_THROW(validate({0.5, 0.0, 10, {}}), InvalidArgument);
    EXPECT_THROW(validate({0.5, 1.0, 0, {}}), InvalidArgument);
    SamplingParams p{0.3, 0.5, 99, 42};
    EXPECT_EQ(sampling_from_json(to_json(p)), p);
}

// ---- validators -----------------------------------------------------------

TEST(Validators, Parsers)
{
    EXPECT_EQ(parse_yes_no(" Yes."), true);
    EXPECT_EQ(parse_yes_no("\"no\""), false);
    EXPECT_FALSE(parse_yes_no("Maybe").has_value());
    EXPECT_EQ(parse_distinctive("Non-distinctive"), false);
    EXPECT_EQ(parse_distinctive("**Distinctive**"), true);
    EXPECT_EQ(parse_string_list("Here:\n```json\n[\"a\", \"b\"]\n```"), (std::vector<std::string>{"a", "b"}));
    EXPECT_FALSE(parse_string_list("[1, 2]").has_value());
    EXPECT_EQ(parse_json_object("output: {\"#1\": {\"refs\": [1]}} done")->at("#1").at("refs")[0], 1);
    EXPECT_FALSE(validators::string_list().check("[]"));
    EXPECT_TRUE(validators::label_list(2, {"Must-have", "Nice-to-have"}).check(R"(["must-have", "Nice-to-have"])"));
    EXPECT_FALSE(validators::label_list(3, {"Must-have", "Nice-to-have"}).check(R"(["must-have", "Nice-to-have"])"));
}

// ---- gateway --------------------------------------------------------------

TEST(Gateway, EchoEndpointOverHttp)
{
    httplib::Server server;
    std::string seen_body;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen_body = req.body;
        res.set_content(scripted::chat_reply("OK").body, "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    auto transport = make_http_transport();
    HttpChatClient client(*transport, {"local", "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions",
                                       "m", ""});
    TranscriptStore store;
    Gateway gw(client, store, "test-model", fast_options());
    const auto e = gw.complete("Say OK", {0.0, 1.0, 16, 7});
    server.stop();
    th.join();
    EXPECT_EQ(e.response_text, "OK");
    EXPECT_EQ(e.attempt, 1u);
    EXPECT_EQ(e.endpoint_id, "local");
    const auto body = Json::parse(seen_body);
    EXPECT_EQ(body["model"], "test-model");
    EXPECT_EQ(body["messages"][0]["content"], "Say OK");
    EXPECT_EQ(body["seed"], 7);
    EXPECT_EQ(body["max_tokens"], 16);
}

TEST(Gateway, TransportRetriesDoNotCountAsAttempts)
{
    scripted::FakeTransport transport([](const scripted::FakeTransport::Call&, std::size_t i) {
        return i < 2 ? HttpResponse{503, "busy"} : scripted::chat_reply("fine");
    });
    HttpChatClient client(transport, {"ep", "http://x/chat", "m", ""});
    TranscriptStore store;
    std::vector<std::chrono::milliseconds> sleeps;
    Gateway gw(client, store, "m", fast_options(&sleeps));
    const auto e = gw.complete("hi", {});
    EXPECT_EQ(e.response_text, "fine");
    EXPECT_EQ(e.attempt, 1u);
    EXPECT_EQ(e.transport_tries, 3u);
    EXPECT_EQ(gw.failures().size(), 2u);
    EXPECT_EQ(sleeps, (std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(500),
                                                              std::chrono::milliseconds(1000)}));
}

TEST(Gateway, AlwaysFailingEndpointGivesUpAfterCapWithEveryFailureLogged)
{
    scripted::FakeTransport transport(
        [](const scripted::FakeTransport::Call&, std::size_t) -> HttpResponse { throw TransportFailure("refused"); });
    HttpChatClient client(transport, {"down", "http://x/chat", "m", ""});
    TranscriptStore store;
    Gateway gw(client, store, "m", fast_options());
    EXPECT_THROW(gw.complete("hi", {}), EndpointUnavailable);
    EXPECT_EQ(transport.calls().size(), 5u);
    const auto failures = gw.failures();
    ASSERT_EQ(failures.size(), 5u);
    EXPECT_EQ(failures.back().try_index, 5u);
    EXPECT_EQ(store.size(), 0u);
}

TEST(Gateway, AuthAndContextLengthAreNotRetried)
{
    scripted::FakeTransport auth([](const scripted::FakeTransport::Call&, std::size_t) { return HttpResponse{401, ""}; });
    HttpChatClient c1(auth, {"ep", "http://x/chat", "m", ""});
    TranscriptStore s1;
    Gateway g1(c1, s1, "m", fast_options());
    EXPECT_THROW(g1.complete("hi", {}), AuthError);
    EXPECT_EQ(auth.calls().size(), 1u);

    scripted::FakeTransport ctx([](const scripted::FakeTransport::Call&, std::size_t) {
        return HttpResponse{400, R"({"error": "maximum context length exceeded"})"};
    });
    HttpChatClient c2(ctx, {"ep", "http://x/chat", "m", ""});
    TranscriptStore s2;
    Gateway g2(c2, s2, "m", fast_options());
    const std::string prompt(4000, 'x');
    try {
        g2.complete(prompt, {});
        FAIL();
    } catch (const ContextLengthError& e) {
        EXPECT_EQ(e.estimated_prompt_tokens(), 1000u);
        EXPECT_NE(std::string(e.what()).find("1000 tokens"), std::string::npos);
    }
    EXPECT_EQ(ctx.calls().size(), 1u);
}

TEST(Gateway, BearerTokenFromEnvironment)
{
    ::setenv("RAGPROBE_TEST_CHAT_KEY", "k-123", 1);
    scripted::FakeTransport t([](const scripted::FakeTransport::Call&, std::size_t) { return scripted::chat_reply("x"); });
    HttpChatClient client(t, {"ep", "http://x/chat", "m", "RAGPROBE_TEST_CHAT_KEY"});
    TranscriptStore store;
    Gateway gw(client, store, "m", fast_options());
    gw.complete("hi", {});
    EXPECT_EQ(t.calls()[0].headers.at("Authorization"), "Bearer k-123");
}

TEST(Gateway, EmptyPromptAndBadParamsRejected)
{
    auto client = scripted::chat([](const std::string&) { return "x"; });
    TranscriptStore store;
    Gateway gw(*client, store, "m", fast_options());
    EXPECT_THROW(gw.complete("   ", {}), InvalidArgument);
    EXPECT_THROW(gw.complete("hi", {2.0, 1.5, 10, {}}), InvalidArgument);
    EXPECT_EQ(client->calls(), 0u);
}

TEST(GatewayValidated, YesOnFirstAttempt)
{
    auto client = scripted::chat([](const std::string&) { return "Yes"; });
    TranscriptStore store;
    Gateway gw(*client, store, "m", fast_options());
    const auto e = gw.complete_validated("filter?", {}, validators::yes_no());
    EXPECT_EQ(e.attempt, 1u);
    EXPECT_EQ(e.response_text, "Yes");
}

TEST(GatewayValidated, GarbageThenConformingPassesOnSecondAttempt)
{
    ScriptedChatClient client([](const ChatRequest&, std::size_t i) {
        return i == 0 ? std::string("lorem ipsum") : std::string("Answer [1].\n\n### References\n1. Foo. 2020.");
    });
    TranscriptStore store;
    Gateway gw(client, store, "m", fast_options());
    const auto e = gw.complete_validated("respond", {0.8, 1.0, 2048, 100}, starts_with_references());
    EXPECT_EQ(e.attempt, 2u);
    EXPECT_EQ(e.params.seed, 101);
    EXPECT_EQ(store.size(), 2u);
}

TEST(GatewayValidated, ExhaustionCarriesLastRawOutput)
{
    ScriptedChatClient client([](const ChatRequest&, std::size_t i) { return "no option here " + std::to_string(i); });
    TranscriptStore store;
    Gateway gw(client, store, "m", fast_options());
    try {
        gw.complete_validated("pick", {}, {"option-letter", [](std::string_view) { return false; }});
        FAIL();
    } catch (const ValidationExhausted& e) {
        EXPECT_EQ(e.last_output(), "no option here 2");
        EXPECT_NE(std::string(e.what()).find("3 attempt"), std::string::npos);
    }
    EXPECT_EQ(client.calls(), 3u);
}

TEST(GatewayValidated, FirstAttemptOffset)
{
    ScriptedChatClient client([](const ChatRequest&, std::size_t) { return "Yes"; });
    TranscriptStore store;
    Gateway gw(client, store, "m", fast_options());
    CallContext ctx{"evidence_filter", 4};
    EXPECT_EQ(gw.complete_validated("q", {}, validators::yes_no(), ctx).attempt, 4u);
    EXPECT_THROW(gw.complete_validated("q", {}, validators::yes_no(), {"k", 0}), InvalidArgument);
}

// ---- transcripts ----------------------------------------------------------

TEST(Transcript, PersistedBeforeReturnAndReplayedWithoutNetwork)
{
    TempDir dir;
    const auto path = dir / "transcripts.jsonl";
    std::string first;
    {
        ScriptedChatClient client([](const ChatRequest& r, std::size_t i) {
            return "reply " + std::to_string(i) + " to " + user_prompt(r);
        });
        TranscriptStore store(path, TranscriptMode::cache);
        Gateway gw(client, store, "m", fast_options());
        first = gw.complete("alpha", {0.8, 1.0, 100, {}}).response_text;
        EXPECT_EQ(read_jsonl(path).size(), 1u);
        EXPECT_EQ(gw.complete("alpha", {0.8, 1.0, 100, {}}).response_text, first); // cache hit
        EXPECT_EQ(gw.network_calls(), 1u);
        gw.complete("beta", {});
    }
    const std::string bytes_before = read_file(path);
    ScriptedChatClient offline([](const ChatRequest&, std::size_t) -> std::string { throw TransientError("offline"); });
    TranscriptStore replay(path, TranscriptMode::replay);
    Gateway gw(offline, replay, "m", fast_options());
    const auto e = gw.complete("alpha", {0.8, 1.0, 100, {}});
    EXPECT_EQ(e.response_text, first);
    EXPECT_EQ(gw.network_calls(), 0u);
    EXPECT_THROW(gw.complete("gamma", {}), ReplayMiss);
    EXPECT_EQ(offline.calls(), 0u);
    EXPECT_EQ(read_file(path), bytes_before);
}

TEST(Transcript, KeyCoversEverythingThatChangesOutput)
{
    ExchangeKey base{"ep", "m", "kind", "prompt", {0.8, 1.0, 100, {}}, 1};
    auto changed = [&](auto mutate) {
        ExchangeKey k = base;
        mutate(k);
        return k.digest() != base.digest();
    };
    EXPECT_TRUE(changed([](ExchangeKey& k) { k.endpoint_id = "other"; }));
    EXPECT_TRUE(changed([](ExchangeKey& k) { k.model = "other"; }));
    EXPECT_TRUE(changed([](ExchangeKey& k) { k.kind = "other"; }));
    EXPECT_TRUE(changed([](ExchangeKey& k) { k.prompt += " "; }));
    EXPECT_TRUE(changed([](ExchangeKey& k) { k.params.temperature = 0.7; }));
    EXPECT_TRUE(changed([](ExchangeKey& k) { k.params.seed = 1; }));
    EXPECT_TRUE(changed([](ExchangeKey& k) { k.attempt = 2; }));
    EXPECT_FALSE(changed([](ExchangeKey&) {}));
}

TEST(Transcript, RefreshAlwaysCalls)
{
    ScriptedChatClient client([](const ChatRequest&, std::size_t i) { return std::to_string(i); });
    TranscriptStore store({}, TranscriptMode::refresh);
    Gateway gw(client, store, "m", fast_options());
    EXPECT_EQ(gw.complete("x", {}).response_text, "0");
    EXPECT_EQ(gw.complete("x", {}).response_text, "1");
    EXPECT_THROW(TranscriptStore(TempDir().path() / "absent.jsonl", TranscriptMode::replay), NotFound);
    EXPECT_THROW(parse_transcript_mode("live"), InvalidArgument);
}

TEST(Transcript, ExchangeJsonRoundTrip)
{
    ChatExchange e{"id", "kind", "prompt", {0.1, 0.2, 3, 4}, "resp", 2, "ep", "m", "2024-01-01T00:00:00Z", 3};
    const auto back = exchange_from_json(to_json(e));
    EXPECT_EQ(back.exchange_id, e.exchange_id);
    EXPECT_EQ(back.params, e.params);
    EXPECT_EQ(back.attempt, 2u);
    EXPECT_EQ(back.response_text, "resp");
}

TEST(GatewayConcurrency, InFlightBoundIsRespected)
{
    std::atomic<int> current{0}, peak{0};
    ScriptedChatClient client([&](const ChatRequest&, std::size_t) {
        const int now = ++current;
        int p = peak.load();
        while (now > p && !peak.compare_exchange_weak(p, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
        --current;
        return std::string("ok");
    });
    TranscriptStore store;
    GatewayOptions o = fast_options();
    o.max_in_flight = 3;
    Gateway gw(client, store, "m", o);
    std::vector<std::thread> threads;
    for (int t = 0; t < 12; ++t) {
        threads.emplace_back([&, t] { gw.complete("prompt " + std::to_string(t), {}); });
    }
    for (auto& t : threads) t.join();
    EXPECT_LE(peak.load(), 3);
    EXPECT_EQ(store.size(), 12u);
}

} // namespace
} // namespace ragprobe::llm
