#include "ragprobe/pipeline/pipeline.hpp"

#include "ragprobe/citation/reference_section.hpp"
#include "ragprobe/citation/validators.hpp"
#include "ragprobe/common/error.hpp"
#include "ragprobe/common/text.hpp"

namespace ragprobe::pipeline {
namespace {

llm::QueryStyle style_of(const Query& q)
{
    return q.query_type == "usmle" ? llm::QueryStyle::usmle : llm::QueryStyle::patient;
}

} // namespace

Pipeline::Pipeline(PipelineConfig config, PipelineDeps deps)
    : config_(std::move(config)), deps_(std::move(deps)), digest_(config_digest(config_))
{
    validate(config_);
    if (config_.use_retrieval) {
        if (deps_.retriever == nullptr)
            throw ConfigError("pipeline config '" + config_.name + "' retrieves but no retriever was supplied");
        if (!deps_.passages)
            throw ConfigError("pipeline config '" + config_.name + "' retrieves but no passage resolver was supplied");
    }
}

llm::SamplingParams Pipeline::response_params() const
{
    llm::SamplingParams p = llm::sampling_profile(config_.response_profile);
    p.seed = config_.seed;
    return p;
}

std::string Pipeline::reformulate_query(const std::string& question, std::string* exchange_id)
{
    if (text::trim(question).empty()) throw InvalidArgument("cannot reformulate an empty question");
    const std::string prompt = llm::render_prompt(llm::TemplateKind::rationale_reformulation, {{"question", question}});
    const auto ex = deps_.gateway.complete_validated(prompt, response_params(), llm::validators::non_empty(),
                                                     {std::string(llm::to_string(llm::TemplateKind::rationale_reformulation))});
    if (exchange_id) *exchange_id = ex.exchange_id;
    return ex.response_text;
}

FilterOutcome Pipeline::filter_passages(const std::string& question, const std::vector<retrieval::RetrievalHit>& hits)
{
    if (hits.empty()) throw InvalidArgument("evidence filter needs at least one passage");
    std::vector<std::string> ids;
    ids.reserve(hits.size());
    for (const auto& h : hits) ids.push_back(h.passage_id);
    const std::vector<corpus::Passage> passages = deps_.passages(ids);
    if (passages.size() != hits.size()) throw NotFound("passage resolver returned fewer passages than requested");

    llm::Gateway& gateway = deps_.filter_gateway ? *deps_.filter_gateway : deps_.gateway;
    const std::string kind(llm::to_string(llm::TemplateKind::evidence_filter));
    FilterOutcome out;
    for (std::size_t i = 0; i < hits.size(); ++i) {
        const std::string prompt = llm::render_prompt(llm::TemplateKind::evidence_filter,
                                                      {{"question", question}, {"passage", passages[i].text}});
        const auto ex = gateway.complete_validated(prompt, llm::sampling_profile("deterministic"),
                                                   llm::validators::yes_no(), {kind});
        const bool keep = llm::parse_yes_no(ex.response_text).value_or(false);
        out.verdicts.push_back({hits[i].passage_id, keep, ex.exchange_id});
        if (keep) out.kept.push_back(hits[i].passage_id);
    }
    out.all_filtered = out.kept.empty();
    return out;
}

GeneratedAnswer Pipeline::generate_answer(const Query& query, const std::vector<corpus::Passage>& context)
{
    GeneratedAnswer out;
    llm::Bindings bindings{{"task_instruction", std::string(llm::response_instruction(style_of(query)))},
                           {"query", query.text}};
    if (context.empty()) {
        out.prompt_kind = llm::TemplateKind::response_nonrag;
    } else {
        out.prompt_kind = llm::TemplateKind::response_rag;
        for (std::size_t i = 0; i < context.size(); ++i) {
            bindings["passage_" + std::to_string(i + 1)] = context[i].text;
            bindings["metadata_" + std::to_string(i + 1)] = corpus::render_metadata(context[i]);
        }
    }
    out.prompt = llm::render_prompt(out.prompt_kind, bindings);
    const auto ex = deps_.gateway.complete_validated(out.prompt, response_params(), citation::citations_resolvable(),
                                                     {std::string(llm::to_string(out.prompt_kind))});
    out.answer_text = ex.response_text;
    out.references_raw = citation::reference_section_text(ex.response_text);
    out.exchange_ids.push_back(ex.exchange_id);
    out.last_attempt = ex.attempt;
    return out;
}

RunRecord Pipeline::run(const Query& query)
{
    RunRecord r;
    r.query_id = query.query_id;
    r.config_name = config_.name;
    r.config_digest = digest_;
    r.snapshot_digest = deps_.snapshot_digest;
    r.record_id = make_record_id(query.query_id, digest_);
    r.retrieval_query = query.text;
    r.extraction_rule = query.item ? std::string(to_string(ExtractionRule::unparsed)) : "";

    std::string stage = "reformulate";
    try {
        if (text::trim(query.text).empty()) throw InvalidArgument("query '" + query.query_id + "' is empty");
        if (config_.use_reformulation) {
            std::string ex_id;
            r.rationale = reformulate_query(query.text, &ex_id);
            r.exchange_ids.push_back(ex_id);
            r.retrieval_query = *r.rationale;
        }

        stage = "retrieve";
        if (config_.use_retrieval) {
            auto result = deps_.retriever->search(r.retrieval_query, config_.k);
            if (result.status == retrieval::SearchStatus::empty_query)
                throw InvalidArgument("retrieval query has no searchable tokens");
            if (result.hits.empty()) throw NotFound("retriever returned no passages");
            r.retrieved = std::move(result.hits);
        }

        stage = "filter";
        if (config_.use_filtering) {
            const std::string& against = config_.filter_on_rationale ? *r.rationale : query.text;
            FilterOutcome f = filter_passages(against, r.retrieved);
            for (const auto& v : f.verdicts) r.exchange_ids.push_back(v.exchange_id);
            r.filter_verdicts = std::move(f.verdicts);
            r.kept_after_filter = std::move(f.kept);
            r.all_filtered = f.all_filtered;
        } else {
            for (const auto& h : r.retrieved) r.kept_after_filter.push_back(h.passage_id);
        }

        stage = "generate";
        std::vector<corpus::Passage> context;
        if (!r.kept_after_filter.empty()) context = deps_.passages(r.kept_after_filter);
        GeneratedAnswer answer;
        try {
            answer = generate_answer(query, context);
        } catch (const llm::ValidationExhausted& e) {
            r.answer_text = e.last_output();
            throw;
        }
        r.prompt_kind = std::string(llm::to_string(answer.prompt_kind));
        r.context_passages = context.size();
        r.answer_text = answer.answer_text;
        r.references_raw = answer.references_raw;
        r.exchange_ids.insert(r.exchange_ids.end(), answer.exchange_ids.begin(), answer.exchange_ids.end());

        stage = "extract";
        if (query.item) {
            ExtractedOption opt = extract_option(r.answer_text, query.item->options);
            if (!opt.letter) {
                // One extra sample, accepted only if it is itself well formed and parseable.
                llm::SamplingParams params = response_params();
                const std::size_t attempt = answer.last_attempt + 1;
                if (params.seed) *params.seed += static_cast<std::int64_t>(attempt) - 1;
                const auto ex = deps_.gateway.complete(answer.prompt, params,
                                                       {std::string(llm::to_string(answer.prompt_kind)), attempt});
                r.exchange_ids.push_back(ex.exchange_id);
                ExtractedOption retry = extract_option(ex.response_text, query.item->options);
                if (retry.letter && citation::citations_resolvable().check(ex.response_text)) {
                    opt = retry;
                    r.answer_text = ex.response_text;
                    r.references_raw = citation::reference_section_text(ex.response_text);
                }
            }
            r.extracted_option = opt.letter;
            r.extraction_rule = std::string(to_string(opt.rule));
            r.correct = opt.letter && *opt.letter == query.item->gold;
        }
    } catch (const std::exception& e) {
        r.error = StageError{stage, e.what()};
        if (query.item) r.correct = false;
    }
    return r;
}

} // namespace ragprobe::pipeline
