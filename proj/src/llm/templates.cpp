#include "ragprobe/llm/templates.hpp"

#include <array>
#include <regex>
#include <set>

#include "ragprobe/common/error.hpp"

namespace ragprobe::llm {
namespace {

constexpr std::string_view kStatementExtraction = R"TPL(Please breakdown the given text into independent facts. Review the examples provided below to gain a clearer understanding of the task requirements and the expected output format.

Input: He made his acting debut in the film The Moon is the Sun’s Dream (1992), and continued to appear in small and supporting roles throughout the 1990s.
Output: ["He made his acting debut in the film.", "He made his acting debut in The Moon is the Sun’s Dream.", "The Moon is the Sun’s Dream is a film.", "The Moon is the Sun’s Dream was released in 1992.", "After his acting debut, he appeared in small and supporting roles.", "After his acting debut, he appeared in small and supporting roles throughout the 1990s."]

Input: He is also a successful producer and engineer, having worked with a wide variety of artists, including Willie Nelson, Tim McGraw, and Taylor Swift.
Output: ["He is successful.", "He is a producer.", "He is an engineer.", "He has worked with a wide variety of artists.", "illie Nelson is an artist.", "He has worked with Willie Nelson.", "Tim McGraw is an artist.", "He has worked with Tim McGraw.", "Taylor Swift is an artist.", "He has worked with Taylor Swift."]

Input: Possible causes for right lower abdominal pain in a young female are Appendicitis, Inflammatory bowel disease, Diverticulitis, Kidney stone, urinary tract infection, Ovarian cyst or torsion, Ectopic pregnancy, Pelvic inflammatory disease, endometriosis.
Output: ["Possible cause for right lower abdominal pain in a young female: Appendicitis.", "Possible cause for right lower abdominal pain in a young female: Inflammatory bowel disease.", "Possible cause for right lower abdominal pain in a young female: Diverticulitis.", "Possible cause for right lower abdominal pain in a young female: Kidney stone.", "Possible cause for right lower abdominal pain in a young female: urinary tract infection.", "Possible cause for right lower abdominal pain in a young female: Ovarian cyst or torsion.", "Possible cause for right lower abdominal pain in a young female: Ectopic pregnancy.", "Possible cause for right lower abdominal pain in a young female: Pelvic inflammatory disease.","Possible cause for right lower abdominal pain in a young female: endometriosis."]

Input: Hep A IgM refers to a specific type of antibody called Immunoglobulin M (IgM) against the virus hepatitis A. When infected with hepatitis A, these antibodies are detectable at symptom onset and remain detectable for approximately three to six months. These antibodies might also be detectable in the first month after hepatitis A vaccination. A negative or non-reactive result means no IgM antibodies against hepatitis A found in your serum, meaning the absence of an acute or recent hepatitis A virus infection.
Output: ["Hep A IgM refers to a specific type of antibody called Immunoglobulin M (IgM) against the virus hepatitis A.", "When infected with hepatitis A, these antibodies are detectable at the time of symptom onset.", "When infected with hepatitis A, these antibodies remain detectable for approximately three to six months after infection.", "These antibodies might also be detectable in the first month after hepatitis A vaccination.", "The absence of IgM antibodies against hepatitis A in your serum indicates the absence of an acute or recent hepatitis A virus infection.", "A negative or non-reactive result means that there were no IgM antibodies against hepatitis A found in your serum."]

Input: methotrexate (Otrexup, Rasuvo, RediTrex) and thalidomide (Contergan, Thalomid) are both considered contraindicated for treatment of UC in pregnancy. possible treatment for UC during pregnancy include low-risk drugs such as aminosalicylates (sulfasalazine and mesalamine), immunomodulators (azathioprine, cyclosporine A ,6-mercaptopurine) and corticosteroids. Biological agents such as Infliximabl, Adalimumab, Vedolizumab and Ustekinumab is generally avoided during pregnancy as their safety in pregnancy is not well established yet.
Output: ["Methotrexate (Otrexup, Rasuvo, RediTrex) is contraindicated for treatment of ulcerative colitis in pregnancy.", "Thalidomide (Contergan, Thalomid) is contraindicated for treatment of ulcerative colitis in pregnancy.", "Aminosalicylates (sulfasalazine and mesalamine) are considered low-risk drugs for treatment of ulcerative colitis during pregnancy.", "Immunomodulators (azathioprine, cyclosporine A, 6-mercaptopurine) are considered low-risk drugs for treatment of ulcerative colitis during pregnancy.", "Corticosteroids are considered low-risk drugs for treatment of ulcerative colitis during pregnancy.", "Treatment for ulcerative colitis during pregnancy with biological agents such as Adalimumab is generally avoided during pregnancy as their safety in pregnancy is not well established yet.", "Treatment for ulcerative colitis during pregnancy with biological agents such as Vedolizumab is generally avoided during pregnancy as their safety in pregnancy is not well established yet.", "Treatment for ulcerative colitis during pregnancy with biological agents such as Infliximab is generally avoided during pregnancy as their safety in pregnancy is not well established yet.", "Treatment for ulcerative colitis during pregnancy with biological agents such as Ustekinumab is generally avoided during pregnancy as their safety in pregnancy is not well established yet."]

# YOUR TASK

Input: {input}

Output: )TPL";

constexpr std::string_view kMustHave = R"TPL(Please categorize the provided statements as either "must-have" or "nice-to-have".

*Must-have*: essential independent facts required to provide a complete answer to the given query.

*Nice-to-have*: supplementary or additional information that is useful but not essential.

Review the examples provided below to gain a clearer understanding of the task requirements and the expected output format.

Query: I am a 33 years old female with right lower abdominal pain , what could it be?

Answer: Possible causes for right lower abdominal pain in a young female are Appendicitis, Inflammatory bowel disease, Diverticulitis, Kidney stone, urinary tract infection, Ovarian cyst or torsion, Ectopic pregnancy, Pelvic inflammatory disease, endometriosis.

Statement: ["Possible cause for right lower abdominal pain in a young female: Appendicitis.", "Possible cause for right lower abdominal pain in a young female: Inflammatory bowel disease.", "Possible cause for right lower abdominal pain in a young female: Diverticulitis.", "Possible cause for right lower abdominal pain in a young female: Kidney stone.", "Possible cause for right lower abdominal pain in a young female: urinary tract infection.", "Possible cause for right lower abdominal pain in a young female: Ovarian cyst or torsion.", "Possible cause for right lower abdominal pain in a young female: Ectopic pregnancy.", "Possible cause for right lower abdominal pain in a young female: Pelvic inflammatory disease.", "Possible cause for right lower abdominal pain in a young female: endometriosis."]

Output: ["Must-have", "Must-have", "Must-have", "Must-have", "Must-have", "Must-have", "Must-have", "Must-have", "Must-have"]

Query: So what does the non reactive mean for the hep a igm

Answer: Hep A IgM refers to a specific type of antibody called Immunoglobulin M (IgM) against the virus hepatitis A. When infected with hepatitis A, these antibodies are detectable at symptom onset and remain detectable for approximately three to six months. These antibodies might also be detectable in the first month after hepatitis A vaccination. A negative or non-reactive result means no IgM antibodies against hepatitis A found in your serum, meaning the absence of an acute or recent hepatitis A virus infection.

Statements: ["Hep A IgM refers to a specific type of antibody called Immunoglobulin M (IgM) against the virus hepatitis A.", "When infected with hepatitis A, these antibodies are detectable at the time of symptom onset.", "When infected with hepatitis A, these antibodies remain detectable for approximately three to six months after infection.", "These antibodies might also be detectable in the first month after hepatitis A vaccination.", "The absence of IgM antibodies against hepatitis A in your serum indicates the absence of an acute or recent hepatitis A virus infection.", "A negative or non-reactive result means that there were no IgM antibodies against hepatitis A found in your serum."]

Output: ["Must-have", "Nice-to-have", "Nice-to-have", "Nice-to-have", "Must-have", "Must-have"]

Query: What medications are contraindicated for a pregnant woman with ulcerative colitis?

Answer: methotrexate (Otrexup, Rasuvo, RediTrex) and thalidomide (Contergan, Thalomid) are both considered contraindicated for treatment of UC in pregnancy. possible treatment for UC during pregnancy include low-risk drugs such as aminosalicylates (sulfasalazine and mesalamine), immunomodulators (azathioprine, cyclosporine A ,6-mercaptopurine) and corticosteroids. Biological agents such as Infliximabl, Adalimumab, Vedolizumab and Ustekinumab is generally avoided during pregnancy as their safety in pregnancy is not well established yet. Treatment for ulcerative colitis during pregnancy should be tailored by your OBGYN and gastroenterologist.

Statements: ["Methotrexate (Otrexup, Rasuvo, RediTrex) is contraindicated for treatment of ulcerative colitis in pregnancy.", "Thalidomide (Contergan, Thalomid) is contraindicated for treatment of ulcerative colitis in pregnancy.", "Aminosalicylates (sulfasalazine and mesalamine) are considered low-risk drugs for treatment of ulcerative colitis during pregnancy.", "Immunomodulators (azathioprine, cyclosporine A, 6-mercaptopurine) are considered low-risk drugs for treatment of ulcerative colitis during pregnancy.", "Corticosteroids are considered low-risk drugs for treatment of ulcerative colitis during pregnancy.", "Treatment for ulcerative colitis during pregnancy with biological agents such as Adalimumab is generally avoided during pregnancy as their safety in pregnancy is not well established yet.", "Treatment for ulcerative colitis during pregnancy with biological agents such as Vedolizumab is generally avoided during pregnancy as their safety in pregnancy is not well established yet.", "Treatment for ulcerative colitis during pregnancy with biological agents such as Infliximab is generally avoided during pregnancy as their safety in pregnancy is not well established yet.", "Treatment for ulcerative colitis during pregnancy with biological agents such as Ustekinumab is generally avoided during pregnancy as their safety in pregnancy is not well established yet.", "Treatment for ulcerative colitis during pregnancy should be tailored by your OBGYN and gastroenterologist."]

Output: ["Must-have", "Must-have", "Nice-to-have", "Nice-to-have", "Nice-to-have", "Nice-to-have", "Nice-to-have", "Nice-to-have", "Nice-to-have", "Must-have"]

# YOUR TASK

Respond only with a list containing either 'Must-have' or 'Nice-to-have' for each statement. No other responses are required.

Query: {query}

Answer: {answer}

Statements: {statements}

Output: )TPL";

constexpr std::string_view kPatientInstruction =
    "Respond to the provided clinical inquiry. Your response must be accurate, clear, and include all essential "
    "information while omitting extraneous details.";

constexpr std::string_view kUsmleInstruction =
    "Answer to the provided multiple-choice question about medical knowledge in a step-by-step fashion. "
    "Output your explanation and single option from the given options as the final answer.";

constexpr std::string_view kResponseNonRag = R"TPL({task_instruction} Additionally, distinguish between statements within your response that require authoritative references and those that do not. Here, a "statement" refers to an atomic or foundational piece of information, which may not necessarily form a complete sentence. For statements requiring references, include citations immediately after the respective statements, with reference numbers enclosed in square brackets (e.g., [1][2][3]). Citations may also be placed within the sentence, rather than just at the end, when appropriate. At the end of your response, provide a consolidated list of references, formatted according to AMA guidelines. Label the section as "### References," and number the references sequentially (1, 2, 3, etc.), with each reference on a separate line. Every reference listed MUST be appropriately cited within the response using square brackets. Please double-check thoroughly to ensure this requirement is met without exception.

### Input Query

{query})TPL";

constexpr std::string_view kResponseRag = R"TPL({task_instruction} Additionally, distinguish between statements within your response that require authoritative references and those that do not. Here, a "statement" refers to an atomic or foundational piece of information, which may not necessarily form a complete sentence. For statements requiring references, include citations immediately after the respective statements, with reference numbers enclosed in square brackets (e.g., [1][2][3]). Citations may also be placed within the sentence, rather than just at the end, when appropriate.

The provided document snippets are retrieved through a search engine and may be used as references to support your response. External references not included in the provided materials may also be incorporated. At the end of your response, provide a consolidated list of references, formatted according to AMA guidelines. Label the section as "### References," and number the references sequentially (1, 2, 3, etc.), with each reference on a separate line. Every reference listed MUST be appropriately cited within the response using square brackets. Please double-check thoroughly to ensure this requirement is met without exception.

{documents}

### Input Query

{query})TPL";

constexpr std::string_view kDistinctiveFilter = R"TPL(You are given a single sentence. Your task is to decide whether this sentence is distinctive or non-distinctive.

A sentence is Distinctive only if:

It does not simply restate or paraphrase the question stem, and

It introduces either:

(a) clinical reasoning or inference (e.g., "this pattern suggests a mechanical cause", "these findings are consistent with TSC"), or

(b) definitions or factual information that go beyond what is stated in the question, or 

(c) a final judgment or answer sentence (e.g., "the most accurate test is ~", "the answer is ~")

A sentence is Non-Distinctive if it falls into any of the following:

It restates or rewords content already found in the question

It presents a raw observation or finding from the question (e.g., age, vitals, exam result)

It provides a definition or fact that is already included or implied in the question

It is procedural, meta, or instructional (e.g., “Let’s analyze…” or “We need to consider…”)

You may refer to the list below when deciding. All of these are non-distinctive sentences:

- To determine the most strongly associated condition for the patient described, we need to analyze the clinical information provided step-by-step.

- To determine the correct answer, let's analyze the given information step-by-step.

- To determine the most strongly associated condition with the patient's symptoms, we need to analyze the information provided.

- To address the query, we will analyze the patient's behavior and symptoms step-by-step to determine the most appropriate psychological defense mechanism being demonstrated.

- The patient's behavior will be analyzed to match the most appropriate psychological defense mechanism from the given options.

- To answer this question, we need to analyze the patient's behavior and determine which coping mechanism he is exhibiting.

- To approach this question, let's analyze the patient's behavior and the options provided.

- To determine the most accurate test for the condition described in the question, we need to consider the patient's symptoms.

- We need to consider physical examination findings.

- We need to consider laboratory test results in the context of common clinical scenarios.

- Step-by-Step Analysis: Patient Presentation.

- Step-by-Step Analysis: Laboratory Findings.

Question: A 1-year-old girl is brought to a neurologist due to increasing seizure frequency over the past 2 months. She recently underwent a neurology evaluation which revealed hypsarrhythmia on electroencephalography (EEG) with a mix of slow waves, multifocal spikes, and asynchrony. Her parents have noticed the patient occasionally stiffens and spreads her arms at home. She was born at 38-weeks gestational age without complications. She has no other medical problems. Her medications consist of lamotrigine and valproic acid. Her temperature is 98.3°F (36.8°C), blood pressure is 90/75 mmHg, pulse is 94/min, and respirations are 22/min. Physical exam reveals innumerable hypopigmented macules on the skin and an irregularly shaped, thickened, and elevated plaque on the lower back. Which of the following is most strongly associated with this patient's condition? 

For the given question, all of these are non-distinctive sentences (not limited to the followings):

- The patient is a 1-year-old girl.

- The patient has a history of increasing seizure frequency.

- The EEG reveals hypsarrhythmia.

- The patient has numerous hypopigmented macules.

- The patient exhibits occasional stiffening and spreading of arms.

- The patient has an irregularly shaped, thickened, and elevated plaque on the lower back.

- The patient is currently on lamotrigine.

- The patient is currently on valproic acid. 

- The patient was born at term without complications.

- No other medical problems were reported for the patient.

- And more ...

# Question

{question}

# Target sentence (Do not output anything other than "Distinctive" or "Non-distinctive".)

{sentence})TPL";

constexpr std::string_view kCitationAlignment = R"TPL(You are given a model-generated response that includes statements with inline citations (e.g., [1], [2], etc.), along with a list of references corresponding to those citations.

Your task is to identify the alignment between each statement and the reference(s) it is associated with, based solely on the position of the citation markers in the response.

Instructions:

1. For each statement in the response, determine whether it is linked to one or more references by locating citation markers (e.g., [1]) near or within the statement.

2. For each linked reference, assign it to the corresponding statement.

3. Do not assess the factual accuracy or content of the reference. Only use the citation markers and their position in the response to make the alignment.

4. Consider a "statement" to be a single sentence or a semantically independent clause.

### Input:

- **Model Response**:
{model_response}

- **Statements**:
{model_statements}

- **References**:
{references}

### Output format:
Your output should be organized in JSON, without any other responses, using the following format:

{
  "#1": {
    "statement": "<copy of the statement>",
    "refs": [1, 3] // or [] if no references are associated
  },
  "#2": {
    "statement": "...",
    "refs": [...]
  }
}

### Output:
)TPL";

constexpr std::string_view kEvidenceFilter = R"TPL(Given a query and a text passage, determine whether the passage contains supporting evidence for the query. Supporting evidence means that the passage provides clear, relevant, and factual information that directly backs or justifies the answer to the query.

Respond with one of the following labels:

"Yes" if the passage contains supporting evidence for the query.

"No" if the passage does not contain supporting evidence.

You should respond with only the label (Yes or No) without any additional explanation.

Question: {question}

Passage: {passage})TPL";

constexpr std::string_view kRationaleReformulation =
    "Respond to the following clinical decision-making task using the provided patient information, in a "
    "step-by-step fashion. Output your explanation and single option from the given options as the final "
    "answer.\n\n{question}";

struct KindName {
    TemplateKind kind;
    std::string_view name;
};

constexpr std::array<KindName, 8> kNames{{
    {TemplateKind::statement_extraction, "statement_extraction"},
    {TemplateKind::must_have, "must_have"},
    {TemplateKind::response_nonrag, "response_nonrag"},
    {TemplateKind::response_rag, "response_rag"},
    {TemplateKind::distinctive_filter, "distinctive_filter"},
    {TemplateKind::citation_alignment, "citation_alignment"},
    {TemplateKind::evidence_filter, "evidence_filter"},
    {TemplateKind::rationale_reformulation, "rationale_reformulation"},
}};

const std::regex& placeholder_re()
{
    static const std::regex re(R"(\{([a-z_][a-z0-9_]*)\})");
    return re;
}

constexpr std::string_view kDocumentsSlot = "documents";

std::string render_documents(const Bindings& b)
{
    if (!b.contains("passage_1")) {
        throw InvalidArgument("missing binding for placeholder 'passage_1'");
    }
    std::string out;
    for (std::size_t i = 1;; ++i) {
        auto p = b.find("passage_" + std::to_string(i));
        if (p == b.end()) break;
        const std::string meta_key = "metadata_" + std::to_string(i);
        auto m = b.find(meta_key);
        if (m == b.end()) {
            throw InvalidArgument("missing binding for placeholder '" + meta_key + "'");
        }
        if (i > 1) out += "\n\n";
        out += "- Document -\n\n";
        out += p->second;
        out += "\n\nMetadata: ";
        out += m->second;
    }
    return out;
}

} // namespace

std::string_view to_string(TemplateKind k)
{
    for (const auto& kn : kNames) {
        if (kn.kind == k) return kn.name;
    }
    return "unknown";
}

TemplateKind parse_template_kind(std::string_view name)
{
    for (const auto& kn : kNames) {
        if (kn.name == name) return kn.kind;
    }
    throw InvalidArgument("unknown template kind '" + std::string(name) + "'");
}

std::string_view template_body(TemplateKind kind)
{
    switch (kind) {
    case TemplateKind::statement_extraction: return kStatementExtraction;
    case TemplateKind::must_have: return kMustHave;
    case TemplateKind::response_nonrag: return kResponseNonRag;
    case TemplateKind::response_rag: return kResponseRag;
    case TemplateKind::distinctive_filter: return kDistinctiveFilter;
    case TemplateKind::citation_alignment: return kCitationAlignment;
    case TemplateKind::evidence_filter: return kEvidenceFilter;
    case TemplateKind::rationale_reformulation: return kRationaleReformulation;
    }
    throw InvalidArgument("unknown template kind");
}

std::vector<std::string> required_placeholders(TemplateKind kind)
{
    const std::string_view body = template_body(kind);
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (std::cregex_iterator it(body.data(), body.data() + body.size(), placeholder_re()), end; it != end; ++it) {
        std::string name = (*it)[1].str();
        if (name == kDocumentsSlot) continue;
        if (seen.insert(name).second) out.push_back(std::move(name));
    }
    return out;
}

std::string render_prompt(TemplateKind kind, const Bindings& bindings)
{
    const std::string_view body = template_body(kind);
    for (const auto& name : required_placeholders(kind)) {
        if (!bindings.contains(name)) {
            throw InvalidArgument("missing binding for placeholder '" + name + "'");
        }
    }
    const bool with_documents = kind == TemplateKind::response_rag;
    const std::string documents = with_documents ? render_documents(bindings) : std::string{};

    std::string out;
    out.reserve(body.size() + 256);
    const char* cursor = body.data();
    for (std::cregex_iterator it(body.data(), body.data() + body.size(), placeholder_re()), end; it != end; ++it) {
        const auto& m = *it;
        out.append(cursor, m[0].first);
        const std::string name = m[1].str();
        if (with_documents && name == kDocumentsSlot) {
            out += documents;
        } else {
            out += bindings.at(name);
        }
        cursor = m[0].second;
    }
    out.append(cursor, body.data() + body.size());
    return out;
}

std::string_view response_instruction(QueryStyle style)
{
    return style == QueryStyle::usmle ? kUsmleInstruction : kPatientInstruction;
}

} // namespace ragprobe::llm
