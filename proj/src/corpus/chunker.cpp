#include "ragprobe/corpus/chunker.hpp"

#include <string_view>

#include "ragprobe/common/error.hpp"
#include "ragprobe/common/text.hpp"

namespace ragprobe::corpus {

namespace {

bool is_ws(char c)
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Paragraph units: text up to and including a whitespace run that holds at
// least two newlines. Leading whitespace joins the first unit.
std::vector<std::string_view> paragraph_units(std::string_view body)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < body.size()) {
        if (!is_ws(body[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        int newlines = 0;
        while (j < body.size() && is_ws(body[j])) {
            newlines += body[j] == '\n' ? 1 : 0;
            ++j;
        }
        bool has_text_before = false;
        for (std::size_t k = start; k < i; ++k) {
            if (!is_ws(body[k])) {
                has_text_before = true;
                break;
            }
        }
        if (newlines >= 2 && has_text_before && j < body.size()) {
            out.push_back(body.substr(start, j - start));
            start = j;
        }
        i = j;
    }
    if (start < body.size()) {
        out.push_back(body.substr(start));
    }
    return out;
}

bool is_closer(char c)
{
    return c == '"' || c == '\'' || c == ')' || c == ']';
}

// Sentence units: text through [.!?] plus closing quotes/brackets and the
// following whitespace run.
std::vector<std::string_view> sentence_units(std::string_view para)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < para.size()) {
        char c = para[i];
        if (c == '.' || c == '!' || c == '?') {
            std::size_t j = i + 1;
            while (j < para.size() && is_closer(para[j])) {
                ++j;
            }
            if (j < para.size() && is_ws(para[j])) {
                while (j < para.size() && is_ws(para[j])) {
                    ++j;
                }
                if (j < para.size()) {
                    out.push_back(para.substr(start, j - start));
                    start = j;
                }
                i = j;
                continue;
            }
        }
        ++i;
    }
    if (start < para.size()) {
        out.push_back(para.substr(start));
    }
    return out;
}

// Last resort for a single over-long sentence.
std::vector<std::string_view> hard_split(std::string_view s, std::size_t max)
{
    std::vector<std::string_view> out;
    while (s.size() > max) {
        std::size_t cut = 0;
        for (std::size_t i = max; i > 0; --i) {
            if (is_ws(s[i - 1])) {
                cut = i;
                break;
            }
        }
        if (cut == 0) {
            cut = text::utf8_floor(s, max);
            if (cut == 0) {
                cut = max;
            }
        }
        out.push_back(s.substr(0, cut));
        s.remove_prefix(cut);
    }
    if (!s.empty()) {
        out.push_back(s);
    }
    return out;
}

class Packer {
public:
    Packer(std::string_view body, std::size_t max) : body_(body), max_(max) {}

    void add(std::string_view unit)
    {
        if (len_ > 0 && len_ + unit.size() > max_) {
            flush();
        }
        if (len_ == 0) {
            begin_ = static_cast<std::size_t>(unit.data() - body_.data());
        }
        len_ += unit.size();
    }

    void flush()
    {
        if (len_ > 0) {
            chunks_.push_back(body_.substr(begin_, len_));
            len_ = 0;
        }
    }

    std::vector<std::string_view> take()
    {
        flush();
        return std::move(chunks_);
    }

private:
    std::string_view body_;
    std::size_t max_;
    std::size_t begin_ = 0;
    std::size_t len_ = 0;
    std::vector<std::string_view> chunks_;
};

} // namespace

std::vector<Passage> chunk_document(const Document& doc, std::size_t max_chunk_chars)
{
    if (max_chunk_chars < kMinChunkChars) {
        throw InvalidArgument("max_chunk_chars must be >= " + std::to_string(kMinChunkChars));
    }
    std::string_view body = doc.body;
    Packer packer(body, max_chunk_chars);
    for (auto para : paragraph_units(body)) {
        if (para.size() <= max_chunk_chars) {
            packer.add(para);
            continue;
        }
        packer.flush();
        for (auto sentence : sentence_units(para)) {
            if (sentence.size() <= max_chunk_chars) {
                packer.add(sentence);
                continue;
            }
            packer.flush();
            for (auto piece : hard_split(sentence, max_chunk_chars)) {
                packer.add(piece);
            }
        }
        packer.flush();
    }

    std::vector<Passage> out;
    std::uint32_t seq = 0;
    for (auto chunk : packer.take()) {
        Passage p;
        p.passage_id = make_passage_id(doc.doc_id, seq);
        p.doc_id = doc.doc_id;
        p.seq = seq;
        p.title = doc.title;
        p.text = std::string(chunk);
        p.source = doc.source;
        p.metadata = doc.metadata;
        out.push_back(std::move(p));
        ++seq;
    }
    return out;
}

} // namespace ragprobe::corpus
