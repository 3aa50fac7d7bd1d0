#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ragprobe::retrieval {

/// Lowercases ASCII, splits on every non-alphanumeric byte and keeps digits.
/// Bytes >= 0x80 count as word characters so UTF-8 text is not shredded.
/// No stemming; stopword removal is opt-in.
class Tokenizer {
public:
    Tokenizer() = default;
    explicit Tokenizer(std::set<std::string> stopwords) : stopwords_(std::move(stopwords)) {}

    std::vector<std::string> tokenize(std::string_view text) const;

    const std::set<std::string>& stopwords() const { return stopwords_; }

private:
    std::set<std::string> stopwords_;
};

} // namespace ragprobe::retrieval
