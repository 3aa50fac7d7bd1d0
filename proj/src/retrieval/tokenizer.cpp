#include "ragprobe/retrieval/tokenizer.hpp"

#include <cctype>

namespace ragprobe::retrieval {

std::vector<std::string> Tokenizer::tokenize(std::string_view text) const
{
    std::vector<std::string> out;
    std::string cur;
    auto emit = [&] {
        if (!cur.empty()) {
            if (!stopwords_.contains(cur)) {
                out.push_back(cur);
            }
            cur.clear();
        }
    };
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) != 0 || c >= 0x80) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else {
            emit();
        }
    }
    emit();
    return out;
}

} // namespace ragprobe::retrieval
