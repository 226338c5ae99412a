#ifndef SOCIALSIM_TEXT_HPP
#define SOCIALSIM_TEXT_HPP

#include <algorithm>
#include <cctype>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace socialsim {

// Whitespace tokenization, used for the corpus length check.
inline std::vector<std::string> split_whitespace(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        const std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) out.emplace_back(text.substr(start, i - start));
    }
    return out;
}

inline std::size_t count_tokens(std::string_view text) { return split_whitespace(text).size(); }

// Topic tokens: whitespace tokens, ASCII-lowercased, with leading and trailing
// punctuation stripped; returned sorted and unique. Non-ASCII bytes pass through.
inline std::vector<std::string> topic_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (auto& tok : split_whitespace(text)) {
        std::size_t b = 0, e = tok.size();
        while (b < e && std::ispunct(static_cast<unsigned char>(tok[b]))) ++b;
        while (e > b && std::ispunct(static_cast<unsigned char>(tok[e - 1]))) --e;
        if (b == e) continue;
        std::string t = tok.substr(b, e - b);
        for (auto& c : t)
            if (static_cast<unsigned char>(c) < 0x80) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        out.push_back(std::move(t));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// |A ∩ B| / |A ∪ B| over sorted unique ranges; 0 when both are empty.
inline double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t i = 0, j = 0, inter = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (b[j] < a[i]) ++j;
        else { ++inter; ++i; ++j; }
    }
    const std::size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace socialsim

#endif  // SOCIALSIM_TEXT_HPP
