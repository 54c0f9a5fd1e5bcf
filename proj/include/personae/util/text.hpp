#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace personae::text {

inline bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

inline bool is_blank(std::string_view s) { return trim(s).empty(); }

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline std::string to_upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

inline bool starts_with_icase(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[i])) !=
            std::tolower(static_cast<unsigned char>(prefix[i])))
            return false;
    }
    return true;
}

inline std::vector<std::string> split_lines(std::string_view s) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto end = s.find('\n', start);
        if (end == std::string_view::npos) end = s.size();
        auto line = s.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.emplace_back(line);
        start = end + 1;
    }
    return lines;
}

/// Lowercased copy with every whitespace run collapsed to one space, plus an
/// index map from each output byte back to its source offset.
struct Normalized {
    std::string text;
    std::vector<std::size_t> source_offset;
};

inline Normalized normalize_with_offsets(std::string_view s) {
    Normalized n;
    bool pending_space = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (is_space(c)) {
            pending_space = !n.text.empty();
            continue;
        }
        if (pending_space) {
            n.text.push_back(' ');
            n.source_offset.push_back(i - 1);
            pending_space = false;
        }
        n.text.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        n.source_offset.push_back(i);
    }
    return n;
}

inline std::string normalize(std::string_view s) { return normalize_with_offsets(s).text; }

/// Half-open byte range into some source text.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
    friend bool operator==(const Span&, const Span&) = default;
};

/// Splits prose into sentences on '.', '!' or '?' followed by whitespace or
/// end of input, and on blank lines. Returned spans exclude surrounding space.
inline std::vector<Span> sentence_spans(std::string_view s) {
    std::vector<Span> spans;
    std::size_t start = 0;
    auto flush = [&](std::size_t end) {
        std::size_t b = start;
        std::size_t e = end;
        while (b < e && is_space(s[b])) ++b;
        while (e > b && is_space(s[e - 1])) --e;
        if (e > b) spans.push_back({b, e});
        start = end;
    };
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '.' || c == '!' || c == '?') {
            std::size_t j = i + 1;
            while (j < s.size() && (s[j] == '.' || s[j] == '!' || s[j] == '?' || s[j] == '"' ||
                                    s[j] == '\'' || s[j] == ')'))
                ++j;
            if (j == s.size() || is_space(s[j])) {
                flush(j);
                i = j - 1;
            }
        } else if (c == '\n') {
            std::size_t j = i + 1;
            while (j < s.size() && (s[j] == ' ' || s[j] == '\t' || s[j] == '\r')) ++j;
            if (j < s.size() && s[j] == '\n') {
                flush(i);
                i = j - 1;
            }
        }
    }
    flush(s.size());
    return spans;
}

inline std::vector<std::string> split_sentences(std::string_view s) {
    std::vector<std::string> out;
    for (auto span : sentence_spans(s)) out.emplace_back(s.substr(span.begin, span.size()));
    return out;
}

/// Truncates to at most max_bytes without splitting a UTF-8 sequence.
inline std::string utf8_truncate(std::string_view s, std::size_t max_bytes) {
    if (s.size() <= max_bytes) return std::string(s);
    std::size_t cut = max_bytes;
    while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
    return std::string(s.substr(0, cut));
}

/// Lowercase alphanumeric tokens; everything else separates.
inline std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : s) {
        auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || u >= 0x80) {
            cur.push_back(static_cast<char>(std::tolower(u)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

} // namespace personae::text
