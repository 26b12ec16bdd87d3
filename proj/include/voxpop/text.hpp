#pragma once

#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace voxpop::text {

// --- minimal UTF-8 layer -----------------------------------------------------
//
// The corpus is Spanish. We decode to codepoints, compose the combining marks
// that actually occur (acute, diaeresis, tilde over Latin letters), case-fold
// ASCII plus the Latin-1 block, and re-encode. Anything else passes through.

inline void append_utf8(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(char(cp));
    } else if (cp < 0x800) {
        out.push_back(char(0xC0 | (cp >> 6)));
        out.push_back(char(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(char(0xE0 | (cp >> 12)));
        out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(char(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(char(0xF0 | (cp >> 18)));
        out.push_back(char(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(char(0x80 | (cp & 0x3F)));
    }
}

// Decodes one codepoint starting at i; advances i. Invalid bytes decode as
// U+FFFD and advance one byte, so malformed input cannot loop forever.
inline uint32_t next_codepoint(std::string_view s, size_t& i) {
    const auto b0 = uint8_t(s[i]);
    if (b0 < 0x80) { ++i; return b0; }
    int len = 0;
    uint32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; }
    else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; }
    else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; }
    else { ++i; return 0xFFFD; }
    if (i + len > s.size()) { ++i; return 0xFFFD; }
    for (int k = 1; k < len; ++k) {
        const auto b = uint8_t(s[i + k]);
        if ((b & 0xC0) != 0x80) { ++i; return 0xFFFD; }
        cp = (cp << 6) | (b & 0x3F);
    }
    i += len;
    return cp;
}

// Composition of base letter + combining mark for the cases seen in Spanish
// text: U+0301 acute, U+0308 diaeresis, U+0303 tilde.
inline uint32_t compose(uint32_t base, uint32_t mark) {
    struct Pair { uint32_t base, mark, composed; };
    static constexpr Pair table[] = {
        {'a', 0x301, 0xE1}, {'e', 0x301, 0xE9}, {'i', 0x301, 0xED},
        {'o', 0x301, 0xF3}, {'u', 0x301, 0xFA}, {'A', 0x301, 0xC1},
        {'E', 0x301, 0xC9}, {'I', 0x301, 0xCD}, {'O', 0x301, 0xD3},
        {'U', 0x301, 0xDA}, {'n', 0x303, 0xF1}, {'N', 0x303, 0xD1},
        {'u', 0x308, 0xFC}, {'U', 0x308, 0xDC}, {'a', 0x303, 0xE3},
        {'o', 0x303, 0xF5},
    };
    for (const auto& p : table)
        if (p.base == base && p.mark == mark) return p.composed;
    return 0;
}

inline bool is_combining_mark(uint32_t cp) { return cp == 0x301 || cp == 0x303 || cp == 0x308; }

inline uint32_t to_lower_cp(uint32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 32;
    // Latin-1 uppercase block, skipping the multiplication sign U+00D7.
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
    return cp;
}

// Canonical composition (for the supported marks) + lowercasing in one pass.
inline std::string normalize(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    uint32_t pending = 0;
    bool have_pending = false;
    size_t i = 0;
    while (i < s.size()) {
        const uint32_t cp = next_codepoint(s, i);
        if (have_pending) {
            if (is_combining_mark(cp)) {
                if (const uint32_t comp = compose(pending, cp)) {
                    pending = comp;
                    continue;
                }
            }
            append_utf8(out, to_lower_cp(pending));
        }
        pending = cp;
        have_pending = true;
    }
    if (have_pending) append_utf8(out, to_lower_cp(pending));
    return out;
}

inline bool is_word_cp(uint32_t cp) {
    if (cp >= '0' && cp <= '9') return true;
    if (cp >= 'a' && cp <= 'z') return true;
    if (cp >= 'A' && cp <= 'Z') return true;
    if (cp == '_') return true;
    return cp >= 0x80;  // multibyte letters count as word characters
}

// Matches http(s)://... and www.-prefixed hosts, case-insensitively; the match
// runs to the next whitespace.
inline bool starts_url(std::string_view s, size_t i) {
    const auto has = [&](std::string_view prefix) {
        if (s.size() - i < prefix.size()) return false;
        for (size_t k = 0; k < prefix.size(); ++k)
            if (std::tolower(uint8_t(s[i + k])) != prefix[k]) return false;
        return true;
    };
    return has("http://") || has("https://") || has("www.");
}

// Sentinel token replacing every URL. Deliberately uppercase so it can never
// collide with a normalized vocabulary token; a literal standalone "URL" in
// the input is kept as the sentinel, which makes tokenization idempotent over
// its own joined output.
inline constexpr std::string_view kUrlToken = "URL";

struct TokenizeOptions {
    const std::unordered_set<std::string>* stopwords = nullptr;
};

namespace detail {
// Reads the word run starting at i (already past any '#'/'@' sigil).
// Returns the normalized token and whether the raw run was exactly "URL".
inline std::pair<std::string, bool> read_word(std::string_view s, size_t& i) {
    std::string tok;
    const size_t start = i;
    uint32_t pending = 0;
    bool have_pending = false;
    while (i < s.size()) {
        size_t j = i;
        const uint32_t cp = next_codepoint(s, j);
        if (!is_word_cp(cp)) break;
        i = j;
        if (have_pending && is_combining_mark(cp)) {
            if (const uint32_t comp = compose(pending, cp)) {
                pending = comp;
                continue;
            }
        }
        if (have_pending) append_utf8(tok, to_lower_cp(pending));
        pending = cp;
        have_pending = true;
    }
    if (have_pending) append_utf8(tok, to_lower_cp(pending));
    return {std::move(tok), s.substr(start, i - start) == kUrlToken};
}
}  // namespace detail

// Tokenizes one tweet:
//   - text is normalized (composed + lowercased),
//   - URLs become the single token "URL",
//   - '#' stays attached to hashtags, '@' is stripped from mentions,
//   - stopwords and punctuation-only runs are dropped.
inline std::vector<std::string> tokenize(std::string_view s, const TokenizeOptions& opt = {}) {
    std::vector<std::string> tokens;
    size_t i = 0;
    const size_t n = s.size();
    const auto keep = [&](std::string&& tok) {
        if (tok.empty()) return;
        if (opt.stopwords && opt.stopwords->count(tok)) return;
        tokens.push_back(std::move(tok));
    };
    while (i < n) {
        if (starts_url(s, i)) {
            while (i < n && !std::isspace(uint8_t(s[i]))) ++i;
            tokens.emplace_back(kUrlToken);
            continue;
        }
        const char c = s[i];
        if (c == '#' || c == '@') {
            size_t j = i + 1;
            auto [tok, was_url] = detail::read_word(s, j);
            if (!tok.empty()) {
                keep(c == '#' ? "#" + tok : std::move(tok));
                i = j;
                continue;
            }
            ++i;
            continue;
        }
        size_t j = i;
        auto [tok, was_url] = detail::read_word(s, j);
        if (j > i) {
            keep(was_url ? std::string(kUrlToken) : std::move(tok));
            i = j;
        } else {
            ++i;  // punctuation or whitespace
        }
    }
    return tokens;
}

// Extracts #hashtags, lowercased/composed, without the leading '#'.
inline std::vector<std::string> extract_hashtags(std::string_view s) {
    std::vector<std::string> tags;
    size_t i = 0;
    while (i < s.size()) {
        if (s[i] == '#') {
            size_t j = i + 1;
            auto [tok, was_url] = detail::read_word(s, j);
            if (!tok.empty()) {
                tags.push_back(std::move(tok));
                i = j;
                continue;
            }
        }
        ++i;
    }
    return tags;
}

}  // namespace voxpop::text
