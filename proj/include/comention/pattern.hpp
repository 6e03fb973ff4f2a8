#pragma once

// Case-insensitive Unicode pattern matcher for lexicon entries.
//
// Dialect: literals, '.', character classes with ranges and negation, the
// escapes \w \W \d \D \s \S, word boundaries \b \B, anchors ^ $, groups
// (...) and (?:...), alternation, and the repetitions * + ? {m} {m,} {m,n}.
// Back-references, look-around and lazy quantifiers are rejected.
//
// Matching is leftmost-longest (POSIX) and runs on a Pike VM over Unicode
// code points decoded from UTF-8, so there is no exponential backtracking.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace comention {

// UTF-8 text decoded once, reused by every pattern scanned over it.
// Invalid byte sequences decode to U+FFFD and occupy one byte.
class DecodedText {
public:
    explicit DecodedText(std::string_view text);

    std::size_t size() const noexcept { return cps_.size(); }
    char32_t at(std::size_t i) const noexcept { return cps_[i]; }
    // Byte offset of code point i; offset(size()) is the text length.
    std::size_t offset(std::size_t i) const noexcept { return offsets_[i]; }

private:
    std::vector<char32_t> cps_;
    std::vector<std::size_t> offsets_;
};

struct MatchSpan {
    std::size_t begin = 0;  // byte offsets, half-open
    std::size_t end = 0;

    friend bool operator==(const MatchSpan&, const MatchSpan&) = default;
};

class Pattern {
public:
    // Throws PatternError naming the pattern and the reason.
    static Pattern compile(std::string_view source);
    // One matcher over the alternation of several patterns; each source is
    // validated on its own so errors cite the offending pattern.
    static Pattern compile_any(std::span<const std::string> sources);

    // All non-empty, non-overlapping leftmost-longest matches, in order.
    std::vector<MatchSpan> find_all(std::string_view text) const;
    std::vector<MatchSpan> find_all(const DecodedText& text) const;

    bool search(std::string_view text) const;

    const std::string& source() const noexcept { return source_; }

    struct Program;

private:
    Pattern(std::string source, std::shared_ptr<const Program> program);

    std::string source_;
    std::shared_ptr<const Program> program_;
};

// True for code points treated as word characters by \w and \b.
bool is_word_char(char32_t c) noexcept;

// Escapes pattern metacharacters so `text` matches literally.
std::string escape_pattern(std::string_view text);

}  // namespace comention
