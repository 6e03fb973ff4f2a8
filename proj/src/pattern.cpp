#include "comention/pattern.hpp"

#include "comention/error.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>

namespace comention {

namespace {

constexpr int kMaxRepeat = 1000;
constexpr std::size_t kMaxProgram = 200000;
constexpr int kUnbounded = -1;

enum ClassFlag : unsigned {
    kWord = 1u << 0,
    kNotWord = 1u << 1,
    kDigit = 1u << 2,
    kNotDigit = 1u << 3,
    kSpace = 1u << 4,
    kNotSpace = 1u << 5,
};

bool is_digit(char32_t c) noexcept { return u_isdigit(static_cast<UChar32>(c)) != 0; }
bool is_space(char32_t c) noexcept { return u_isUWhiteSpace(static_cast<UChar32>(c)) != 0; }

struct CharSet {
    std::vector<std::pair<char32_t, char32_t>> ranges;
    unsigned classes = 0;
    bool any = false;  // '.', everything but newline
    bool negated = false;

    bool raw(char32_t c) const noexcept {
        if (any && c != U'\n') return true;
        for (const auto& [lo, hi] : ranges) {
            if (c >= lo && c <= hi) return true;
        }
        if (classes != 0) {
            if ((classes & kWord) && is_word_char(c)) return true;
            if ((classes & kNotWord) && !is_word_char(c)) return true;
            if ((classes & kDigit) && is_digit(c)) return true;
            if ((classes & kNotDigit) && !is_digit(c)) return true;
            if ((classes & kSpace) && is_space(c)) return true;
            if ((classes & kNotSpace) && !is_space(c)) return true;
        }
        return false;
    }

    bool matches(char32_t c) const noexcept {
        const auto u = static_cast<UChar32>(c);
        bool hit = raw(c) || raw(static_cast<char32_t>(u_tolower(u))) ||
                   raw(static_cast<char32_t>(u_toupper(u))) ||
                   raw(static_cast<char32_t>(u_foldCase(u, U_FOLD_CASE_DEFAULT)));
        return negated ? !hit : hit;
    }
};

enum class AssertKind { WordBoundary, NotWordBoundary, TextStart, TextEnd };

// --- syntax tree -----------------------------------------------------------

struct Node {
    enum class Kind { Empty, Char, Concat, Alternate, Repeat, Assert } kind = Kind::Empty;
    CharSet set;
    AssertKind assertion = AssertKind::TextStart;
    int min = 0;
    int max = 0;
    std::vector<Node> children;
};

class Parser {
public:
    explicit Parser(std::string_view source) : source_(source) {
        std::int32_t i = 0;
        const auto len = static_cast<std::int32_t>(source.size());
        const auto* s = reinterpret_cast<const std::uint8_t*>(source.data());
        while (i < len) {
            UChar32 c;
            U8_NEXT(s, i, len, c);
            if (c < 0) fail("invalid UTF-8");
            cps_.push_back(static_cast<char32_t>(c));
        }
    }

    Node parse() {
        Node root = parse_alternation();
        if (pos_ < cps_.size()) {
            // only a stray ')' can stop the top-level alternation early
            fail("unbalanced parenthesis: unmatched ')'");
        }
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& reason) const {
        throw PatternError(std::string(source_), reason);
    }

    bool at_end() const noexcept { return pos_ >= cps_.size(); }
    char32_t peek() const noexcept { return cps_[pos_]; }

    Node parse_alternation() {
        std::vector<Node> branches;
        branches.push_back(parse_concat());
        while (!at_end() && peek() == U'|') {
            ++pos_;
            branches.push_back(parse_concat());
        }
        if (branches.size() == 1) return std::move(branches.front());
        Node n;
        n.kind = Node::Kind::Alternate;
        n.children = std::move(branches);
        return n;
    }

    Node parse_concat() {
        Node n;
        n.kind = Node::Kind::Concat;
        while (!at_end() && peek() != U'|' && peek() != U')') {
            n.children.push_back(parse_repeat());
        }
        if (n.children.empty()) return Node{};
        if (n.children.size() == 1) return std::move(n.children.front());
        return n;
    }

    Node parse_repeat() {
        Node atom = parse_atom();
        if (at_end()) return atom;
        int min = 0;
        int max = 0;
        switch (peek()) {
        case U'*': min = 0; max = kUnbounded; ++pos_; break;
        case U'+': min = 1; max = kUnbounded; ++pos_; break;
        case U'?': min = 0; max = 1; ++pos_; break;
        case U'{': parse_bounds(min, max); break;
        default: return atom;
        }
        if (!at_end()) {
            const char32_t c = peek();
            if (c == U'?') fail("lazy quantifiers are not supported");
            if (c == U'*' || c == U'+' || c == U'{') fail("multiple repetition");
        }
        if (atom.kind == Node::Kind::Assert) fail("nothing to repeat");
        Node n;
        n.kind = Node::Kind::Repeat;
        n.min = min;
        n.max = max;
        n.children.push_back(std::move(atom));
        return n;
    }

    std::optional<int> parse_int() {
        std::size_t start = pos_;
        long value = 0;
        while (!at_end() && peek() >= U'0' && peek() <= U'9') {
            value = value * 10 + static_cast<long>(peek() - U'0');
            if (value > kMaxRepeat) fail("repetition count exceeds " + std::to_string(kMaxRepeat));
            ++pos_;
        }
        if (pos_ == start) return std::nullopt;
        return static_cast<int>(value);
    }

    void parse_bounds(int& min, int& max) {
        ++pos_;  // '{'
        auto lo = parse_int();
        if (!lo) fail("malformed repetition bound");
        min = *lo;
        max = *lo;
        if (!at_end() && peek() == U',') {
            ++pos_;
            auto hi = parse_int();
            max = hi ? *hi : kUnbounded;
        }
        if (at_end() || peek() != U'}') fail("malformed repetition bound: missing '}'");
        ++pos_;
        if (max != kUnbounded && max < min) fail("repetition bound {m,n} with m > n");
    }

    Node parse_atom() {
        const char32_t c = peek();
        switch (c) {
        case U'(': return parse_group();
        case U'[': return parse_class();
        case U'.': {
            ++pos_;
            Node n;
            n.kind = Node::Kind::Char;
            n.set.any = true;
            return n;
        }
        case U'^': ++pos_; return make_assert(AssertKind::TextStart);
        case U'$': ++pos_; return make_assert(AssertKind::TextEnd);
        case U'\\': return parse_escape();
        case U'*':
        case U'+':
        case U'?':
        case U'{': fail("nothing to repeat");
        default: ++pos_; return make_literal(c);
        }
    }

    static Node make_assert(AssertKind kind) {
        Node n;
        n.kind = Node::Kind::Assert;
        n.assertion = kind;
        return n;
    }

    static Node make_literal(char32_t c) {
        Node n;
        n.kind = Node::Kind::Char;
        n.set.ranges.emplace_back(c, c);
        return n;
    }

    static Node make_class(unsigned flags) {
        Node n;
        n.kind = Node::Kind::Char;
        n.set.classes = flags;
        return n;
    }

    Node parse_group() {
        ++pos_;  // '('
        if (!at_end() && peek() == U'?') {
            if (pos_ + 1 < cps_.size() && cps_[pos_ + 1] == U':') {
                pos_ += 2;
            } else {
                fail("unsupported group construct '(?'");
            }
        }
        Node inner = parse_alternation();
        if (at_end() || peek() != U')') fail("unbalanced parenthesis: missing ')'");
        ++pos_;
        return inner;
    }

    // Returns a class flag for \w-style escapes, 0 otherwise.
    static unsigned class_escape(char32_t c) noexcept {
        switch (c) {
        case U'w': return kWord;
        case U'W': return kNotWord;
        case U'd': return kDigit;
        case U'D': return kNotDigit;
        case U's': return kSpace;
        case U'S': return kNotSpace;
        default: return 0;
        }
    }

    // Literal value of a single-character escape.
    char32_t escaped_literal(char32_t c) const {
        switch (c) {
        case U'n': return U'\n';
        case U't': return U'\t';
        case U'r': return U'\r';
        case U'f': return U'\f';
        case U'v': return U'\v';
        default: break;
        }
        if (c < 0x80 && (std::isalnum(static_cast<int>(c)) != 0)) {
            if (c >= U'1' && c <= U'9') fail("back-references are not supported");
            fail(std::string("unsupported escape '\\") + static_cast<char>(c) + "'");
        }
        return c;
    }

    Node parse_escape() {
        ++pos_;  // '\'
        if (at_end()) fail("trailing backslash");
        const char32_t c = cps_[pos_++];
        if (c == U'b') return make_assert(AssertKind::WordBoundary);
        if (c == U'B') return make_assert(AssertKind::NotWordBoundary);
        if (unsigned flag = class_escape(c)) return make_class(flag);
        return make_literal(escaped_literal(c));
    }

    Node parse_class() {
        ++pos_;  // '['
        Node n;
        n.kind = Node::Kind::Char;
        if (!at_end() && peek() == U'^') {
            n.set.negated = true;
            ++pos_;
        }
        bool first = true;
        while (true) {
            if (at_end()) fail("unterminated character class: missing ']'");
            char32_t c = peek();
            if (c == U']' && !first) {
                ++pos_;
                break;
            }
            first = false;
            ++pos_;
            if (c == U'\\') {
                if (at_end()) fail("trailing backslash");
                const char32_t e = cps_[pos_++];
                if (unsigned flag = class_escape(e)) {
                    n.set.classes |= flag;
                    continue;
                }
                c = (e == U'b') ? U'\b' : escaped_literal(e);
            }
            char32_t hi = c;
            if (pos_ + 1 < cps_.size() && peek() == U'-' && cps_[pos_ + 1] != U']') {
                ++pos_;
                hi = cps_[pos_++];
                if (hi == U'\\') {
                    if (at_end()) fail("trailing backslash");
                    const char32_t e = cps_[pos_++];
                    if (class_escape(e) != 0) fail("class escape cannot end a range");
                    hi = escaped_literal(e);
                }
                if (hi < c) fail("invalid character range");
            }
            n.set.ranges.emplace_back(c, hi);
        }
        return n;
    }

    std::string_view source_;
    std::vector<char32_t> cps_;
    std::size_t pos_ = 0;
};

// --- program ---------------------------------------------------------------

enum class Op : std::uint8_t { Char, Split, Jmp, Assert, Match };

struct Inst {
    Op op = Op::Match;
    int x = 0;
    int y = 0;
    int set = -1;
    AssertKind assertion = AssertKind::TextStart;
};

}  // namespace

struct Pattern::Program {
    std::vector<Inst> insts;
    std::vector<CharSet> sets;
};

namespace {

class Compiler {
public:
    explicit Compiler(std::string_view source) : source_(source) {}

    Pattern::Program finish(const Node& root) {
        emit(root);
        push({Op::Match});
        return std::move(prog_);
    }

private:
    int pc() const { return static_cast<int>(prog_.insts.size()); }

    int push(Inst inst) {
        if (prog_.insts.size() >= kMaxProgram) {
            throw PatternError(std::string(source_), "pattern too large after expanding repetitions");
        }
        prog_.insts.push_back(inst);
        return pc() - 1;
    }

    void emit(const Node& n) {
        switch (n.kind) {
        case Node::Kind::Empty: break;
        case Node::Kind::Char: {
            prog_.sets.push_back(n.set);
            Inst inst{Op::Char};
            inst.set = static_cast<int>(prog_.sets.size()) - 1;
            push(inst);
            break;
        }
        case Node::Kind::Assert: {
            Inst inst{Op::Assert};
            inst.assertion = n.assertion;
            push(inst);
            break;
        }
        case Node::Kind::Concat:
            for (const auto& child : n.children) emit(child);
            break;
        case Node::Kind::Alternate: {
            std::vector<int> jumps;
            for (std::size_t i = 0; i < n.children.size(); ++i) {
                if (i + 1 < n.children.size()) {
                    const int split = push({Op::Split});
                    prog_.insts[split].x = pc();
                    emit(n.children[i]);
                    jumps.push_back(push({Op::Jmp}));
                    prog_.insts[split].y = pc();
                } else {
                    emit(n.children[i]);
                }
            }
            for (int j : jumps) prog_.insts[j].x = pc();
            break;
        }
        case Node::Kind::Repeat: emit_repeat(n); break;
        }
    }

    void emit_repeat(const Node& n) {
        const Node& body = n.children.front();
        for (int i = 0; i < n.min; ++i) emit(body);
        if (n.max == kUnbounded) {
            const int loop = push({Op::Split});
            prog_.insts[loop].x = pc();
            emit(body);
            Inst back{Op::Jmp};
            back.x = loop;
            push(back);
            prog_.insts[loop].y = pc();
            return;
        }
        std::vector<int> exits;
        for (int i = n.min; i < n.max; ++i) {
            const int split = push({Op::Split});
            prog_.insts[split].x = pc();
            exits.push_back(split);
            emit(body);
        }
        for (int s : exits) prog_.insts[s].y = pc();
    }

    std::string_view source_;
    Pattern::Program prog_;
};

// Sparse set of program counters, each carrying the thread's start index.
class ThreadList {
public:
    explicit ThreadList(std::size_t n) : sparse_(n), dense_(n), start_(n) {}

    bool contains(int pc) const noexcept {
        const std::size_t i = sparse_[static_cast<std::size_t>(pc)];
        return i < size_ && dense_[i] == pc;
    }
    void insert(int pc, std::size_t start) noexcept {
        sparse_[static_cast<std::size_t>(pc)] = size_;
        dense_[size_] = pc;
        start_[size_] = start;
        ++size_;
    }
    void clear() noexcept { size_ = 0; }
    std::size_t size() const noexcept { return size_; }
    int pc(std::size_t i) const noexcept { return dense_[i]; }
    std::size_t start(std::size_t i) const noexcept { return start_[i]; }

private:
    std::vector<std::size_t> sparse_;
    std::vector<int> dense_;
    std::vector<std::size_t> start_;
    std::size_t size_ = 0;
};

struct Match {
    std::size_t begin;
    std::size_t end;
};

class Vm {
public:
    Vm(const Pattern::Program& prog, const DecodedText& text)
        : prog_(prog), text_(text), clist_(prog.insts.size()), nlist_(prog.insts.size()) {
        stack_.reserve(prog.insts.size());
    }

    // Leftmost-longest match starting at or after code point `from`.
    std::optional<Match> search(std::size_t from) {
        const std::size_t n = text_.size();
        clist_.clear();
        std::optional<Match> best;
        for (std::size_t i = from;; ++i) {
            if (!best) add(clist_, 0, i, i);
            for (std::size_t t = 0; t < clist_.size(); ++t) {
                if (prog_.insts[static_cast<std::size_t>(clist_.pc(t))].op != Op::Match) continue;
                const std::size_t s = clist_.start(t);
                if (!best || s < best->begin) {
                    best = Match{s, i};
                } else if (s == best->begin) {
                    best->end = i;
                }
            }
            if (i == n) break;
            nlist_.clear();
            const char32_t c = text_.at(i);
            for (std::size_t t = 0; t < clist_.size(); ++t) {
                const std::size_t s = clist_.start(t);
                if (best && s > best->begin) continue;
                const Inst& inst = prog_.insts[static_cast<std::size_t>(clist_.pc(t))];
                if (inst.op == Op::Char && prog_.sets[static_cast<std::size_t>(inst.set)].matches(c)) {
                    add(nlist_, clist_.pc(t) + 1, s, i + 1);
                }
            }
            std::swap(clist_, nlist_);
            if (best && clist_.size() == 0) break;
        }
        return best;
    }

private:
    bool holds(AssertKind kind, std::size_t pos) const noexcept {
        const std::size_t n = text_.size();
        switch (kind) {
        case AssertKind::TextStart: return pos == 0;
        case AssertKind::TextEnd: return pos == n;
        case AssertKind::WordBoundary:
        case AssertKind::NotWordBoundary: {
            const bool before = pos > 0 && is_word_char(text_.at(pos - 1));
            const bool after = pos < n && is_word_char(text_.at(pos));
            return (before != after) == (kind == AssertKind::WordBoundary);
        }
        }
        return false;
    }

    // Epsilon closure of `pc` at code point position `pos`.
    void add(ThreadList& list, int pc, std::size_t start, std::size_t pos) {
        stack_.clear();
        stack_.push_back(pc);
        while (!stack_.empty()) {
            const int cur = stack_.back();
            stack_.pop_back();
            if (list.contains(cur)) continue;
            list.insert(cur, start);
            const Inst& inst = prog_.insts[static_cast<std::size_t>(cur)];
            switch (inst.op) {
            case Op::Jmp: stack_.push_back(inst.x); break;
            case Op::Split:
                stack_.push_back(inst.y);
                stack_.push_back(inst.x);
                break;
            case Op::Assert:
                if (holds(inst.assertion, pos)) stack_.push_back(cur + 1);
                break;
            case Op::Char:
            case Op::Match: break;
            }
        }
    }

    const Pattern::Program& prog_;
    const DecodedText& text_;
    ThreadList clist_;
    ThreadList nlist_;
    std::vector<int> stack_;
};

}  // namespace

bool is_word_char(char32_t c) noexcept {
    const auto u = static_cast<UChar32>(c);
    if (c == U'_') return true;
    if (u_hasBinaryProperty(u, UCHAR_ALPHABETIC) || u_isdigit(u)) return true;
    const auto type = u_charType(u);
    return type == U_NON_SPACING_MARK || type == U_COMBINING_SPACING_MARK ||
           type == U_ENCLOSING_MARK || type == U_CONNECTOR_PUNCTUATION;
}

std::string escape_pattern(std::string_view text) {
    static constexpr std::string_view kMeta = ".^$|?*+()[]{}\\";
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        if (kMeta.find(c) != std::string_view::npos) out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

DecodedText::DecodedText(std::string_view text) {
    if (text.size() > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
        throw DataError("text exceeds 2 GiB");
    }
    const auto len = static_cast<std::int32_t>(text.size());
    const auto* s = reinterpret_cast<const std::uint8_t*>(text.data());
    cps_.reserve(text.size());
    offsets_.reserve(text.size() + 1);
    std::int32_t i = 0;
    while (i < len) {
        offsets_.push_back(static_cast<std::size_t>(i));
        UChar32 c;
        U8_NEXT_OR_FFFD(s, i, len, c);
        cps_.push_back(static_cast<char32_t>(c));
    }
    offsets_.push_back(text.size());
}

Pattern::Pattern(std::string source, std::shared_ptr<const Program> program)
    : source_(std::move(source)), program_(std::move(program)) {}

Pattern Pattern::compile(std::string_view source) {
    Node root = Parser(source).parse();
    auto prog = std::make_shared<Program>(Compiler(source).finish(root));
    return Pattern(std::string(source), std::move(prog));
}

Pattern Pattern::compile_any(std::span<const std::string> sources) {
    if (sources.empty()) throw PatternError("", "empty pattern list");
    Node root;
    root.kind = Node::Kind::Alternate;
    std::string joined;
    for (const auto& src : sources) {
        root.children.push_back(Parser(src).parse());
        if (!joined.empty()) joined += '|';
        joined += "(?:" + src + ")";
    }
    auto prog = std::make_shared<Program>(Compiler(joined).finish(root));
    return Pattern(std::move(joined), std::move(prog));
}

std::vector<MatchSpan> Pattern::find_all(std::string_view text) const {
    return find_all(DecodedText(text));
}

std::vector<MatchSpan> Pattern::find_all(const DecodedText& text) const {
    std::vector<MatchSpan> out;
    Vm vm(*program_, text);
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto m = vm.search(pos);
        if (!m) break;
        if (m->begin == m->end) {
            pos = m->begin + 1;
            continue;
        }
        out.push_back({text.offset(m->begin), text.offset(m->end)});
        pos = m->end;
    }
    return out;
}

bool Pattern::search(std::string_view text) const { return !find_all(text).empty(); }

}  // namespace comention
