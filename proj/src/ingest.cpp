#include "comention/ingest.hpp"

#include "comention/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <map>
#include <set>

namespace comention {

namespace {

using namespace std::chrono;

class Cursor {
public:
    explicit Cursor(std::string_view text) : text_(text) {}

    bool done() const noexcept { return pos_ >= text_.size(); }
    char peek() const noexcept { return done() ? '\0' : text_[pos_]; }

    int digits(std::size_t count) {
        int value = 0;
        for (std::size_t i = 0; i < count; ++i) {
            const char c = peek();
            if (c < '0' || c > '9') fail("expected digit");
            value = value * 10 + (c - '0');
            ++pos_;
        }
        return value;
    }

    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    bool accept(char c) {
        if (peek() != c) return false;
        ++pos_;
        return true;
    }

    [[noreturn]] void fail(const std::string& why) const {
        throw DataError("invalid timestamp '" + std::string(text_) + "': " + why);
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
    Cursor c(text);
    const int y = c.digits(4);
    c.expect('-');
    const int mo = c.digits(2);
    c.expect('-');
    const int d = c.digits(2);
    if (!c.accept('T') && !c.accept(' ')) c.fail("expected 'T'");
    const int hh = c.digits(2);
    c.expect(':');
    const int mm = c.digits(2);
    c.expect(':');
    const int ss = c.digits(2);
    if (c.accept('.')) {
        if (c.peek() < '0' || c.peek() > '9') c.fail("empty fraction");
        while (c.peek() >= '0' && c.peek() <= '9') c.digits(1);
    }
    int offset_minutes = 0;
    if (c.accept('Z') || c.accept('z')) {
    } else if (c.peek() == '+' || c.peek() == '-') {
        const int sign = c.peek() == '-' ? -1 : 1;
        c.accept(c.peek());
        const int oh = c.digits(2);
        c.accept(':');
        const int om = c.digits(2);
        if (oh > 23 || om > 59) c.fail("offset out of range");
        offset_minutes = sign * (oh * 60 + om);
    }
    if (!c.done()) c.fail("trailing characters");

    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) c.fail("no such calendar date");
    if (hh > 23 || mm > 59 || ss > 59) c.fail("time of day out of range");

    const sys_seconds local = sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
    return local - minutes{offset_minutes};
}

std::string format_timestamp(Timestamp ts) {
    const auto day_point = floor<days>(ts);
    const year_month_day ymd{day_point};
    const hh_mm_ss tod{ts - day_point};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                  static_cast<int>(tod.seconds().count()));
    return buf;
}

nlohmann::json post_to_json(const Post& post) {
    nlohmann::json j = {{"id", post.id}, {"ts", format_timestamp(post.ts)}, {"text", post.text}};
    if (post.source) j["source"] = *post.source;
    return j;
}

Post post_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw DataError("record is not a JSON object");
    auto field = [&](const char* name) -> const nlohmann::json& {
        auto it = j.find(name);
        if (it == j.end()) throw DataError(std::string("missing field '") + name + "'");
        if (!it->is_string()) throw DataError(std::string("field '") + name + "' is not a string");
        return *it;
    };
    Post post;
    post.id = field("id").get<std::string>();
    if (post.id.empty()) throw DataError("empty post id");
    post.ts = parse_timestamp(field("ts").get_ref<const std::string&>());
    post.text = field("text").get<std::string>();
    if (auto it = j.find("source"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw DataError("field 'source' is not a string");
        post.source = it->get<std::string>();
    }
    return post;
}

CorpusReader::CorpusReader(std::istream& in, ParseMode mode) : in_(in), mode_(mode) {
    if (!in_.good() && !in_.eof()) throw DataError("corpus stream is not readable");
}

std::optional<Post> CorpusReader::next() {
    while (std::getline(in_, buffer_)) {
        ++line_;
        if (!buffer_.empty() && buffer_.back() == '\r') buffer_.pop_back();
        if (buffer_.find_first_not_of(" \t") == std::string::npos) continue;
        try {
            Post post = post_from_json(nlohmann::json::parse(buffer_));
            if (!seen_ids_.insert(post.id).second) {
                throw DataError("duplicate post id '" + post.id + "'");
            }
            return post;
        } catch (const std::exception& e) {
            const std::string message = e.what();
            if (mode_ == ParseMode::strict) {
                throw DataError("corpus line " + std::to_string(line_) + ": " + message);
            }
            ++error_count_;
            if (issues_.size() < kMaxKeptIssues) issues_.push_back({line_, message});
        }
    }
    if (in_.bad()) throw DataError("corpus stream read failure at line " + std::to_string(line_));
    return std::nullopt;
}

std::vector<Post> read_corpus(std::istream& in, ParseMode mode) {
    CorpusReader reader(in, mode);
    std::vector<Post> posts;
    while (auto post = reader.next()) posts.push_back(std::move(*post));
    return posts;
}

std::string_view to_string(EntityKind kind) noexcept {
    return kind == EntityKind::supervisor ? "supervisor" : "bank";
}

namespace {

Pattern compile_entity(const std::string& id, const std::vector<std::string>& patterns) {
    if (patterns.empty()) throw DataError("entity '" + id + "' has no patterns");
    return Pattern::compile_any(patterns);
}

}  // namespace

Entity::Entity(std::string id, std::string display_name, std::vector<std::string> patterns,
               EntityKind kind)
    : id_(std::move(id)),
      display_name_(std::move(display_name)),
      patterns_(std::move(patterns)),
      kind_(kind),
      matcher_(compile_entity(id_, patterns_)) {
    if (id_.empty()) throw DataError("entity with empty id");
}

Lexicon::Lexicon(std::vector<Entity> entities) : entities_(std::move(entities)) {
    std::set<std::string_view> seen;
    for (const auto& e : entities_) {
        if (!seen.insert(e.id()).second) throw DataError("duplicate entity id '" + e.id() + "'");
    }
}

const Entity* Lexicon::find(std::string_view id) const noexcept {
    auto it = std::find_if(entities_.begin(), entities_.end(),
                           [&](const Entity& e) { return e.id() == id; });
    return it == entities_.end() ? nullptr : &*it;
}

std::vector<std::string> Lexicon::ids() const {
    std::vector<std::string> out;
    out.reserve(entities_.size());
    for (const auto& e : entities_) out.push_back(e.id());
    std::sort(out.begin(), out.end());
    return out;
}

Lexicon lexicon_from_json(const nlohmann::json& doc) {
    if (!doc.is_array()) throw DataError("lexicon must be a JSON array");
    std::vector<Entity> entities;
    std::set<std::string> seen;
    for (const auto& item : doc) {
        if (!item.is_object()) throw DataError("lexicon entry is not an object");
        auto get_string = [&](const char* key) {
            auto it = item.find(key);
            if (it == item.end() || !it->is_string()) {
                throw DataError(std::string("lexicon entry lacks string field '") + key + "'");
            }
            return it->get<std::string>();
        };
        std::string id = get_string("id");
        if (!seen.insert(id).second) throw DataError("duplicate entity id '" + id + "'");
        std::string name = get_string("name");
        auto pit = item.find("patterns");
        if (pit == item.end() || !pit->is_array()) {
            throw DataError("entity '" + id + "' lacks a 'patterns' array");
        }
        std::vector<std::string> patterns;
        for (const auto& p : *pit) {
            if (!p.is_string()) throw DataError("entity '" + id + "' has a non-string pattern");
            patterns.push_back(p.get<std::string>());
        }
        EntityKind kind = EntityKind::bank;
        if (auto kit = item.find("kind"); kit != item.end()) {
            const std::string k = kit->is_string() ? kit->get<std::string>() : std::string{};
            if (k == "supervisor") {
                kind = EntityKind::supervisor;
            } else if (k != "bank") {
                throw DataError("entity '" + id + "' has unknown kind");
            }
        }
        entities.emplace_back(std::move(id), std::move(name), std::move(patterns), kind);
    }
    return Lexicon(std::move(entities));
}

Lexicon load_lexicon(std::istream& in) {
    if (!in) throw DataError("lexicon stream is not readable");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("lexicon is not valid JSON: ") + e.what());
    }
    return lexicon_from_json(doc);
}

nlohmann::json lexicon_to_json(const Lexicon& lexicon) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& e : lexicon) {
        doc.push_back({{"id", e.id()},
                       {"name", e.display_name()},
                       {"patterns", e.patterns()},
                       {"kind", to_string(e.kind())}});
    }
    return doc;
}

std::string suffix_tolerant_pattern(std::string_view stem, int max_suffix) {
    if (stem.empty()) throw InvalidArgument("suffix_tolerant_pattern: empty stem");
    if (max_suffix < 0) throw InvalidArgument("suffix_tolerant_pattern: negative max_suffix");
    std::string out = "\\b" + escape_pattern(stem);
    if (max_suffix > 0) out += "\\w{0," + std::to_string(max_suffix) + "}";
    out += "\\b";
    return out;
}

std::string_view to_string(Granularity g) noexcept {
    switch (g) {
    case Granularity::month: return "month";
    case Granularity::quarter: return "quarter";
    case Granularity::year: return "year";
    }
    return "quarter";
}

Granularity parse_granularity(std::string_view text) {
    if (text == "month") return Granularity::month;
    if (text == "quarter") return Granularity::quarter;
    if (text == "year") return Granularity::year;
    throw InvalidArgument("unknown granularity '" + std::string(text) + "'");
}

TimeBucket bucket_of(Timestamp ts, Granularity granularity) {
    const year_month_day ymd{floor<days>(ts)};
    const int y = static_cast<int>(ymd.year());
    const int m = static_cast<int>(static_cast<unsigned>(ymd.month()));
    switch (granularity) {
    case Granularity::month: return {granularity, y, m};
    case Granularity::quarter: return {granularity, y, (m - 1) / 3 + 1};
    case Granularity::year: return {granularity, y, 1};
    }
    return {granularity, y, 1};
}

TimeBucket next_bucket(TimeBucket b) {
    const int span = b.granularity == Granularity::month ? 12 : b.granularity == Granularity::quarter ? 4 : 1;
    if (b.index < span) {
        ++b.index;
    } else {
        ++b.year;
        b.index = 1;
    }
    return b;
}

std::vector<TimeBucket> bucket_range(TimeBucket first, TimeBucket last) {
    if (first.granularity != last.granularity) {
        throw InvalidArgument("bucket_range: mixed granularities");
    }
    std::vector<TimeBucket> out;
    for (TimeBucket b = first; b <= last; b = next_bucket(b)) out.push_back(b);
    return out;
}

Timestamp bucket_start(TimeBucket b) {
    unsigned m = 1;
    if (b.granularity == Granularity::month) m = static_cast<unsigned>(b.index);
    if (b.granularity == Granularity::quarter) m = static_cast<unsigned>(3 * (b.index - 1) + 1);
    return sys_days{year{b.year} / month{m} / day{1}};
}

std::string to_string(const TimeBucket& b) {
    char buf[16];
    switch (b.granularity) {
    case Granularity::month: std::snprintf(buf, sizeof buf, "%04d-%02d", b.year, b.index); break;
    case Granularity::quarter: std::snprintf(buf, sizeof buf, "%04dQ%d", b.year, b.index); break;
    case Granularity::year: std::snprintf(buf, sizeof buf, "%04d", b.year); break;
    }
    return buf;
}

TimeBucket parse_bucket(std::string_view label) {
    auto bad = [&]() -> DataError { return DataError("invalid bucket label '" + std::string(label) + "'"); };
    auto number = [&](std::string_view s) {
        int v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) throw bad();
        return v;
    };
    if (label.size() < 4) throw bad();
    const int y = number(label.substr(0, 4));
    if (label.size() == 4) return {Granularity::year, y, 1};
    if (label.size() == 6 && (label[4] == 'Q' || label[4] == 'q')) {
        const int q = number(label.substr(5));
        if (q < 1 || q > 4) throw bad();
        return {Granularity::quarter, y, q};
    }
    if (label.size() == 7 && label[4] == '-') {
        const int m = number(label.substr(5));
        if (m < 1 || m > 12) throw bad();
        return {Granularity::month, y, m};
    }
    throw bad();
}

}  // namespace comention
