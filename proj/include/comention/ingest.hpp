#pragma once

// Corpus and lexicon loading, timestamps and calendar buckets.

#include "comention/pattern.hpp"

#include <json.hpp>

#include <chrono>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace comention {

using Timestamp = std::chrono::sys_seconds;

// Accepts `YYYY-MM-DDTHH:MM:SS[.frac][Z|+HH:MM|-HH:MM|+HHMM]`; a missing
// zone designator means UTC. Fractional seconds are truncated.
Timestamp parse_timestamp(std::string_view text);
// Always `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_timestamp(Timestamp ts);

struct Post {
    std::string id;
    Timestamp ts;
    std::string text;
    std::optional<std::string> source;

    friend bool operator==(const Post&, const Post&) = default;
};

nlohmann::json post_to_json(const Post& post);
Post post_from_json(const nlohmann::json& j);

enum class ParseMode { strict, lenient };

struct RecordIssue {
    std::size_t line = 0;
    std::string message;
};

// Streams posts from newline-delimited JSON. Blank lines are skipped.
// Strict mode throws DataError on the first malformed record; lenient mode
// skips it and counts it. Duplicate ids are malformed records.
class CorpusReader {
public:
    explicit CorpusReader(std::istream& in, ParseMode mode = ParseMode::strict);

    std::optional<Post> next();

    std::size_t error_count() const noexcept { return error_count_; }
    // First kMaxKeptIssues issues, in file order.
    const std::vector<RecordIssue>& issues() const noexcept { return issues_; }
    std::size_t line() const noexcept { return line_; }

    static constexpr std::size_t kMaxKeptIssues = 1000;

private:
    std::istream& in_;
    ParseMode mode_;
    std::size_t line_ = 0;
    std::size_t error_count_ = 0;
    std::vector<RecordIssue> issues_;
    std::unordered_set<std::string> seen_ids_;
    std::string buffer_;
};

std::vector<Post> read_corpus(std::istream& in, ParseMode mode = ParseMode::strict);

enum class EntityKind { bank, supervisor };

std::string_view to_string(EntityKind kind) noexcept;

// A tracked institution. Merged or renamed institutions are one Entity with
// several patterns.
class Entity {
public:
    // Compiles every pattern; throws PatternError on the first bad one.
    Entity(std::string id, std::string display_name, std::vector<std::string> patterns,
           EntityKind kind = EntityKind::bank);

    const std::string& id() const noexcept { return id_; }
    const std::string& display_name() const noexcept { return display_name_; }
    const std::vector<std::string>& patterns() const noexcept { return patterns_; }
    EntityKind kind() const noexcept { return kind_; }
    const Pattern& matcher() const noexcept { return matcher_; }

    friend bool operator==(const Entity& a, const Entity& b) {
        return a.id_ == b.id_ && a.display_name_ == b.display_name_ && a.patterns_ == b.patterns_ &&
               a.kind_ == b.kind_;
    }

private:
    std::string id_;
    std::string display_name_;
    std::vector<std::string> patterns_;
    EntityKind kind_;
    Pattern matcher_;
};

class Lexicon {
public:
    Lexicon() = default;
    // Throws DataError on a duplicate id.
    explicit Lexicon(std::vector<Entity> entities);

    std::size_t size() const noexcept { return entities_.size(); }
    bool empty() const noexcept { return entities_.empty(); }
    auto begin() const noexcept { return entities_.begin(); }
    auto end() const noexcept { return entities_.end(); }

    const Entity* find(std::string_view id) const noexcept;
    bool contains(std::string_view id) const noexcept { return find(id) != nullptr; }
    // Entity ids in lexicographic order.
    std::vector<std::string> ids() const;

    friend bool operator==(const Lexicon&, const Lexicon&) = default;

private:
    std::vector<Entity> entities_;  // file order
};

Lexicon load_lexicon(std::istream& in);
Lexicon lexicon_from_json(const nlohmann::json& doc);
nlohmann::json lexicon_to_json(const Lexicon& lexicon);

// Pattern for `stem` followed by at most `max_suffix` word characters,
// bounded by word boundaries on both sides.
std::string suffix_tolerant_pattern(std::string_view stem, int max_suffix = 4);

enum class Granularity { month, quarter, year };

std::string_view to_string(Granularity g) noexcept;
Granularity parse_granularity(std::string_view text);

// A calendar interval in UTC. Labels: "2008-10", "2008Q4", "2008".
struct TimeBucket {
    Granularity granularity = Granularity::quarter;
    int year = 1970;
    int index = 1;  // month 1..12, quarter 1..4, fixed 1 for year

    friend auto operator<=>(const TimeBucket&, const TimeBucket&) = default;
};

TimeBucket bucket_of(Timestamp ts, Granularity granularity);
TimeBucket next_bucket(TimeBucket b);
// Inclusive range; empty when last < first.
std::vector<TimeBucket> bucket_range(TimeBucket first, TimeBucket last);
Timestamp bucket_start(TimeBucket b);

std::string to_string(const TimeBucket& b);
TimeBucket parse_bucket(std::string_view label);

}  // namespace comention
