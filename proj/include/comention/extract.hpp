#pragma once

// Mention scanning and per-context co-mention extraction.

#include "comention/ingest.hpp"

#include <json.hpp>

#include <compare>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace comention {

struct Mention {
    std::string post_id;
    std::string entity_id;
    std::size_t start = 0;  // byte offsets into the post text, half-open
    std::size_t end = 0;
    std::string surface;

    friend bool operator==(const Mention&, const Mention&) = default;
};

// Unordered entity pair stored as a < b.
class EntityPair {
public:
    // Throws InvalidArgument when x == y.
    EntityPair(std::string x, std::string y);

    const std::string& a() const noexcept { return a_; }
    const std::string& b() const noexcept { return b_; }
    bool contains(std::string_view id) const noexcept { return a_ == id || b_ == id; }

    friend auto operator<=>(const EntityPair&, const EntityPair&) = default;
    friend bool operator==(const EntityPair&, const EntityPair&) = default;

private:
    std::string a_;
    std::string b_;
};

struct CoMention {
    std::string post_id;
    EntityPair pair;
    Timestamp ts;

    friend bool operator==(const CoMention&, const CoMention&) = default;
};

// Deduplicated mention data of one post. Every post gets one, including
// posts without mentions, so downstream stages see the corpus time span.
struct ContextRecord {
    std::string post_id;
    Timestamp ts;
    std::vector<std::string> entities;  // distinct, sorted
    bool disqualified = false;          // more than max_distinct entities

    friend bool operator==(const ContextRecord&, const ContextRecord&) = default;
};

inline constexpr int kDefaultMaxDistinct = 6;

std::vector<Mention> scan_post(const Post& post, const Lexicon& lexicon);

std::set<std::string> distinct_entities(std::span<const Mention> mentions);

std::vector<CoMention> extract_comentions(const Post& post, const Lexicon& lexicon,
                                          int max_distinct = kDefaultMaxDistinct);

struct PostExtraction {
    std::vector<Mention> mentions;
    ContextRecord context;
    std::vector<CoMention> comentions;
};

PostExtraction extract_post(const Post& post, const Lexicon& lexicon,
                            int max_distinct = kDefaultMaxDistinct);

struct ExtractionSummary {
    std::size_t posts = 0;
    std::size_t posts_with_mentions = 0;
    std::size_t mentions = 0;
    std::size_t comentions = 0;
    std::size_t disqualified = 0;
    std::size_t malformed = 0;
};

struct ExtractOptions {
    int max_distinct = kDefaultMaxDistinct;
    // Worker threads for scanning; results reach the sink in corpus order.
    unsigned threads = 1;
    std::size_t batch_size = 2048;
};

using ExtractionSink = std::function<void(const Post&, const PostExtraction&)>;

ExtractionSummary extract_corpus(CorpusReader& reader, const Lexicon& lexicon,
                                 const ExtractOptions& options, const ExtractionSink& sink);

// In-memory convenience wrapper.
struct ExtractionResult {
    std::vector<CoMention> comentions;
    std::vector<ContextRecord> contexts;
    std::vector<Mention> mentions;
    ExtractionSummary summary;
};

ExtractionResult extract_all(std::span<const Post> posts, const Lexicon& lexicon,
                             const ExtractOptions& options = {});

// Newline-delimited JSON records.
nlohmann::json to_json(const Mention& m);
nlohmann::json to_json(const CoMention& c);
nlohmann::json to_json(const ContextRecord& c);
Mention mention_from_json(const nlohmann::json& j);
CoMention comention_from_json(const nlohmann::json& j);
ContextRecord context_from_json(const nlohmann::json& j);

std::vector<Mention> read_mentions(std::istream& in);
std::vector<CoMention> read_comentions(std::istream& in);
std::vector<ContextRecord> read_contexts(std::istream& in);

}  // namespace comention
