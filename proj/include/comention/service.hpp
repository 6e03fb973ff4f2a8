#pragma once

// Precomputed analysis bundles and the read-only explorer API over them.
//
// Bundle directory layout:
//   manifest.json        {"format": 1, "granularity": ..., "max_distinct": ...}
//   lexicon.json         lexicon in its input format
//   posts.ndjson         posts that carry at least one co-mention
//   mentions.ndjson      mentions inside those posts
//   contexts.ndjson      one context record per corpus post
//   comentions.ndjson    every co-mention
//   graphs/<bucket>.csv        edge list at threshold 0 (full lexicon)
//   graphs/<bucket>.nodes.csv  node mention counts; <bucket> includes "all"
//   measures.csv, per_node.csv measure series at threshold 0
//   index.json           {"<bucket>": [{"a": ..., "b": ..., "posts": [ids in corpus order]}]}

#include "comention/extract.hpp"
#include "comention/ingest.hpp"
#include "comention/layout.hpp"
#include "comention/measures.hpp"
#include "comention/network.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace comention {

using ContextIndex = std::map<TimeBucket, std::map<EntityPair, std::vector<std::string>>>;

struct AnalysisBundle {
    Lexicon lexicon;
    Granularity granularity = Granularity::quarter;
    int max_distinct = kDefaultMaxDistinct;
    std::vector<ContextRecord> contexts;
    std::vector<CoMention> comentions;
    std::map<std::string, Post> posts;
    std::map<std::string, std::vector<Mention>> mentions;  // by post id
    std::map<std::string, WeightedGraph> graphs;           // by bucket label, "all" included
    std::vector<MeasureRecord> measures;
    ContextIndex index;

    // Bucket labels in chronological order, "all" excluded.
    std::vector<std::string> bucket_labels() const;
};

AnalysisBundle build_bundle(CorpusReader& corpus, const Lexicon& lexicon, Granularity granularity,
                            const ExtractOptions& options = {});
AnalysisBundle build_bundle(std::span<const Post> posts, const Lexicon& lexicon, Granularity granularity,
                            const ExtractOptions& options = {});

void write_bundle(const AnalysisBundle& bundle, const std::filesystem::path& dir);
// Validates that every indexed post resolves and index sizes match the
// stored edge weights. Throws DataError.
AnalysisBundle load_bundle(const std::filesystem::path& dir);

struct ContextSpan {
    std::string entity;
    std::size_t start = 0;  // code point offsets into the excerpt, half-open
    std::size_t end = 0;
};

struct ContextSample {
    std::string post_id;
    Timestamp ts;
    std::optional<std::string> source;
    std::string excerpt;
    bool clipped_start = false;
    bool clipped_end = false;
    std::vector<ContextSpan> spans;
};

inline constexpr std::size_t kExcerptRadius = 200;  // code points around the mention pair

// Excerpt around the closest pair of mentions of `a` and `b`, with every
// mention of either entity that lies inside it.
ContextSample make_context_sample(const Post& post, std::span<const Mention> mentions, const std::string& a,
                                  const std::string& b, std::size_t radius = kExcerptRadius);

using QueryParams = std::multimap<std::string, std::string>;

struct ApiResponse {
    int status = 200;
    std::string body;
};

struct ServiceOptions {
    std::uint64_t seed = kDefaultLayoutSeed;
    int layout_iterations = 500;
    std::size_t default_limit = 20;
};

// Request handling is a pure function of (bundle, query) apart from the
// layout and series caches, whose entries are deterministic.
class ExplorerService {
public:
    explicit ExplorerService(AnalysisBundle bundle, ServiceOptions options = {});

    ApiResponse handle(std::string_view path, const QueryParams& params) const;

    ApiResponse entities() const;
    ApiResponse buckets() const;
    ApiResponse graph(const QueryParams& params) const;
    ApiResponse series(const QueryParams& params) const;
    ApiResponse contexts(const QueryParams& params) const;

    const AnalysisBundle& bundle() const noexcept { return bundle_; }

private:
    using LayoutKey = std::tuple<std::string, std::uint64_t, NodePolicy, std::uint64_t>;
    using SeriesKey = std::tuple<Granularity, std::uint64_t, NodePolicy>;

    const LayoutResult& layout_for(const LayoutKey& key, const WeightedGraph& g) const;
    std::vector<MeasureRecord> series_for(const SeriesKey& key) const;

    AnalysisBundle bundle_;
    ServiceOptions options_;
    mutable std::mutex cache_mutex_;
    mutable std::map<LayoutKey, std::unique_ptr<LayoutResult>> layout_cache_;
    mutable std::map<SeriesKey, std::vector<MeasureRecord>> series_cache_;
};

// HTTP front end: GET /entities, /buckets, /graph, /series, /contexts, with
// CORS headers. Static explorer assets are mounted at `/` when given.
class HttpServer {
public:
    HttpServer(const ExplorerService& service, std::string allow_origin = "*",
               std::optional<std::filesystem::path> static_dir = std::nullopt);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    // Returns the bound port (port 0 picks a free one); throws Error on failure.
    int bind(const std::string& host, int port);
    // Blocks until stop().
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace comention
