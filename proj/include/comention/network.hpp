#pragma once

// Per-bucket co-mention graphs, thresholding, binarization and the
// conditional-probability directed graph.

#include "comention/extract.hpp"
#include "comention/ingest.hpp"
#include "comention/matrix.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace comention {

// A time bucket, or nullopt for the whole corpus ("all").
using BucketKey = std::optional<TimeBucket>;

std::string bucket_label(const BucketKey& key);
BucketKey parse_bucket_key(std::string_view label);
bool in_bucket(Timestamp ts, const BucketKey& key);

enum class NodePolicy { full_lexicon, mentioned_only };

std::string_view to_string(NodePolicy p) noexcept;
// Accepts "full" / "mentioned" (and the long enum names).
NodePolicy parse_node_policy(std::string_view text);

// Undirected co-mention graph. Immutable once built.
class WeightedGraph {
public:
    using NodeMap = std::map<std::string, std::uint64_t>;  // entity -> mention_count
    using EdgeMap = std::map<EntityPair, std::uint64_t>;   // pair -> weight >= 1

    WeightedGraph() = default;
    // Throws InvalidArgument if an edge endpoint is not a node or a weight is 0.
    WeightedGraph(BucketKey bucket, NodeMap nodes, EdgeMap edges);

    const BucketKey& bucket() const noexcept { return bucket_; }
    const NodeMap& nodes() const noexcept { return nodes_; }
    const EdgeMap& edges() const noexcept { return edges_; }
    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }

    bool has_node(std::string_view id) const { return nodes_.find(std::string(id)) != nodes_.end(); }
    std::uint64_t weight(const std::string& x, const std::string& y) const;
    std::uint64_t total_weight() const noexcept;
    std::uint64_t max_weight() const noexcept;
    std::uint64_t max_mention_count() const noexcept;

    friend bool operator==(const WeightedGraph&, const WeightedGraph&) = default;

private:
    BucketKey bucket_;
    NodeMap nodes_;
    EdgeMap edges_;
};

// Edge weight = co-mentions inside the bucket; mention_count = posts in the
// bucket mentioning the entity (disqualified posts included).
// Throws DataError for entities missing from the lexicon.
WeightedGraph aggregate(std::span<const CoMention> comentions, std::span<const ContextRecord> contexts,
                        const BucketKey& bucket, NodePolicy policy, const Lexicon& lexicon);

// One graph per bucket over [first, last]; the range defaults to the time
// span of the inputs. Empty buckets yield edgeless graphs.
std::map<TimeBucket, WeightedGraph> aggregate_by_bucket(std::span<const CoMention> comentions,
                                                        std::span<const ContextRecord> contexts,
                                                        Granularity granularity, NodePolicy policy,
                                                        const Lexicon& lexicon,
                                                        std::optional<TimeBucket> first = std::nullopt,
                                                        std::optional<TimeBucket> last = std::nullopt);

// Time span of the inputs at `granularity`, nullopt when both are empty.
std::optional<std::pair<TimeBucket, TimeBucket>> data_span(std::span<const CoMention> comentions,
                                                           std::span<const ContextRecord> contexts,
                                                           Granularity granularity);

// Re-applies a node policy to a full-lexicon graph.
WeightedGraph with_node_policy(const WeightedGraph& g, NodePolicy policy);

// Keeps edges with weight >= threshold; the node set is unchanged.
WeightedGraph apply_threshold(const WeightedGraph& g, std::uint64_t threshold);

struct Adjacency {
    std::vector<std::string> nodes;  // lexicographic
    Matrix matrix;                   // 0/1, symmetric, zero diagonal
};

Adjacency binarize(const WeightedGraph& g);

struct CondArc {
    double probability = 0.0;       // joint / source_contexts
    std::uint64_t joint = 0;        // qualifying contexts mentioning both
    std::uint64_t source_contexts = 0;  // qualifying contexts mentioning the source
};

struct DirectedCondGraph {
    BucketKey bucket;
    std::map<std::string, std::uint64_t> nodes;  // entity -> qualifying contexts
    std::map<std::pair<std::string, std::string>, CondArc> arcs;  // (from, to)
};

// p(A->B) = |qualifying contexts with A and B| / |qualifying contexts with A|.
// Disqualified contexts count in neither term.
DirectedCondGraph conditional_graph(std::span<const CoMention> comentions,
                                    std::span<const ContextRecord> contexts, const BucketKey& bucket);

}  // namespace comention
