#include "comention/network.hpp"

#include "comention/error.hpp"

#include <algorithm>

namespace comention {

std::string bucket_label(const BucketKey& key) { return key ? to_string(*key) : std::string("all"); }

BucketKey parse_bucket_key(std::string_view label) {
    if (label == "all") return std::nullopt;
    return parse_bucket(label);
}

bool in_bucket(Timestamp ts, const BucketKey& key) {
    return !key || bucket_of(ts, key->granularity) == *key;
}

std::string_view to_string(NodePolicy p) noexcept {
    return p == NodePolicy::mentioned_only ? "mentioned" : "full";
}

NodePolicy parse_node_policy(std::string_view text) {
    if (text == "full" || text == "full_lexicon") return NodePolicy::full_lexicon;
    if (text == "mentioned" || text == "mentioned_only") return NodePolicy::mentioned_only;
    throw InvalidArgument("unknown node policy '" + std::string(text) + "'");
}

WeightedGraph::WeightedGraph(BucketKey bucket, NodeMap nodes, EdgeMap edges)
    : bucket_(std::move(bucket)), nodes_(std::move(nodes)), edges_(std::move(edges)) {
    for (const auto& [pair, w] : edges_) {
        if (w == 0) throw InvalidArgument("zero-weight edge " + pair.a() + "--" + pair.b());
        if (!nodes_.contains(pair.a()) || !nodes_.contains(pair.b())) {
            throw InvalidArgument("edge " + pair.a() + "--" + pair.b() + " has an endpoint outside the node set");
        }
    }
}

std::uint64_t WeightedGraph::weight(const std::string& x, const std::string& y) const {
    if (x == y) return 0;
    auto it = edges_.find(EntityPair(x, y));
    return it == edges_.end() ? 0 : it->second;
}

std::uint64_t WeightedGraph::total_weight() const noexcept {
    std::uint64_t total = 0;
    for (const auto& [pair, w] : edges_) total += w;
    return total;
}

std::uint64_t WeightedGraph::max_weight() const noexcept {
    std::uint64_t best = 0;
    for (const auto& [pair, w] : edges_) best = std::max(best, w);
    return best;
}

std::uint64_t WeightedGraph::max_mention_count() const noexcept {
    std::uint64_t best = 0;
    for (const auto& [id, m] : nodes_) best = std::max(best, m);
    return best;
}

namespace {

void require_known(const Lexicon& lexicon, const std::string& id) {
    if (!lexicon.contains(id)) {
        throw DataError("entity '" + id + "' is not in the lexicon (streams and lexicon do not match)");
    }
}

WeightedGraph::NodeMap initial_nodes(const Lexicon& lexicon, NodePolicy policy) {
    WeightedGraph::NodeMap nodes;
    if (policy == NodePolicy::full_lexicon) {
        for (const auto& e : lexicon) nodes.emplace(e.id(), 0);
    }
    return nodes;
}

WeightedGraph finish(BucketKey bucket, WeightedGraph::NodeMap nodes, WeightedGraph::EdgeMap edges) {
    // under mentioned_only an edge endpoint is always a mentioned node, but
    // hand-built streams may lack the context record
    for (const auto& [pair, w] : edges) {
        nodes.try_emplace(pair.a(), 0);
        nodes.try_emplace(pair.b(), 0);
    }
    return WeightedGraph(std::move(bucket), std::move(nodes), std::move(edges));
}

}  // namespace

WeightedGraph aggregate(std::span<const CoMention> comentions, std::span<const ContextRecord> contexts,
                        const BucketKey& bucket, NodePolicy policy, const Lexicon& lexicon) {
    auto nodes = initial_nodes(lexicon, policy);
    WeightedGraph::EdgeMap edges;
    for (const auto& ctx : contexts) {
        if (!in_bucket(ctx.ts, bucket)) continue;
        for (const auto& id : ctx.entities) {
            require_known(lexicon, id);
            ++nodes[id];
        }
    }
    for (const auto& c : comentions) {
        require_known(lexicon, c.pair.a());
        require_known(lexicon, c.pair.b());
        if (in_bucket(c.ts, bucket)) ++edges[c.pair];
    }
    return finish(bucket, std::move(nodes), std::move(edges));
}

std::optional<std::pair<TimeBucket, TimeBucket>> data_span(std::span<const CoMention> comentions,
                                                           std::span<const ContextRecord> contexts,
                                                           Granularity granularity) {
    std::optional<Timestamp> lo;
    std::optional<Timestamp> hi;
    auto see = [&](Timestamp ts) {
        if (!lo || ts < *lo) lo = ts;
        if (!hi || ts > *hi) hi = ts;
    };
    for (const auto& c : contexts) see(c.ts);
    for (const auto& c : comentions) see(c.ts);
    if (!lo) return std::nullopt;
    return std::pair{bucket_of(*lo, granularity), bucket_of(*hi, granularity)};
}

std::map<TimeBucket, WeightedGraph> aggregate_by_bucket(std::span<const CoMention> comentions,
                                                        std::span<const ContextRecord> contexts,
                                                        Granularity granularity, NodePolicy policy,
                                                        const Lexicon& lexicon,
                                                        std::optional<TimeBucket> first,
                                                        std::optional<TimeBucket> last) {
    std::map<TimeBucket, WeightedGraph> out;
    const auto span = data_span(comentions, contexts, granularity);
    if (!first && span) first = span->first;
    if (!last && span) last = span->second;
    if (!first || !last) return out;
    if (first->granularity != granularity || last->granularity != granularity) {
        throw InvalidArgument("bucket range does not match granularity " + std::string(to_string(granularity)));
    }

    struct Acc {
        WeightedGraph::NodeMap nodes;
        WeightedGraph::EdgeMap edges;
    };
    std::map<TimeBucket, Acc> acc;
    for (const auto& b : bucket_range(*first, *last)) acc.emplace(b, Acc{initial_nodes(lexicon, policy), {}});

    for (const auto& ctx : contexts) {
        for (const auto& id : ctx.entities) require_known(lexicon, id);
        auto it = acc.find(bucket_of(ctx.ts, granularity));
        if (it == acc.end()) continue;
        for (const auto& id : ctx.entities) ++it->second.nodes[id];
    }
    for (const auto& c : comentions) {
        require_known(lexicon, c.pair.a());
        require_known(lexicon, c.pair.b());
        auto it = acc.find(bucket_of(c.ts, granularity));
        if (it != acc.end()) ++it->second.edges[c.pair];
    }
    for (auto& [b, a] : acc) out.emplace(b, finish(b, std::move(a.nodes), std::move(a.edges)));
    return out;
}

WeightedGraph with_node_policy(const WeightedGraph& g, NodePolicy policy) {
    if (policy == NodePolicy::full_lexicon) return g;
    WeightedGraph::NodeMap nodes;
    for (const auto& [id, m] : g.nodes()) {
        if (m > 0) nodes.emplace(id, m);
    }
    return finish(g.bucket(), std::move(nodes), g.edges());
}

WeightedGraph apply_threshold(const WeightedGraph& g, std::uint64_t threshold) {
    WeightedGraph::EdgeMap kept;
    for (const auto& [pair, w] : g.edges()) {
        if (w >= threshold) kept.emplace(pair, w);
    }
    return WeightedGraph(g.bucket(), g.nodes(), std::move(kept));
}

Adjacency binarize(const WeightedGraph& g) {
    Adjacency adj;
    adj.nodes.reserve(g.node_count());
    std::map<std::string_view, std::size_t> index;
    for (const auto& [id, m] : g.nodes()) {
        index.emplace(id, adj.nodes.size());
        adj.nodes.push_back(id);
    }
    adj.matrix = Matrix(adj.nodes.size(), adj.nodes.size());
    for (const auto& [pair, w] : g.edges()) {
        const std::size_t i = index.at(pair.a());
        const std::size_t j = index.at(pair.b());
        adj.matrix(i, j) = 1.0;
        adj.matrix(j, i) = 1.0;
    }
    return adj;
}

DirectedCondGraph conditional_graph(std::span<const CoMention> comentions,
                                    std::span<const ContextRecord> contexts, const BucketKey& bucket) {
    DirectedCondGraph out;
    out.bucket = bucket;
    for (const auto& ctx : contexts) {
        if (ctx.disqualified || !in_bucket(ctx.ts, bucket)) continue;
        for (const auto& id : ctx.entities) ++out.nodes[id];
    }
    std::map<EntityPair, std::uint64_t> joint;
    for (const auto& c : comentions) {
        if (in_bucket(c.ts, bucket)) ++joint[c.pair];
    }
    for (const auto& [pair, count] : joint) {
        for (const auto& [from, to] : {std::pair{pair.a(), pair.b()}, std::pair{pair.b(), pair.a()}}) {
            auto it = out.nodes.find(from);
            if (it == out.nodes.end() || it->second == 0) {
                throw DataError("entity '" + from + "' has co-mentions but no qualifying contexts");
            }
            if (count > it->second) {
                throw DataError("entity '" + from + "' has more co-mention contexts than contexts");
            }
            out.arcs[{from, to}] = CondArc{static_cast<double>(count) / static_cast<double>(it->second),
                                           count, it->second};
        }
    }
    return out;
}

}  // namespace comention
