#include "comention/service.hpp"

#include "comention/csv.hpp"
#include "comention/error.hpp"
#include "comention/export.hpp"

#include <httplib.h>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace comention {

namespace fs = std::filesystem;

std::vector<std::string> AnalysisBundle::bucket_labels() const {
    std::vector<TimeBucket> buckets;
    for (const auto& [label, g] : graphs) {
        if (g.bucket()) buckets.push_back(*g.bucket());
    }
    std::sort(buckets.begin(), buckets.end());
    std::vector<std::string> out;
    out.reserve(buckets.size());
    for (const auto& b : buckets) out.push_back(to_string(b));
    return out;
}

namespace {

void finish_bundle(AnalysisBundle& bundle) {
    const auto graphs = aggregate_by_bucket(bundle.comentions, bundle.contexts, bundle.granularity,
                                            NodePolicy::full_lexicon, bundle.lexicon);
    for (const auto& [b, g] : graphs) {
        bundle.measures.push_back(measure_graph(g));
        bundle.graphs.emplace(to_string(b), g);
    }
    bundle.graphs.emplace("all", aggregate(bundle.comentions, bundle.contexts, std::nullopt,
                                           NodePolicy::full_lexicon, bundle.lexicon));
}

class BundleBuilder {
public:
    BundleBuilder(const Lexicon& lexicon, Granularity granularity, int max_distinct) {
        bundle_.lexicon = lexicon;
        bundle_.granularity = granularity;
        bundle_.max_distinct = max_distinct;
    }

    void add(const Post& post, const PostExtraction& x) {
        bundle_.contexts.push_back(x.context);
        if (x.comentions.empty()) return;
        bundle_.posts.emplace(post.id, post);
        bundle_.mentions.emplace(post.id, x.mentions);
        const TimeBucket bucket = bucket_of(post.ts, bundle_.granularity);
        for (const auto& c : x.comentions) {
            bundle_.index[bucket][c.pair].push_back(post.id);
            bundle_.comentions.push_back(c);
        }
    }

    AnalysisBundle finish() && {
        finish_bundle(bundle_);
        return std::move(bundle_);
    }

private:
    AnalysisBundle bundle_;
};

}  // namespace

AnalysisBundle build_bundle(CorpusReader& corpus, const Lexicon& lexicon, Granularity granularity,
                            const ExtractOptions& options) {
    BundleBuilder builder(lexicon, granularity, options.max_distinct);
    extract_corpus(corpus, lexicon, options,
                   [&](const Post& post, const PostExtraction& x) { builder.add(post, x); });
    return std::move(builder).finish();
}

AnalysisBundle build_bundle(std::span<const Post> posts, const Lexicon& lexicon, Granularity granularity,
                            const ExtractOptions& options) {
    BundleBuilder builder(lexicon, granularity, options.max_distinct);
    for (const auto& post : posts) builder.add(post, extract_post(post, lexicon, options.max_distinct));
    return std::move(builder).finish();
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << content;
    if (!out) throw DataError("write failed for " + path.string());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <typename Range>
std::string ndjson(const Range& items) {
    std::string out;
    for (const auto& item : items) {
        out += to_json(item).dump();
        out += '\n';
    }
    return out;
}

}  // namespace

void write_bundle(const AnalysisBundle& bundle, const fs::path& dir) {
    fs::create_directories(dir);
    fs::remove_all(dir / "graphs");
    fs::create_directories(dir / "graphs");

    nlohmann::json manifest = {{"format", 1},
                               {"granularity", to_string(bundle.granularity)},
                               {"max_distinct", bundle.max_distinct},
                               {"buckets", bundle.bucket_labels()}};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    write_file(dir / "lexicon.json", lexicon_to_json(bundle.lexicon).dump(2) + "\n");

    std::string posts;
    std::string mentions;
    for (const auto& ctx : bundle.contexts) {
        auto it = bundle.posts.find(ctx.post_id);
        if (it == bundle.posts.end()) continue;
        posts += post_to_json(it->second).dump() + '\n';
        if (auto m = bundle.mentions.find(ctx.post_id); m != bundle.mentions.end()) mentions += ndjson(m->second);
    }
    write_file(dir / "posts.ndjson", posts);
    write_file(dir / "mentions.ndjson", mentions);
    write_file(dir / "contexts.ndjson", ndjson(bundle.contexts));
    write_file(dir / "comentions.ndjson", ndjson(bundle.comentions));

    for (const auto& [label, g] : bundle.graphs) {
        write_file(dir / "graphs" / (label + ".csv"), to_edge_csv(g));
        write_file(dir / "graphs" / (label + ".nodes.csv"), to_node_csv(g));
    }
    write_file(dir / "measures.csv", measures_csv(bundle.measures));
    write_file(dir / "per_node.csv", per_node_csv(bundle.measures));

    nlohmann::json index = nlohmann::json::object();
    for (const auto& [bucket, pairs] : bundle.index) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& [pair, ids] : pairs) rows.push_back({{"a", pair.a()}, {"b", pair.b()}, {"posts", ids}});
        index[to_string(bucket)] = std::move(rows);
    }
    write_file(dir / "index.json", index.dump(1) + "\n");
}

AnalysisBundle load_bundle(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw DataError("bundle directory " + dir.string() + " does not exist");
    AnalysisBundle bundle;
    try {
        const auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
        if (manifest.value("format", 0) != 1) throw DataError("unsupported bundle format");
        bundle.granularity = parse_granularity(manifest.at("granularity").get<std::string>());
        bundle.max_distinct = manifest.at("max_distinct").get<int>();

        {
            std::ifstream in(dir / "lexicon.json");
            bundle.lexicon = load_lexicon(in);
        }
        {
            std::ifstream in(dir / "contexts.ndjson");
            bundle.contexts = read_contexts(in);
        }
        {
            std::ifstream in(dir / "comentions.ndjson");
            bundle.comentions = read_comentions(in);
        }
        {
            std::ifstream in(dir / "posts.ndjson");
            for (auto& post : read_corpus(in)) {
                auto id = post.id;
                bundle.posts.emplace(std::move(id), std::move(post));
            }
        }
        {
            std::ifstream in(dir / "mentions.ndjson");
            for (auto& m : read_mentions(in)) bundle.mentions[m.post_id].push_back(std::move(m));
        }

        std::vector<std::string> labels = manifest.at("buckets").get<std::vector<std::string>>();
        labels.push_back("all");
        for (const auto& label : labels) {
            auto graphs = parse_graph_csv(read_file(dir / "graphs" / (label + ".csv")),
                                          read_file(dir / "graphs" / (label + ".nodes.csv")));
            auto it = graphs.find(label);
            if (graphs.size() != 1 || it == graphs.end()) {
                throw DataError("graph files for bucket " + label + " hold another bucket");
            }
            bundle.graphs.emplace(label, std::move(it->second));
        }
        for (const auto& label : bundle.bucket_labels()) bundle.measures.push_back(measure_graph(bundle.graphs.at(label)));

        const auto index = nlohmann::json::parse(read_file(dir / "index.json"));
        for (const auto& [label, rows] : index.items()) {
            const TimeBucket bucket = parse_bucket(label);
            auto& pairs = bundle.index[bucket];
            for (const auto& row : rows) {
                EntityPair pair(row.at("a").get<std::string>(), row.at("b").get<std::string>());
                pairs[pair] = row.at("posts").get<std::vector<std::string>>();
            }
        }
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw DataError("bundle " + dir.string() + ": " + e.what());
    }

    for (const auto& [bucket, pairs] : bundle.index) {
        auto g = bundle.graphs.find(to_string(bucket));
        if (g == bundle.graphs.end()) throw DataError("index bucket " + to_string(bucket) + " has no graph");
        for (const auto& [pair, ids] : pairs) {
            if (g->second.weight(pair.a(), pair.b()) != ids.size()) {
                throw DataError("index for " + pair.a() + "--" + pair.b() + " in " + to_string(bucket) +
                                " disagrees with the edge weight");
            }
            for (const auto& id : ids) {
                if (!bundle.posts.contains(id)) throw DataError("indexed post '" + id + "' is missing");
            }
        }
    }
    return bundle;
}

ContextSample make_context_sample(const Post& post, std::span<const Mention> mentions, const std::string& a,
                                  const std::string& b, std::size_t radius) {
    const DecodedText text(post.text);
    auto cp_index = [&](std::size_t byte) {
        std::size_t lo = 0;
        std::size_t hi = text.size();
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (text.offset(mid) < byte) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        return lo;
    };

    const Mention* best_a = nullptr;
    const Mention* best_b = nullptr;
    std::size_t best_gap = 0;
    for (const auto& ma : mentions) {
        if (ma.entity_id != a) continue;
        for (const auto& mb : mentions) {
            if (mb.entity_id != b) continue;
            const std::size_t left = std::min(ma.end, mb.end);
            const std::size_t right = std::max(ma.start, mb.start);
            const std::size_t gap = right > left ? right - left : 0;
            if (!best_a || gap < best_gap) {
                best_a = &ma;
                best_b = &mb;
                best_gap = gap;
            }
        }
    }
    if (!best_a) throw DataError("post '" + post.id + "' lacks mentions of both " + a + " and " + b);

    const std::size_t first = cp_index(std::min(best_a->start, best_b->start));
    const std::size_t last = cp_index(std::max(best_a->end, best_b->end));
    const std::size_t lo = first > radius ? first - radius : 0;
    const std::size_t hi = std::min(text.size(), last + radius);

    ContextSample sample;
    sample.post_id = post.id;
    sample.ts = post.ts;
    sample.source = post.source;
    sample.excerpt = post.text.substr(text.offset(lo), text.offset(hi) - text.offset(lo));
    sample.clipped_start = lo > 0;
    sample.clipped_end = hi < text.size();
    for (const auto& m : mentions) {
        if (m.entity_id != a && m.entity_id != b) continue;
        const std::size_t s = cp_index(m.start);
        const std::size_t e = cp_index(m.end);
        if (s >= lo && e <= hi) sample.spans.push_back({m.entity_id, s - lo, e - lo});
    }
    return sample;
}

// --- API ---------------------------------------------------------------------

namespace {

struct ApiError {
    int status;
    std::string message;
};

std::optional<std::string> param(const QueryParams& params, const std::string& name) {
    auto it = params.find(name);
    if (it == params.end()) return std::nullopt;
    return it->second;
}

std::string required(const QueryParams& params, const std::string& name) {
    auto v = param(params, name);
    if (!v || v->empty()) throw ApiError{400, "missing parameter '" + name + "'"};
    return *v;
}

std::uint64_t u64_param(const QueryParams& params, const std::string& name, std::uint64_t fallback) {
    auto v = param(params, name);
    if (!v) return fallback;
    if (v->empty() || v->size() > 19 || !std::all_of(v->begin(), v->end(), [](char c) { return c >= '0' && c <= '9'; })) {
        throw ApiError{400, "parameter '" + name + "' must be a non-negative integer"};
    }
    return std::stoull(*v);
}

NodePolicy policy_param(const QueryParams& params) {
    auto v = param(params, "node_policy");
    if (!v) return NodePolicy::full_lexicon;
    try {
        return parse_node_policy(*v);
    } catch (const InvalidArgument& e) {
        throw ApiError{400, e.what()};
    }
}

nlohmann::json optional_number(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json record_json(const MeasureRecord& r) {
    nlohmann::json per_node = nlohmann::json::object();
    for (const auto& [id, m] : r.per_node) {
        per_node[id] = {{"strength", m.strength}, {"communicability", m.communicability}};
    }
    return {{"bucket", bucket_label(r.bucket)},
            {"density", r.density},
            {"avg_strength", optional_number(r.avg_strength)},
            {"avg_communicability", optional_number(r.avg_communicability)},
            {"per_node", per_node}};
}

ApiResponse ok(const nlohmann::json& body) { return {200, body.dump()}; }

}  // namespace

ExplorerService::ExplorerService(AnalysisBundle bundle, ServiceOptions options)
    : bundle_(std::move(bundle)), options_(options) {}

ApiResponse ExplorerService::handle(std::string_view path, const QueryParams& params) const {
    try {
        if (path == "/entities") return entities();
        if (path == "/buckets") return buckets();
        if (path == "/graph") return graph(params);
        if (path == "/series") return series(params);
        if (path == "/contexts") return contexts(params);
        throw ApiError{404, "no such endpoint " + std::string(path)};
    } catch (const ApiError& e) {
        return {e.status, nlohmann::json{{"error", e.message}}.dump()};
    } catch (const std::exception& e) {
        return {500, nlohmann::json{{"error", e.what()}}.dump()};
    }
}

ApiResponse ExplorerService::entities() const {
    const auto& all = bundle_.graphs.at("all");
    nlohmann::json list = nlohmann::json::array();
    for (const auto& id : bundle_.lexicon.ids()) {
        const Entity& e = *bundle_.lexicon.find(id);
        const auto it = all.nodes().find(id);
        list.push_back({{"id", id},
                        {"name", e.display_name()},
                        {"kind", to_string(e.kind())},
                        {"patterns", e.patterns()},
                        {"mention_count", it == all.nodes().end() ? 0 : it->second}});
    }
    return ok({{"entities", list}});
}

ApiResponse ExplorerService::buckets() const {
    return ok({{"granularity", to_string(bundle_.granularity)}, {"buckets", bundle_.bucket_labels()}});
}

const LayoutResult& ExplorerService::layout_for(const LayoutKey& key, const WeightedGraph& g) const {
    {
        std::lock_guard lock(cache_mutex_);
        if (auto it = layout_cache_.find(key); it != layout_cache_.end()) return *it->second;
    }
    LayoutOptions lo;
    lo.seed = std::get<3>(key);
    lo.iterations = options_.layout_iterations;
    auto computed = std::make_unique<LayoutResult>(fr_layout(g, lo));
    std::lock_guard lock(cache_mutex_);
    auto [it, inserted] = layout_cache_.try_emplace(key, std::move(computed));
    return *it->second;
}

ApiResponse ExplorerService::graph(const QueryParams& params) const {
    const std::string label = required(params, "bucket");
    const auto stored = bundle_.graphs.find(label);
    if (stored == bundle_.graphs.end()) throw ApiError{404, "unknown bucket '" + label + "'"};
    const std::uint64_t threshold = u64_param(params, "threshold", 0);
    const NodePolicy policy = policy_param(params);
    const std::uint64_t seed = u64_param(params, "seed", options_.seed);

    const WeightedGraph g = apply_threshold(with_node_policy(stored->second, policy), threshold);
    const MeasureRecord measures = measure_graph(g);
    const LayoutResult* layout = g.node_count() > 0 ? &layout_for({label, threshold, policy, seed}, g) : nullptr;

    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& [id, m] : g.nodes()) {
        const Entity* e = bundle_.lexicon.find(id);
        const Point p = layout->positions.at(id);
        const NodeMeasure& nm = measures.per_node.at(id);
        nodes.push_back({{"id", id},
                         {"name", e ? e->display_name() : id},
                         {"kind", e ? to_string(e->kind()) : "bank"},
                         {"mention_count", m},
                         {"x", p.x},
                         {"y", p.y},
                         {"strength", nm.strength},
                         {"communicability", nm.communicability}});
    }
    nlohmann::json edges = nlohmann::json::array();
    const std::uint64_t w_max = g.max_weight();
    for (const auto& [pair, w] : g.edges()) {
        edges.push_back({{"a", pair.a()}, {"b", pair.b()}, {"weight", w}, {"darkness", edge_darkness(w, w_max)}});
    }
    return ok({{"bucket", label},
               {"threshold", threshold},
               {"node_policy", to_string(policy)},
               {"seed", seed},
               {"nodes", nodes},
               {"edges", edges},
               {"measures",
                {{"density", measures.density},
                 {"avg_strength", optional_number(measures.avg_strength)},
                 {"avg_communicability", optional_number(measures.avg_communicability)}}}});
}

std::vector<MeasureRecord> ExplorerService::series_for(const SeriesKey& key) const {
    const auto& [granularity, threshold, policy] = key;
    if (granularity == bundle_.granularity && threshold == 0 && policy == NodePolicy::full_lexicon) {
        return bundle_.measures;
    }
    {
        std::lock_guard lock(cache_mutex_);
        if (auto it = series_cache_.find(key); it != series_cache_.end()) return it->second;
    }
    SeriesOptions so;
    so.granularity = granularity;
    so.threshold = threshold;
    so.node_policy = policy;
    auto records = measure_series(bundle_.comentions, bundle_.contexts, bundle_.lexicon, so);
    std::lock_guard lock(cache_mutex_);
    return series_cache_.try_emplace(key, std::move(records)).first->second;
}

ApiResponse ExplorerService::series(const QueryParams& params) const {
    Granularity granularity = bundle_.granularity;
    if (auto g = param(params, "granularity")) {
        try {
            granularity = parse_granularity(*g);
        } catch (const InvalidArgument& e) {
            throw ApiError{400, e.what()};
        }
    }
    const std::uint64_t threshold = u64_param(params, "threshold", 0);
    const NodePolicy policy = policy_param(params);
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : series_for({granularity, threshold, policy})) records.push_back(record_json(r));
    return ok({{"granularity", to_string(granularity)},
               {"threshold", threshold},
               {"node_policy", to_string(policy)},
               {"records", records}});
}

ApiResponse ExplorerService::contexts(const QueryParams& params) const {
    const std::string a = required(params, "a");
    const std::string b = required(params, "b");
    for (const auto& id : {a, b}) {
        if (!bundle_.lexicon.contains(id)) throw ApiError{404, "unknown entity '" + id + "'"};
    }
    if (a == b) throw ApiError{400, "parameters 'a' and 'b' must name different entities"};
    const std::string label = param(params, "bucket").value_or("all");
    if (!bundle_.graphs.contains(label)) throw ApiError{404, "unknown bucket '" + label + "'"};
    // 0 means no limit
    const std::uint64_t limit = u64_param(params, "limit", options_.default_limit);

    const EntityPair pair(a, b);
    std::vector<const Post*> posts;
    auto collect = [&](const std::map<EntityPair, std::vector<std::string>>& pairs) {
        if (auto it = pairs.find(pair); it != pairs.end()) {
            for (const auto& id : it->second) posts.push_back(&bundle_.posts.at(id));
        }
    };
    if (label == "all") {
        for (const auto& [bucket, pairs] : bundle_.index) collect(pairs);
    } else {
        if (auto it = bundle_.index.find(parse_bucket(label)); it != bundle_.index.end()) collect(it->second);
    }
    std::stable_sort(posts.begin(), posts.end(), [](const Post* x, const Post* y) {
        return x->ts != y->ts ? x->ts > y->ts : x->id < y->id;
    });
    const std::size_t total = posts.size();
    if (limit != 0 && posts.size() > limit) posts.resize(limit);

    nlohmann::json samples = nlohmann::json::array();
    for (const Post* post : posts) {
        const auto m = bundle_.mentions.find(post->id);
        const std::span<const Mention> mentions =
            m == bundle_.mentions.end() ? std::span<const Mention>{} : std::span<const Mention>(m->second);
        const ContextSample s = make_context_sample(*post, mentions, pair.a(), pair.b());
        nlohmann::json spans = nlohmann::json::array();
        for (const auto& sp : s.spans) spans.push_back({{"entity", sp.entity}, {"start", sp.start}, {"end", sp.end}});
        samples.push_back({{"post_id", s.post_id},
                           {"ts", format_timestamp(s.ts)},
                           {"source", s.source ? nlohmann::json(*s.source) : nlohmann::json(nullptr)},
                           {"excerpt", s.excerpt},
                           {"clipped_start", s.clipped_start},
                           {"clipped_end", s.clipped_end},
                           {"spans", spans}});
    }
    return ok({{"a", pair.a()}, {"b", pair.b()}, {"bucket", label}, {"total", total}, {"samples", samples}});
}

// --- HTTP ----------------------------------------------------------------------

struct HttpServer::Impl {
    httplib::Server server;
};

HttpServer::HttpServer(const ExplorerService& service, std::string allow_origin,
                       std::optional<fs::path> static_dir)
    : impl_(std::make_unique<Impl>()) {
    auto& srv = impl_->server;
    srv.set_default_headers({{"Access-Control-Allow-Origin", allow_origin},
                             {"Access-Control-Allow-Methods", "GET, OPTIONS"}});
    for (const char* path : {"/entities", "/buckets", "/graph", "/series", "/contexts"}) {
        srv.Get(path, [&service, path](const httplib::Request& req, httplib::Response& res) {
            QueryParams params(req.params.begin(), req.params.end());
            const ApiResponse r = service.handle(path, params);
            res.status = r.status;
            res.set_content(r.body, "application/json");
        });
    }
    srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    if (static_dir && !srv.set_mount_point("/", static_dir->string())) {
        throw DataError("static directory " + static_dir->string() + " does not exist");
    }
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
    const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace comention
