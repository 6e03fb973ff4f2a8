#include "comention/cli.hpp"

#include "comention/error.hpp"
#include "comention/export.hpp"
#include "comention/extract.hpp"
#include "comention/ingest.hpp"
#include "comention/layout.hpp"
#include "comention/measures.hpp"
#include "comention/network.hpp"
#include "comention/service.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <sstream>
#include <thread>

namespace comention {

namespace {

struct GlobalFlags {
    bool strict = false;
    bool lenient = false;
    bool quiet = false;

    ParseMode mode() const { return lenient ? ParseMode::lenient : ParseMode::strict; }
};

// Input selection shared by graph, measures, layout and render: either a raw
// corpus, or the co-mention and context streams written by `extract`.
struct InputFlags {
    std::string corpus;
    std::string lexicon;
    std::string comentions;
    std::string contexts;
    int max_distinct = kDefaultMaxDistinct;
    unsigned threads = 1;
};

struct Inputs {
    Lexicon lexicon;
    std::vector<CoMention> comentions;
    std::vector<ContextRecord> contexts;
};

struct GraphFlags {
    std::string granularity = "quarter";
    std::string bucket;
    std::string from;
    std::string to;
    std::uint64_t threshold = 0;
    std::string node_policy = "full";
};

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    return in;
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write " + path);
    f << content;
    if (!f) throw DataError("write failed for " + path);
}

Lexicon read_lexicon(const std::string& path) {
    auto in = open_in(path);
    return load_lexicon(in);
}

void report_issues(const CorpusReader& reader, const GlobalFlags& g, std::ostream& err) {
    if (g.quiet) return;
    for (const auto& issue : reader.issues()) err << "warning: corpus line " << issue.line << ": " << issue.message << '\n';
    if (reader.error_count() > reader.issues().size()) {
        err << "warning: " << reader.error_count() - reader.issues().size() << " further malformed records\n";
    }
}

Inputs load_inputs(const InputFlags& f, const GlobalFlags& g, std::ostream& err) {
    if (f.lexicon.empty()) throw InvalidArgument("--lexicon is required");
    Inputs in;
    in.lexicon = read_lexicon(f.lexicon);
    if (!f.corpus.empty()) {
        if (!f.comentions.empty() || !f.contexts.empty()) {
            throw InvalidArgument("--corpus excludes --comentions and --contexts");
        }
        auto stream = open_in(f.corpus);
        CorpusReader reader(stream, g.mode());
        ExtractOptions opts;
        opts.max_distinct = f.max_distinct;
        opts.threads = f.threads;
        extract_corpus(reader, in.lexicon, opts, [&](const Post&, const PostExtraction& x) {
            in.contexts.push_back(x.context);
            in.comentions.insert(in.comentions.end(), x.comentions.begin(), x.comentions.end());
        });
        report_issues(reader, g, err);
        return in;
    }
    if (f.comentions.empty() || f.contexts.empty()) {
        throw InvalidArgument("give either --corpus, or both --comentions and --contexts");
    }
    {
        auto s = open_in(f.comentions);
        in.comentions = read_comentions(s);
    }
    {
        auto s = open_in(f.contexts);
        in.contexts = read_contexts(s);
    }
    return in;
}

void add_input_flags(CLI::App* cmd, InputFlags& f) {
    cmd->add_option("--corpus", f.corpus, "Newline-delimited JSON posts");
    cmd->add_option("--lexicon", f.lexicon, "Entity lexicon (JSON)")->required();
    cmd->add_option("--comentions", f.comentions, "Co-mention stream written by extract");
    cmd->add_option("--contexts", f.contexts, "Context stream written by extract");
    cmd->add_option("--max-distinct", f.max_distinct, "Largest entity count of a qualifying context")
        ->capture_default_str();
    cmd->add_option("--threads", f.threads, "Scanner threads")->capture_default_str();
}

void add_graph_flags(CLI::App* cmd, GraphFlags& f, bool with_range) {
    cmd->add_option("--granularity", f.granularity, "month|quarter|year")
        ->check(CLI::IsMember({"month", "quarter", "year"}))
        ->capture_default_str();
    cmd->add_option("--threshold", f.threshold, "Minimum edge weight kept")->capture_default_str();
    cmd->add_option("--node-policy", f.node_policy, "full|mentioned")
        ->check(CLI::IsMember({"full", "mentioned"}))
        ->capture_default_str();
    if (with_range) {
        cmd->add_option("--from", f.from, "First bucket label");
        cmd->add_option("--to", f.to, "Last bucket label");
    }
}

std::optional<TimeBucket> range_end(const std::string& label, Granularity granularity, const char* flag) {
    if (label.empty()) return std::nullopt;
    const TimeBucket b = parse_bucket(label);
    if (b.granularity != granularity) {
        throw InvalidArgument(std::string(flag) + " " + label + " is not a " + std::string(to_string(granularity)) +
                              " bucket");
    }
    return b;
}

WeightedGraph single_graph(const Inputs& in, const GraphFlags& f) {
    const BucketKey key = parse_bucket_key(f.bucket.empty() ? "all" : f.bucket);
    return apply_threshold(aggregate(in.comentions, in.contexts, key, parse_node_policy(f.node_policy), in.lexicon),
                           f.threshold);
}

std::vector<WeightedGraph> graphs_in_range(const Inputs& in, const GraphFlags& f) {
    const Granularity gran = parse_granularity(f.granularity);
    std::vector<WeightedGraph> out;
    for (auto& [b, g] : aggregate_by_bucket(in.comentions, in.contexts, gran, parse_node_policy(f.node_policy),
                                            in.lexicon, range_end(f.from, gran, "--from"),
                                            range_end(f.to, gran, "--to"))) {
        out.push_back(apply_threshold(g, f.threshold));
    }
    return out;
}

LayoutResult compute_layout(const WeightedGraph& g, std::uint64_t seed, int iterations, double gravity) {
    LayoutOptions lo;
    lo.seed = seed;
    lo.iterations = iterations;
    lo.gravity = gravity;
    return fr_layout(g, lo);
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Co-mention network analysis of text corpora", "comention"};
    app.require_subcommand(1);

    GlobalFlags global;
    auto* strict = app.add_flag("--strict", global.strict, "Stop at the first malformed record (default)");
    app.add_flag("--lenient", global.lenient, "Skip and count malformed records")->excludes(strict);
    app.add_flag("-q,--quiet", global.quiet, "Suppress summaries and warnings");

    // extract
    auto* extract = app.add_subcommand("extract", "Scan a corpus and write the co-mention stream");
    InputFlags ex_in;
    std::string ex_out, ex_contexts, ex_mentions;
    extract->add_option("--corpus", ex_in.corpus, "Newline-delimited JSON posts")->required();
    extract->add_option("--lexicon", ex_in.lexicon, "Entity lexicon (JSON)")->required();
    extract->add_option("--out", ex_out, "Co-mention stream (NDJSON); stdout when omitted");
    extract->add_option("--contexts", ex_contexts, "Also write the per-post context stream");
    extract->add_option("--mentions", ex_mentions, "Also write every mention");
    extract->add_option("--max-distinct", ex_in.max_distinct, "Largest entity count of a qualifying context")
        ->capture_default_str();
    extract->add_option("--threads", ex_in.threads, "Scanner threads")->capture_default_str();

    // graph
    auto* graph = app.add_subcommand("graph", "Aggregate co-mentions into per-bucket graphs");
    InputFlags gr_in;
    GraphFlags gr;
    std::string gr_format = "csv", gr_out, gr_nodes;
    add_input_flags(graph, gr_in);
    add_graph_flags(graph, gr, true);
    graph->add_option("--bucket", gr.bucket, "Single bucket label, or 'all'");
    graph->add_option("--format", gr_format, "csv|graphml|dot")
        ->check(CLI::IsMember({"csv", "graphml", "dot"}))
        ->capture_default_str();
    graph->add_option("--out", gr_out, "Output file; stdout when omitted");
    graph->add_option("--nodes", gr_nodes, "Node CSV output (csv format only)");

    // measures
    auto* measures = app.add_subcommand("measures", "Connectivity measure series per bucket");
    InputFlags me_in;
    GraphFlags me;
    std::string me_out, me_per_node;
    add_input_flags(measures, me_in);
    add_graph_flags(measures, me, true);
    measures->add_option("--out", me_out, "Series CSV; stdout when omitted");
    measures->add_option("--per-node", me_per_node, "Per-node strength and communicability CSV");

    // layout
    auto* layout = app.add_subcommand("layout", "Fruchterman-Reingold layout of one bucket graph");
    InputFlags la_in;
    GraphFlags la;
    std::uint64_t la_seed = kDefaultLayoutSeed;
    int la_iterations = 500;
    double la_gravity = LayoutOptions{}.gravity;
    std::string la_out;
    add_input_flags(layout, la_in);
    add_graph_flags(layout, la, false);
    layout->add_option("--bucket", la.bucket, "Bucket label, or 'all'")->capture_default_str();
    layout->add_option("--seed", la_seed, "Layout seed")->capture_default_str();
    layout->add_option("--iterations", la_iterations, "Layout iterations")->capture_default_str();
    layout->add_option("--gravity", la_gravity, "Pull toward the centroid; 0 disables")->capture_default_str();
    layout->add_option("--out", la_out, "Layout JSON; stdout when omitted");

    // render
    auto* render = app.add_subcommand("render", "Render one bucket graph as SVG");
    InputFlags re_in;
    GraphFlags re;
    RenderSpec spec;
    std::uint64_t re_seed = kDefaultLayoutSeed;
    int re_iterations = 500;
    double re_gravity = LayoutOptions{}.gravity;
    std::string re_svg, re_layout;
    add_input_flags(render, re_in);
    add_graph_flags(render, re, false);
    render->add_option("--bucket", re.bucket, "Bucket label, or 'all'");
    render->add_option("--svg", re_svg, "SVG output; stdout when omitted");
    render->add_option("--layout", re_layout, "Layout JSON to reuse instead of computing one");
    render->add_option("--seed", re_seed, "Layout seed")->capture_default_str();
    render->add_option("--iterations", re_iterations, "Layout iterations")->capture_default_str();
    render->add_option("--gravity", re_gravity, "Layout gravity")->capture_default_str();
    render->add_option("--width", spec.width, "Canvas width (px)")->capture_default_str();
    render->add_option("--height", spec.height, "Canvas height (px)")->capture_default_str();
    render->add_option("--min-radius", spec.min_radius, "Smallest node radius (px)")->capture_default_str();
    render->add_option("--max-radius", spec.max_radius, "Largest node radius (px)")->capture_default_str();
    render->add_option("--light-gray", spec.light_gray, "Gray level of the weakest edge")->capture_default_str();
    render->add_option("--dark-gray", spec.dark_gray, "Gray level of the strongest edge")->capture_default_str();
    render->add_flag("--linear-radius", spec.linear_radius, "Radius instead of area proportional to mentions");

    // bundle
    auto* bundle = app.add_subcommand("bundle", "Precompute the analysis bundle served by `serve`");
    InputFlags bu_in;
    std::string bu_granularity = "quarter", bu_out;
    bundle->add_option("--corpus", bu_in.corpus, "Newline-delimited JSON posts")->required();
    bundle->add_option("--lexicon", bu_in.lexicon, "Entity lexicon (JSON)")->required();
    bundle->add_option("--granularity", bu_granularity, "month|quarter|year")
        ->check(CLI::IsMember({"month", "quarter", "year"}))
        ->capture_default_str();
    bundle->add_option("--max-distinct", bu_in.max_distinct, "Largest entity count of a qualifying context")
        ->capture_default_str();
    bundle->add_option("--threads", bu_in.threads, "Scanner threads")->capture_default_str();
    bundle->add_option("--out", bu_out, "Bundle directory")->required();

    // serve
    auto* serve = app.add_subcommand("serve", "Serve the explorer API over a bundle");
    std::string se_bundle, se_host = "127.0.0.1", se_static, se_origin = "*";
    int se_port = 8080;
    std::uint64_t se_seed = kDefaultLayoutSeed;
    serve->add_option("--bundle", se_bundle, "Bundle directory")->required();
    serve->add_option("--host", se_host, "Listen address")->capture_default_str();
    serve->add_option("--port", se_port, "Listen port; 0 picks a free one")->capture_default_str();
    serve->add_option("--seed", se_seed, "Default layout seed")->capture_default_str();
    serve->add_option("--static", se_static, "Directory of explorer assets mounted at /");
    serve->add_option("--allow-origin", se_origin, "CORS origin")->capture_default_str();

    if (argc <= 1) {
        err << app.help();
        return kExitUsage;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        if (*extract) {
            auto corpus = open_in(ex_in.corpus);
            const Lexicon lexicon = read_lexicon(ex_in.lexicon);
            CorpusReader reader(corpus, global.mode());
            ExtractOptions opts;
            opts.max_distinct = ex_in.max_distinct;
            opts.threads = ex_in.threads;
            std::ostringstream co, ctx, men;
            const auto summary = extract_corpus(reader, lexicon, opts, [&](const Post&, const PostExtraction& x) {
                for (const auto& c : x.comentions) co << to_json(c).dump() << '\n';
                if (!ex_contexts.empty()) ctx << to_json(x.context).dump() << '\n';
                if (!ex_mentions.empty()) {
                    for (const auto& m : x.mentions) men << to_json(m).dump() << '\n';
                }
            });
            report_issues(reader, global, err);
            emit(ex_out, co.str(), out);
            if (!ex_contexts.empty()) emit(ex_contexts, ctx.str(), out);
            if (!ex_mentions.empty()) emit(ex_mentions, men.str(), out);
            if (!global.quiet) {
                // Summary goes to stderr when the stream itself is on stdout.
                std::ostream& s = ex_out.empty() || ex_out == "-" ? err : out;
                s << "posts: " << summary.posts << '\n'
                  << "mentions: " << summary.mentions << '\n'
                  << "co-mentions: " << summary.comentions << '\n'
                  << "disqualified contexts: " << summary.disqualified << '\n'
                  << "malformed records: " << summary.malformed << '\n';
            }
        } else if (*graph) {
            const Inputs in = load_inputs(gr_in, global, err);
            if (gr_format != "csv" && gr.bucket.empty()) {
                throw InvalidArgument("--format " + gr_format + " needs --bucket");
            }
            if (gr_format != "csv" && !gr_nodes.empty()) throw InvalidArgument("--nodes applies to csv output only");
            std::vector<WeightedGraph> graphs;
            if (!gr.bucket.empty()) {
                graphs.push_back(single_graph(in, gr));
            } else {
                graphs = graphs_in_range(in, gr);
            }
            std::string doc;
            std::string nodes;
            if (gr_format == "graphml") {
                doc = to_graphml(graphs.front());
            } else if (gr_format == "dot") {
                doc = to_dot(graphs.front());
            } else {
                for (std::size_t i = 0; i < graphs.size(); ++i) {
                    doc += to_edge_csv(graphs[i], i == 0);
                    nodes += to_node_csv(graphs[i], i == 0);
                }
                if (graphs.empty()) {
                    doc = "bucket,a,b,weight\n";
                    nodes = "bucket,entity,mention_count\n";
                }
            }
            emit(gr_out, doc, out);
            if (!gr_nodes.empty()) emit(gr_nodes, nodes, out);
        } else if (*measures) {
            const Inputs in = load_inputs(me_in, global, err);
            SeriesOptions so;
            so.granularity = parse_granularity(me.granularity);
            so.threshold = me.threshold;
            so.node_policy = parse_node_policy(me.node_policy);
            so.first = range_end(me.from, so.granularity, "--from");
            so.last = range_end(me.to, so.granularity, "--to");
            const auto records = measure_series(in.comentions, in.contexts, in.lexicon, so);
            emit(me_out, measures_csv(records), out);
            if (!me_per_node.empty()) emit(me_per_node, per_node_csv(records), out);
        } else if (*layout) {
            const Inputs in = load_inputs(la_in, global, err);
            const WeightedGraph g = single_graph(in, la);
            emit(la_out, layout_to_json(compute_layout(g, la_seed, la_iterations, la_gravity)).dump(2) + "\n", out);
        } else if (*render) {
            const Inputs in = load_inputs(re_in, global, err);
            const WeightedGraph g = single_graph(in, re);
            LayoutResult positions;
            if (!re_layout.empty()) {
                auto s = open_in(re_layout);
                positions = layout_from_json(nlohmann::json::parse(s));
            } else if (g.node_count() > 0) {
                positions = compute_layout(g, re_seed, re_iterations, re_gravity);
            }
            emit(re_svg, render_svg(g, positions, spec, &in.lexicon), out);
        } else if (*bundle) {
            auto corpus = open_in(bu_in.corpus);
            const Lexicon lexicon = read_lexicon(bu_in.lexicon);
            CorpusReader reader(corpus, global.mode());
            ExtractOptions opts;
            opts.max_distinct = bu_in.max_distinct;
            opts.threads = bu_in.threads;
            const AnalysisBundle b = build_bundle(reader, lexicon, parse_granularity(bu_granularity), opts);
            report_issues(reader, global, err);
            write_bundle(b, bu_out);
            if (!global.quiet) {
                out << "buckets: " << b.bucket_labels().size() << '\n'
                    << "co-mentions: " << b.comentions.size() << '\n'
                    << "posts indexed: " << b.posts.size() << '\n';
            }
        } else if (*serve) {
            ServiceOptions so;
            so.seed = se_seed;
            const ExplorerService service(load_bundle(se_bundle), so);
            std::optional<std::filesystem::path> static_dir;
            if (!se_static.empty()) static_dir = se_static;
            HttpServer server(service, se_origin, static_dir);
            const int port = server.bind(se_host, se_port);
            if (!global.quiet) out << "listening on http://" << se_host << ':' << port << std::endl;
            server.listen();
        }
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}

}  // namespace comention
