#include "comention/error.hpp"
#include "comention/export.hpp"
#include "comention/service.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>
#include <httplib.h>

#include <thread>

using namespace comention;
using fixtures::make_post;
namespace fs = std::filesystem;

namespace {

const AnalysisBundle& planted_bundle() {
    static const AnalysisBundle b = build_bundle(fixtures::planted_corpus(250, 41).plain(), fixtures::bank_lexicon(),
                                                 Granularity::quarter);
    return b;
}

nlohmann::json get(const ExplorerService& s, std::string_view path, QueryParams q = {}, int status = 200) {
    const auto r = s.handle(path, q);
    CHECK(r.status == status);
    return nlohmann::json::parse(r.body);
}

// Four posts co-mention nordea and op, one more mentions only nordea.
AnalysisBundle small_bundle() {
    const std::vector<Post> posts = {
        make_post("p1", "2008-10-01T10:00:00Z", "Nordea ja OP tänään"),
        make_post("p2", "2008-11-01T10:00:00Z", "OP:n ja Nordean kriisi"),
        make_post("p3", "2009-01-05T10:00:00Z", "Nordea, Nordea ja Pohjola"),
        make_post("p4", "2009-02-01T10:00:00Z", "Pohjolan ja Nordeassa"),
        make_post("p5", "2009-02-02T10:00:00Z", "Nordea yksin"),
    };
    return build_bundle(posts, fixtures::bank_lexicon(), Granularity::quarter);
}

}  // namespace

TEST_CASE("bundle edge totals match the counting oracle") {
    const auto corpus = fixtures::planted_corpus(250, 41);
    const auto truth = oracles::count_truth(corpus, kDefaultMaxDistinct);
    const auto& b = planted_bundle();
    std::map<oracles::Pair, std::uint64_t> all;
    for (const auto& [pair, w] : b.graphs.at("all").edges()) all[{pair.a(), pair.b()}] = w;
    CHECK(all == truth.pair_counts);
    for (const auto& [bucket, pairs] : b.index) {
        const auto& g = b.graphs.at(to_string(bucket));
        for (const auto& [pair, ids] : pairs) CHECK(ids.size() == g.weight(pair.a(), pair.b()));
    }
    CHECK(b.bucket_labels().size() == 12);
    CHECK(b.measures.size() == 12);
}

TEST_CASE("bundle files round-trip and rebuild byte-identically") {
    const auto& b = planted_bundle();
    const auto one = fixtures::scratch_dir("bundle-one");
    const auto two = fixtures::scratch_dir("bundle-two");
    write_bundle(b, one);
    write_bundle(build_bundle(fixtures::planted_corpus(250, 41).plain(), fixtures::bank_lexicon(), Granularity::quarter),
                 two);
    std::size_t files = 0;
    for (const auto& entry : fs::recursive_directory_iterator(one)) {
        if (!entry.is_regular_file()) continue;
        ++files;
        const auto rel = fs::relative(entry.path(), one);
        CAPTURE(rel.string());
        CHECK(fixtures::read_text(entry.path()) == fixtures::read_text(two / rel));
    }
    CHECK(files == 9 + 2 * 13);

    const auto loaded = load_bundle(one);
    CHECK(loaded.lexicon == b.lexicon);
    CHECK(loaded.graphs == b.graphs);
    CHECK(loaded.index == b.index);
    CHECK(loaded.posts == b.posts);
    CHECK(loaded.mentions == b.mentions);
    CHECK(loaded.comentions == b.comentions);
    CHECK(loaded.contexts == b.contexts);
    CHECK(loaded.measures == b.measures);

    // A tampered index no longer agrees with the stored edge weights.
    auto index = nlohmann::json::parse(fixtures::read_text(one / "index.json"));
    auto& rows = index.begin().value();
    rows[0]["posts"].push_back(rows[0]["posts"][0]);
    fixtures::write_text(one / "index.json", index.dump());
    CHECK_THROWS_AS(load_bundle(one), DataError);
    CHECK_THROWS_AS(load_bundle(one / "missing"), DataError);
}

TEST_CASE("empty corpus gives a valid bundle") {
    const auto b = build_bundle(std::vector<Post>{}, fixtures::bank_lexicon(), Granularity::quarter);
    CHECK(b.bucket_labels().empty());
    CHECK(b.graphs.at("all").node_count() == 8);
    const auto dir = fixtures::scratch_dir("bundle-empty");
    write_bundle(b, dir);
    const auto loaded = load_bundle(dir);
    CHECK(loaded.graphs == b.graphs);
    const ExplorerService s(loaded);
    CHECK(get(s, "/buckets")["buckets"].empty());
    CHECK(get(s, "/graph", {{"bucket", "all"}})["edges"].empty());
}

TEST_CASE("context samples") {
    const Post post = make_post("p", "2008-10-01T10:00:00Z", "ääää Nordea " + std::string(300, 'x') + " OP ja Nordea");
    const auto lex = fixtures::bank_lexicon();
    const auto ms = scan_post(post, lex);
    const auto s = make_context_sample(post, ms, "nordea", "op", 10);
    CHECK(s.clipped_start);
    CHECK_FALSE(s.clipped_end);
    REQUIRE(s.spans.size() == 2);
    const DecodedText ex(s.excerpt);
    for (const auto& sp : s.spans) {
        std::string surface = s.excerpt.substr(ex.offset(sp.start), ex.offset(sp.end) - ex.offset(sp.start));
        CHECK((surface == "OP" || surface == "Nordea"));
    }
    const auto whole = make_context_sample(post, ms, "nordea", "op", 1000);
    CHECK(whole.excerpt == post.text);
    CHECK(whole.spans.size() == 3);
    CHECK(whole.spans[0].start == 5);
    CHECK(whole.spans[0].end == 11);
    CHECK_THROWS_AS(make_context_sample(post, ms, "nordea", "aktia"), DataError);
}

TEST_CASE("API endpoints") {
    const ExplorerService s(small_bundle());

    const auto entities = get(s, "/entities")["entities"];
    CHECK(entities.size() == 8);
    CHECK(entities[0]["id"] == "aktia");
    for (const auto& e : entities) {
        if (e["id"] == "nordea") CHECK(e["mention_count"] == 5);
        if (e["id"] == "fiva") CHECK(e["kind"] == "supervisor");
    }

    const auto buckets = get(s, "/buckets");
    CHECK(buckets["buckets"] == nlohmann::json::array({"2008Q4", "2009Q1"}));

    const auto contexts = get(s, "/contexts", {{"a", "op"}, {"b", "nordea"}});
    CHECK(contexts["total"] == 4);
    REQUIRE(contexts["samples"].size() == 4);
    CHECK(contexts["samples"][0]["post_id"] == "p4");
    CHECK(contexts["samples"][3]["post_id"] == "p1");
    CHECK(get(s, "/contexts", {{"a", "op"}, {"b", "nordea"}, {"limit", "2"}})["samples"].size() == 2);
    CHECK(get(s, "/contexts", {{"a", "op"}, {"b", "nordea"}, {"bucket", "2008Q4"}})["total"] == 2);
    const auto never = get(s, "/contexts", {{"a", "aktia"}, {"b", "nordea"}});
    CHECK(never["samples"].empty());
    get(s, "/contexts", {{"a", "zz"}, {"b", "nordea"}}, 404);
    get(s, "/contexts", {{"a", "op"}, {"b", "op"}}, 400);
    get(s, "/contexts", {{"a", "op"}}, 400);
    get(s, "/contexts", {{"a", "op"}, {"b", "nordea"}, {"limit", "-1"}}, 400);
    get(s, "/contexts", {{"a", "op"}, {"b", "nordea"}, {"bucket", "1999Q1"}}, 404);

    const auto graph = get(s, "/graph", {{"bucket", "2009Q1"}});
    CHECK(graph["nodes"].size() == 8);
    REQUIRE(graph["edges"].size() == 1);
    CHECK(graph["edges"][0]["weight"] == 2);
    CHECK(graph["edges"][0]["darkness"] == 1.0);
    for (const auto& n : graph["nodes"]) {
        CHECK(n["x"].get<double>() >= 0.0);
        CHECK(n["y"].get<double>() <= 1.0);
    }
    const auto high = get(s, "/graph", {{"bucket", "all"}, {"threshold", "5"}});
    CHECK(high["edges"].empty());
    CHECK(high["nodes"].size() == 8);
    CHECK(get(s, "/graph", {{"bucket", "all"}, {"node_policy", "mentioned"}})["nodes"].size() == 2);
    get(s, "/graph", {}, 400);
    get(s, "/graph", {{"bucket", "2007Q1"}}, 404);
    get(s, "/graph", {{"bucket", "all"}, {"threshold", "x"}}, 400);
    get(s, "/graph", {{"bucket", "all"}, {"node_policy", "odd"}}, 400);
    get(s, "/nowhere", {}, 404);

    const auto series = get(s, "/series");
    CHECK(series["records"].size() == 2);
    CHECK(get(s, "/series", {{"granularity", "year"}})["records"].size() == 2);
    CHECK(get(s, "/series", {{"granularity", "month"}})["records"].size() == 5);
    get(s, "/series", {{"granularity", "week"}}, 400);
}

TEST_CASE("API responses are pure and consistent with the stored graphs") {
    const auto& b = planted_bundle();
    const ExplorerService s(b);
    const QueryParams q{{"bucket", b.bucket_labels()[3]}, {"threshold", "1"}};
    const auto first = s.handle("/graph", q);
    CHECK(first.body == s.handle("/graph", q).body);
    const auto j = nlohmann::json::parse(first.body);
    const auto cut = apply_threshold(b.graphs.at(b.bucket_labels()[3]), 1);
    CHECK(j["edges"].size() == cut.edge_count());
    for (const auto& e : j["edges"]) CHECK(e["weight"] == cut.weight(e["a"], e["b"]));

    for (const auto& label : {std::string("all"), b.bucket_labels()[5]}) {
        const auto& g = b.graphs.at(label);
        for (const auto& [pair, w] : g.edges()) {
            const auto c = get(s, "/contexts", {{"a", pair.a()}, {"b", pair.b()}, {"bucket", label}, {"limit", "0"}});
            CHECK(c["samples"].size() == w);
            for (const auto& sample : c["samples"]) {
                std::set<std::string> ents;
                for (const auto& sp : sample["spans"]) ents.insert(sp["entity"]);
                CHECK(ents == std::set<std::string>{pair.a(), pair.b()});
            }
        }
    }
    const auto series = get(s, "/series");
    CHECK(series["records"].size() == b.measures.size());
}

TEST_CASE("HTTP round-trip") {
    const ExplorerService s(small_bundle());
    HttpServer server(s);
    const int port = server.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    std::thread t([&] { server.listen(); });
    httplib::Client client("127.0.0.1", port);
    client.set_connection_timeout(5);
    const auto r = client.Get("/contexts?a=nordea&b=op&limit=1");
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(r->get_header_value("Access-Control-Allow-Origin") == "*");
    CHECK(r->get_header_value("Content-Type") == "application/json");
    const auto body = nlohmann::json::parse(r->body);
    CHECK(body["total"] == 4);
    CHECK(body["samples"].size() == 1);
    const auto missing = client.Get("/graph?bucket=1900");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    server.stop();
    t.join();
}
