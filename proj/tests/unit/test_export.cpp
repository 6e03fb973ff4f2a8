#include "comention/csv.hpp"
#include "comention/error.hpp"
#include "comention/export.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <cmath>
#include <regex>
#include <sstream>

using namespace comention;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

WeightedGraph labelled(std::string bucket, WeightedGraph::NodeMap nodes, WeightedGraph::EdgeMap edges) {
    return WeightedGraph(parse_bucket_key(bucket), std::move(nodes), std::move(edges));
}

}  // namespace

TEST_CASE("GraphML structure") {
    const auto g = labelled("2008Q4", {{"a", 3}, {"b", 1}}, {{EntityPair("a", "b"), 2}});
    const auto doc = to_graphml(g);
    CHECK(count(doc, "<node ") == 2);
    CHECK(count(doc, "<edge ") == 1);
    CHECK(doc.find("attr.name=\"weight\"") != std::string::npos);
    CHECK(doc.find("attr.name=\"mention_count\"") != std::string::npos);
    CHECK(doc.find("<graph id=\"2008Q4\"") != std::string::npos);
    CHECK(doc.find("<node id=\"a\"") < doc.find("<node id=\"b\""));

    // Well-formed XML for an independent parser.
    boost::property_tree::ptree tree;
    std::istringstream in(doc);
    CHECK_NOTHROW(boost::property_tree::read_xml(in, tree));

    const auto empty = to_graphml(WeightedGraph{});
    CHECK(count(empty, "<node ") == 0);
    CHECK(parse_graphml(empty) == WeightedGraph{});
}

TEST_CASE("GraphML round-trip") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 30; ++i) {
        const auto base = fixtures::random_graph(rng, 1 + i % 9, 0.5, 50);
        const auto g = WeightedGraph(parse_bucket_key(i % 2 ? "2009-03" : "all"), base.nodes(), base.edges());
        const auto doc = to_graphml(g);
        const auto back = parse_graphml(doc);
        CHECK(back == g);
        CHECK(to_graphml(back) == doc);
    }
    const auto odd = labelled("all", {{"a&b", 1}, {"<c>", 2}, {"\"d\"", 0}}, {{EntityPair("a&b", "<c>"), 4}});
    CHECK(parse_graphml(to_graphml(odd)) == odd);
}

TEST_CASE("GraphML parse errors") {
    CHECK_THROWS_AS(parse_graphml("<nope/>"), DataError);
    CHECK_THROWS_AS(parse_graphml("<graphml><graph id=\"all\"><edge source=\"a\" target=\"b\"/></graph></graphml>"),
                    DataError);
    CHECK_THROWS_AS(parse_graphml("<graphml"), DataError);
    CHECK_THROWS_AS(parse_graphml("<graphml><graph id=\"all\"><node id=\"a\"/><edge source=\"a\" target=\"b\">"
                                  "<data key=\"weight\">1</data></edge></graph></graphml>"),
                    DataError);
}

TEST_CASE("DOT output") {
    const auto g = labelled("2010", {{"a", 1}, {"b", 2}}, {{EntityPair("a", "b"), 5}});
    const auto dot = to_dot(g);
    CHECK(count(dot, " -- ") == 1);
    CHECK(dot.find("weight=5") != std::string::npos);
    CHECK(dot.rfind("graph \"2010\" {", 0) == 0);
    CHECK(to_dot(g) == dot);
}

TEST_CASE("edge and node CSV") {
    const auto g = labelled("2008Q4", {{"a", 1}, {"b,x", 2}, {"c", 0}},
                           {{EntityPair("a", "b,x"), 5}, {EntityPair("a", "c"), 1}});
    const auto edges = to_edge_csv(g);
    CHECK(edges == "bucket,a,b,weight\n2008Q4,a,\"b,x\",5\n2008Q4,a,c,1\n");
    CHECK(to_edge_csv(g, false) == "2008Q4,a,\"b,x\",5\n2008Q4,a,c,1\n");
    CHECK(to_node_csv(g) == "bucket,entity,mention_count\n2008Q4,a,1\n2008Q4,\"b,x\",2\n2008Q4,c,0\n");
    const auto back = parse_graph_csv(edges, to_node_csv(g));
    REQUIRE(back.size() == 1);
    CHECK(back.at("2008Q4") == g);
    CHECK_THROWS_AS(parse_graph_csv("bucket,a,b,weight\nall,a,b\n", ""), DataError);
    CHECK_THROWS_AS(parse_graph_csv("bucket,a,b,weight\nall,a,b,1\n", "bucket,entity,mention_count\nall,a,1\n"),
                    DataError);
}

TEST_CASE("CSV helpers") {
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(parse_csv_line("a,\"b,c\",\"d \"\"e\"\"\",") == std::vector<std::string>{"a", "b,c", "d \"e\"", ""});
    CHECK(format_real(1.0 / 3.0) == "0.333333333");
    CHECK(format_real(-0.0) == "0");
    CHECK(format_real(2.0) == "2");
    CHECK(format_real(1e-12) == "1e-12");
}

TEST_CASE("edge darkness is log scaled") {
    CHECK(std::abs(edge_darkness(1, 99) - std::log(2.0) / std::log(100.0)) <= 1e-12);
    CHECK(std::abs(edge_darkness(9, 99) - 0.5) <= 1e-12);
    CHECK(edge_darkness(99, 99) == 1.0);
    CHECK(edge_darkness(0, 0) == 0.0);
    for (std::uint64_t w = 1; w < 99; ++w) CHECK(edge_darkness(w, 99) < edge_darkness(w + 1, 99));
}

TEST_CASE("node radius") {
    RenderSpec s;
    CHECK(node_radius(0, 0, s) == s.min_radius);
    CHECK(node_radius(10, 10, s) == s.max_radius);
    CHECK(node_radius(25, 100, s) == doctest::Approx(s.min_radius + 0.5 * (s.max_radius - s.min_radius)));
    s.linear_radius = true;
    CHECK(node_radius(25, 100, s) == doctest::Approx(s.min_radius + 0.25 * (s.max_radius - s.min_radius)));
}

TEST_CASE("SVG snapshot") {
    const auto lex = fixtures::bank_lexicon();
    const WeightedGraph g(std::nullopt, {{"aktia", 1}, {"nordea", 9}, {"op", 4}, {"danske", 0}},
                          {{EntityPair("aktia", "nordea"), 1}, {EntityPair("nordea", "op"), 9},
                           {EntityPair("aktia", "op"), 99}});
    const auto layout = fr_layout(g);
    const auto svg = render_svg(g, layout, RenderSpec{}, &lex);
    CHECK(count(svg, "<circle ") == 4);
    CHECK(count(svg, "<line ") == 3);
    CHECK(svg.find(">Nordea</text>") != std::string::npos);
    CHECK(svg.find(">Danske Bank</text>") != std::string::npos);
    CHECK(svg.find("stroke=\"rgb(0,0,0)\" data-weight=\"99\"") != std::string::npos);
    CHECK(svg == render_svg(g, layout, RenderSpec{}, &lex));

    const std::regex darkness("data-weight=\"(\\d+)\" data-darkness=\"([^\"]+)\"");
    std::map<int, double> seen;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), darkness); it != std::sregex_iterator(); ++it) {
        seen[std::stoi((*it)[1])] = std::stod((*it)[2]);
    }
    CHECK(std::abs(seen.at(1) - std::log(2.0) / std::log(100.0)) <= 1e-8);
    CHECK(std::abs(seen.at(9) - 0.5) <= 1e-8);
    CHECK(seen.at(99) == 1.0);

    const WeightedGraph uniform(std::nullopt, {{"a", 1}, {"b", 1}, {"c", 1}},
                                {{EntityPair("a", "b"), 4}, {EntityPair("b", "c"), 4}});
    const auto u = render_svg(uniform, fr_layout(uniform), RenderSpec{});
    CHECK(count(u, "stroke=\"rgb(0,0,0)\"") == 2);
    CHECK(u.find(">a</text>") != std::string::npos);

    LayoutResult partial = layout;
    partial.positions.erase("op");
    CHECK_THROWS_AS(render_svg(g, partial, RenderSpec{}), InvalidArgument);
    RenderSpec bad;
    bad.min_radius = bad.max_radius;
    CHECK_THROWS_AS(render_svg(g, layout, bad), InvalidArgument);
    bad = RenderSpec{};
    bad.width = 0;
    CHECK_THROWS_AS(render_svg(g, layout, bad), InvalidArgument);
}

TEST_CASE("xml_escape") { CHECK(xml_escape("a<b>&\"'") == "a&lt;b&gt;&amp;&quot;&apos;"); }
