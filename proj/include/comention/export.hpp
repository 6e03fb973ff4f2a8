#pragma once

// Graph serializers (GraphML, DOT, CSV) and the SVG snapshot renderer.

#include "comention/ingest.hpp"
#include "comention/layout.hpp"
#include "comention/network.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>

namespace comention {

std::string to_graphml(const WeightedGraph& g);
// Reads documents produced by to_graphml. Throws DataError otherwise.
WeightedGraph parse_graphml(std::string_view document);

std::string to_dot(const WeightedGraph& g);

// `bucket,a,b,weight`, rows in canonical pair order.
std::string to_edge_csv(const WeightedGraph& g, bool header = true);
// `bucket,entity,mention_count`, rows in entity order.
std::string to_node_csv(const WeightedGraph& g, bool header = true);

// Rebuilds graphs from the two CSV documents, keyed by bucket label.
std::map<std::string, WeightedGraph> parse_graph_csv(std::string_view edge_csv, std::string_view node_csv);

struct RenderSpec {
    double width = 900.0;
    double height = 900.0;
    double min_radius = 4.0;
    double max_radius = 22.0;
    // Stroke gray levels (0 = black, 255 = white) for the weakest and the
    // strongest edge.
    int light_gray = 225;
    int dark_gray = 0;
    bool linear_radius = false;  // radius instead of area proportional to mentions
    double font_size = 11.0;
};

// log(1 + w) / log(1 + w_max); 0 when w_max is 0.
double edge_darkness(std::uint64_t weight, std::uint64_t max_weight);

double node_radius(std::uint64_t mentions, std::uint64_t max_mentions, const RenderSpec& spec);

// One circle per node, one line per edge, display-name labels (ids when the
// lexicon lacks the entity). Throws InvalidArgument for a node without a
// position or an invalid spec.
std::string render_svg(const WeightedGraph& g, const LayoutResult& layout, const RenderSpec& spec,
                       const Lexicon* lexicon = nullptr);

std::string xml_escape(std::string_view text);

}  // namespace comention
