#include "comention/export.hpp"

#include "comention/csv.hpp"
#include "comention/error.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>

namespace comention {

std::string xml_escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string to_graphml(const WeightedGraph& g) {
    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n";
    out += "  <key id=\"mention_count\" for=\"node\" attr.name=\"mention_count\" attr.type=\"long\"/>\n";
    out += "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"long\"/>\n";
    out += "  <graph id=\"" + xml_escape(bucket_label(g.bucket())) + "\" edgedefault=\"undirected\">\n";
    for (const auto& [id, m] : g.nodes()) {
        out += "    <node id=\"" + xml_escape(id) + "\"><data key=\"mention_count\">" + std::to_string(m) +
               "</data></node>\n";
    }
    for (const auto& [pair, w] : g.edges()) {
        out += "    <edge source=\"" + xml_escape(pair.a()) + "\" target=\"" + xml_escape(pair.b()) +
               "\"><data key=\"weight\">" + std::to_string(w) + "</data></edge>\n";
    }
    out += "  </graph>\n</graphml>\n";
    return out;
}

namespace {

std::uint64_t parse_count(const std::string& text, const char* what) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw DataError(std::string("invalid ") + what + " '" + text + "'");
    }
}

}  // namespace

WeightedGraph parse_graphml(std::string_view document) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in{std::string(document)};
        pt::read_xml(in, tree);
    } catch (const pt::xml_parser_error& e) {
        throw DataError(std::string("GraphML: ") + e.what());
    }
    const auto root = tree.get_child_optional("graphml");
    if (!root) throw DataError("GraphML: missing <graphml> root");

    std::map<std::string, std::string> key_names;  // key id -> attr.name
    const pt::ptree* graph = nullptr;
    for (const auto& [tag, child] : *root) {
        if (tag == "key") {
            key_names[child.get<std::string>("<xmlattr>.id", "")] = child.get<std::string>(pt::ptree::path_type("<xmlattr>/attr.name", '/'), "");
        } else if (tag == "graph") {
            if (graph) throw DataError("GraphML: more than one <graph>");
            graph = &child;
        }
    }
    if (!graph) throw DataError("GraphML: missing <graph>");

    auto data_value = [&](const pt::ptree& element, const std::string& name) -> std::optional<std::string> {
        for (const auto& [tag, d] : element) {
            if (tag != "data") continue;
            const auto key = d.get<std::string>("<xmlattr>.key", "");
            if (key_names.count(key) ? key_names[key] == name : key == name) return d.get_value<std::string>();
        }
        return std::nullopt;
    };

    WeightedGraph::NodeMap nodes;
    WeightedGraph::EdgeMap edges;
    for (const auto& [tag, child] : *graph) {
        if (tag == "node") {
            const auto id = child.get<std::string>("<xmlattr>.id");
            const auto m = data_value(child, "mention_count");
            nodes[id] = m ? parse_count(*m, "mention_count") : 0;
        } else if (tag == "edge") {
            const auto w = data_value(child, "weight");
            if (!w) throw DataError("GraphML: edge without weight");
            EntityPair pair(child.get<std::string>("<xmlattr>.source"), child.get<std::string>("<xmlattr>.target"));
            edges[pair] = parse_count(*w, "weight");
        }
    }
    const auto label = graph->get<std::string>("<xmlattr>.id", "all");
    try {
        return WeightedGraph(parse_bucket_key(label), std::move(nodes), std::move(edges));
    } catch (const InvalidArgument& e) {
        throw DataError(std::string("GraphML: ") + e.what());
    }
}

namespace {

std::string dot_id(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string to_dot(const WeightedGraph& g) {
    std::string out = "graph " + dot_id(bucket_label(g.bucket())) + " {\n";
    for (const auto& [id, m] : g.nodes()) {
        out += "  " + dot_id(id) + " [mention_count=" + std::to_string(m) + "];\n";
    }
    for (const auto& [pair, w] : g.edges()) {
        out += "  " + dot_id(pair.a()) + " -- " + dot_id(pair.b()) + " [weight=" + std::to_string(w) + "];\n";
    }
    out += "}\n";
    return out;
}

std::string to_edge_csv(const WeightedGraph& g, bool header) {
    std::string out = header ? "bucket,a,b,weight\n" : "";
    const std::string bucket = csv_field(bucket_label(g.bucket()));
    for (const auto& [pair, w] : g.edges()) {
        out += bucket + ',' + csv_field(pair.a()) + ',' + csv_field(pair.b()) + ',' + std::to_string(w) + '\n';
    }
    return out;
}

std::string to_node_csv(const WeightedGraph& g, bool header) {
    std::string out = header ? "bucket,entity,mention_count\n" : "";
    const std::string bucket = csv_field(bucket_label(g.bucket()));
    for (const auto& [id, m] : g.nodes()) out += bucket + ',' + csv_field(id) + ',' + std::to_string(m) + '\n';
    return out;
}

std::map<std::string, WeightedGraph> parse_graph_csv(std::string_view edge_csv, std::string_view node_csv) {
    std::map<std::string, std::pair<WeightedGraph::NodeMap, WeightedGraph::EdgeMap>> parts;
    auto for_rows = [](std::string_view doc, std::string_view header, std::size_t columns, auto&& fn) {
        std::istringstream in{std::string(doc)};
        std::string line;
        bool first = true;
        while (std::getline(in, line)) {
            if (first) {
                first = false;
                if (!line.empty() && line.back() == '\r') line.pop_back();
                if (line == header) continue;
            }
            if (line.empty()) continue;
            auto fields = parse_csv_line(line);
            if (fields.size() != columns) throw DataError("CSV row has wrong column count: " + line);
            fn(fields);
        }
    };
    for_rows(node_csv, "bucket,entity,mention_count", 3, [&](const std::vector<std::string>& f) {
        parts[f[0]].first[f[1]] = parse_count(f[2], "mention_count");
    });
    for_rows(edge_csv, "bucket,a,b,weight", 4, [&](const std::vector<std::string>& f) {
        parts[f[0]].second[EntityPair(f[1], f[2])] = parse_count(f[3], "weight");
    });
    std::map<std::string, WeightedGraph> out;
    for (auto& [label, p] : parts) {
        try {
            out.emplace(label, WeightedGraph(parse_bucket_key(label), std::move(p.first), std::move(p.second)));
        } catch (const InvalidArgument& e) {
            throw DataError("graph CSV for bucket " + label + ": " + e.what());
        }
    }
    return out;
}

double edge_darkness(std::uint64_t weight, std::uint64_t max_weight) {
    if (max_weight == 0) return 0.0;
    return std::log1p(static_cast<double>(weight)) / std::log1p(static_cast<double>(max_weight));
}

double node_radius(std::uint64_t mentions, std::uint64_t max_mentions, const RenderSpec& spec) {
    if (max_mentions == 0) return spec.min_radius;
    const double share = static_cast<double>(mentions) / static_cast<double>(max_mentions);
    const double scale = spec.linear_radius ? share : std::sqrt(share);
    return spec.min_radius + (spec.max_radius - spec.min_radius) * scale;
}

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

std::string render_svg(const WeightedGraph& g, const LayoutResult& layout, const RenderSpec& spec,
                       const Lexicon* lexicon) {
    if (!(spec.min_radius < spec.max_radius)) throw InvalidArgument("render spec: min radius must be below max radius");
    if (!(spec.width > 0.0) || !(spec.height > 0.0)) throw InvalidArgument("render spec: canvas must be positive");

    const double margin = spec.max_radius + 2.0;
    auto place = [&](const std::string& id) {
        auto it = layout.positions.find(id);
        if (it == layout.positions.end()) throw InvalidArgument("render_svg: no position for '" + id + "'");
        return Point{margin + it->second.x * (spec.width - 2.0 * margin),
                     margin + (1.0 - it->second.y) * (spec.height - 2.0 * margin)};
    };
    auto label_of = [&](const std::string& id) -> std::string {
        if (lexicon) {
            if (const Entity* e = lexicon->find(id)) return e->display_name();
        }
        return id;
    };

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(spec.width) + "\" height=\"" +
           num(spec.height) + "\" viewBox=\"0 0 " + num(spec.width) + " " + num(spec.height) + "\">\n";
    out += "  <title>" + xml_escape(bucket_label(g.bucket())) + "</title>\n";
    out += "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    const std::uint64_t w_max = g.max_weight();
    out += "  <g id=\"edges\" stroke-width=\"1.5\" stroke-linecap=\"round\">\n";
    for (const auto& [pair, w] : g.edges()) {
        const Point p = place(pair.a());
        const Point q = place(pair.b());
        const double f = edge_darkness(w, w_max);
        const long gray = std::lround(spec.light_gray + (spec.dark_gray - spec.light_gray) * f);
        const std::string shade = std::to_string(gray);
        out += "    <line x1=\"" + num(p.x) + "\" y1=\"" + num(p.y) + "\" x2=\"" + num(q.x) + "\" y2=\"" + num(q.y) +
               "\" stroke=\"rgb(" + shade + "," + shade + "," + shade + ")\" data-weight=\"" + std::to_string(w) +
               "\" data-darkness=\"" + format_real(f) + "\"><title>" + xml_escape(label_of(pair.a())) + " -- " +
               xml_escape(label_of(pair.b())) + ": " + std::to_string(w) + "</title></line>\n";
    }
    out += "  </g>\n";

    const std::uint64_t m_max = g.max_mention_count();
    out += "  <g id=\"nodes\" fill=\"#5b8cc9\" stroke=\"#1d3f66\" stroke-width=\"1\">\n";
    for (const auto& [id, m] : g.nodes()) {
        const Point p = place(id);
        out += "    <circle cx=\"" + num(p.x) + "\" cy=\"" + num(p.y) + "\" r=\"" + num(node_radius(m, m_max, spec)) +
               "\" data-entity=\"" + xml_escape(id) + "\"><title>" + xml_escape(label_of(id)) + ": " +
               std::to_string(m) + "</title></circle>\n";
    }
    out += "  </g>\n";

    out += "  <g id=\"labels\" font-family=\"sans-serif\" font-size=\"" + num(spec.font_size) +
           "\" text-anchor=\"middle\" fill=\"#222\">\n";
    for (const auto& [id, m] : g.nodes()) {
        const Point p = place(id);
        const double dy = node_radius(m, m_max, spec) + spec.font_size;
        out += "    <text x=\"" + num(p.x) + "\" y=\"" + num(p.y + dy) + "\">" + xml_escape(label_of(id)) + "</text>\n";
    }
    out += "  </g>\n</svg>\n";
    return out;
}

}  // namespace comention
