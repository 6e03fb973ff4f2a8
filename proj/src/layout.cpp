#include "comention/layout.hpp"

#include "comention/error.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace comention {

namespace {

constexpr double kMinDistance = 1e-9;
constexpr double kInitialTemperature = 0.1;

void require_finite(const std::vector<Point>& pos, int iteration) {
    for (const auto& p : pos) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw NumericError("fr_layout: non-finite coordinate at iteration " + std::to_string(iteration));
        }
    }
}

void rescale_into_unit_square(std::vector<Point>& pos) {
    double min_x = pos.front().x, max_x = min_x;
    double min_y = pos.front().y, max_y = min_y;
    for (const auto& p : pos) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const double w = max_x - min_x;
    const double h = max_y - min_y;
    const double extent = std::max(w, h);
    if (extent < 1e-12) {
        for (auto& p : pos) p = {0.5, 0.5};
        return;
    }
    const double scale = 1.0 / extent;
    const double off_x = (1.0 - w * scale) / 2.0;
    const double off_y = (1.0 - h * scale) / 2.0;
    for (auto& p : pos) {
        p.x = std::clamp((p.x - min_x) * scale + off_x, 0.0, 1.0);
        p.y = std::clamp((p.y - min_y) * scale + off_y, 0.0, 1.0);
    }
}

}  // namespace

LayoutResult fr_layout(const WeightedGraph& g, const LayoutOptions& options) {
    if (g.node_count() == 0) throw InvalidArgument("fr_layout: graph has no nodes");
    if (options.iterations < 1) throw InvalidArgument("fr_layout: iterations must be at least 1");

    const std::size_t n = g.node_count();
    std::vector<std::string> ids;
    ids.reserve(n);
    std::map<std::string_view, std::size_t> index;
    for (const auto& [id, m] : g.nodes()) {
        index.emplace(id, ids.size());
        ids.push_back(id);
    }
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    edges.reserve(g.edge_count());
    for (const auto& [pair, w] : g.edges()) edges.emplace_back(index.at(pair.a()), index.at(pair.b()));

    SplitMix64 rng(options.seed);
    std::vector<Point> pos(n);
    for (auto& p : pos) {
        p.x = rng.next_unit();
        p.y = rng.next_unit();
    }

    const double k = std::sqrt(1.0 / static_cast<double>(n));
    const double k2 = k * k;
    std::vector<Point> disp(n);

    for (int it = 0; it < options.iterations; ++it) {
        const double temperature =
            kInitialTemperature * (1.0 - static_cast<double>(it) / static_cast<double>(options.iterations));
        std::fill(disp.begin(), disp.end(), Point{});

        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                double dx = pos[i].x - pos[j].x;
                double dy = pos[i].y - pos[j].y;
                double d = std::sqrt(dx * dx + dy * dy);
                if (d < kMinDistance) {
                    dx = kMinDistance;
                    dy = 0.0;
                    d = kMinDistance;
                }
                const double f = k2 / d;
                disp[i].x += dx / d * f;
                disp[i].y += dy / d * f;
                disp[j].x -= dx / d * f;
                disp[j].y -= dy / d * f;
            }
        }

        for (const auto& [u, v] : edges) {
            const double dx = pos[u].x - pos[v].x;
            const double dy = pos[u].y - pos[v].y;
            const double d = std::sqrt(dx * dx + dy * dy);
            if (d < kMinDistance) continue;
            const double f = d * d / k;
            disp[u].x -= dx / d * f;
            disp[u].y -= dy / d * f;
            disp[v].x += dx / d * f;
            disp[v].y += dy / d * f;
        }

        if (options.gravity > 0.0) {
            Point c;
            for (const auto& p : pos) {
                c.x += p.x;
                c.y += p.y;
            }
            c.x /= static_cast<double>(n);
            c.y /= static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double dx = c.x - pos[i].x;
                const double dy = c.y - pos[i].y;
                const double d = std::sqrt(dx * dx + dy * dy);
                if (d < kMinDistance) continue;
                const double f = options.gravity * d * d / k;
                disp[i].x += dx / d * f;
                disp[i].y += dy / d * f;
            }
        }

        for (std::size_t i = 0; i < n; ++i) {
            const double len = std::sqrt(disp[i].x * disp[i].x + disp[i].y * disp[i].y);
            if (len <= 0.0) continue;
            const double step = std::min(len, temperature);
            pos[i].x += disp[i].x / len * step;
            pos[i].y += disp[i].y / len * step;
        }
        require_finite(pos, it);
    }

    rescale_into_unit_square(pos);

    LayoutResult result;
    result.seed = options.seed;
    result.iterations = options.iterations;
    for (std::size_t i = 0; i < n; ++i) result.positions.emplace(ids[i], pos[i]);
    return result;
}

LayoutEnergy layout_energy_terms(const WeightedGraph& g, const std::map<std::string, Point>& positions) {
    LayoutEnergy e;
    if (g.node_count() == 0) return e;
    const double k = std::sqrt(1.0 / static_cast<double>(g.node_count()));
    auto at = [&](const std::string& id) -> const Point& {
        auto it = positions.find(id);
        if (it == positions.end()) throw InvalidArgument("layout_energy: no position for '" + id + "'");
        return it->second;
    };
    auto dist = [](const Point& p, const Point& q) { return std::hypot(p.x - q.x, p.y - q.y); };

    for (auto i = g.nodes().begin(); i != g.nodes().end(); ++i) {
        const Point& p = at(i->first);
        for (auto j = std::next(i); j != g.nodes().end(); ++j) {
            e.repulsive += -k * k * std::log(dist(p, at(j->first)));
        }
    }
    for (const auto& [pair, w] : g.edges()) {
        const double d = dist(at(pair.a()), at(pair.b()));
        e.attractive += d * d * d / (3.0 * k);
    }
    return e;
}

double layout_energy(const WeightedGraph& g, const std::map<std::string, Point>& positions) {
    return layout_energy_terms(g, positions).total();
}

nlohmann::json layout_to_json(const LayoutResult& layout) {
    nlohmann::json positions = nlohmann::json::object();
    for (const auto& [id, p] : layout.positions) positions[id] = {p.x, p.y};
    return {{"seed", layout.seed}, {"iterations", layout.iterations}, {"positions", positions}};
}

LayoutResult layout_from_json(const nlohmann::json& j) {
    LayoutResult out;
    out.seed = j.at("seed").get<std::uint64_t>();
    out.iterations = j.at("iterations").get<int>();
    for (const auto& [id, xy] : j.at("positions").items()) {
        out.positions.emplace(id, Point{xy.at(0).get<double>(), xy.at(1).get<double>()});
    }
    return out;
}

}  // namespace comention
