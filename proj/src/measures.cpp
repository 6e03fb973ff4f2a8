#include "comention/measures.hpp"

#include "comention/csv.hpp"
#include "comention/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace comention {

double density(const WeightedGraph& g) {
    const double n = static_cast<double>(g.node_count());
    if (g.node_count() < 2) return 0.0;
    return 2.0 * static_cast<double>(g.edge_count()) / (n * (n - 1.0));
}

double strength(const WeightedGraph& g, const std::string& node) {
    if (!g.has_node(node)) throw InvalidArgument("unknown node '" + node + "'");
    std::uint64_t sum = 0;
    for (const auto& [pair, w] : g.edges()) {
        if (pair.contains(node)) sum += w;
    }
    return static_cast<double>(sum);
}

namespace {

std::map<std::string, std::uint64_t> strengths(const WeightedGraph& g) {
    std::map<std::string, std::uint64_t> s;
    for (const auto& [id, m] : g.nodes()) s.emplace(id, 0);
    for (const auto& [pair, w] : g.edges()) {
        s[pair.a()] += w;
        s[pair.b()] += w;
    }
    return s;
}

}  // namespace

double avg_strength(const WeightedGraph& g) {
    if (g.node_count() == 0) throw InvalidArgument("average strength of an empty node set");
    std::uint64_t total = 0;
    for (const auto& [id, s] : strengths(g)) total += s;
    return static_cast<double>(total) / static_cast<double>(g.node_count());
}

EigenDecomposition eig_sym(const Matrix& input, const JacobiOptions& options) {
    if (!input.square()) throw InvalidArgument("eig_sym: matrix is not square");
    const std::size_t n = input.rows();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (input(i, j) != input(j, i)) throw InvalidArgument("eig_sym: matrix is not symmetric");
        }
    }

    Matrix a = input;
    Matrix v = Matrix::identity(n);
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) norm_sq += a(i, j) * a(i, j);
    }
    const double limit = options.tolerance * std::sqrt(norm_sq);

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j) s += a(i, j) * a(i, j);
            }
        }
        return std::sqrt(s);
    };

    int sweep = 0;
    double off = off_norm();
    while (off > limit) {
        if (sweep == options.max_sweeps) {
            throw NumericError("eig_sym: no convergence after " + std::to_string(sweep) +
                               " sweeps, off-diagonal norm " + format_real(off));
        }
        ++sweep;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                if (theta < 0.0) t = -t;
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = a(p, k) = c * akp - s * akq;
                    a(k, q) = a(q, k) = s * akp + c * akq;
                }
                a(p, p) -= t * apq;
                a(q, q) += t * apq;
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
        off = off_norm();
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

    EigenDecomposition out;
    out.values.reserve(n);
    out.vectors = Matrix(n, n);
    out.sweeps = sweep;
    for (std::size_t j = 0; j < n; ++j) {
        out.values.push_back(a(order[j], order[j]));
        for (std::size_t k = 0; k < n; ++k) out.vectors(k, j) = v(k, order[j]);
    }
    return out;
}

std::map<std::string, double> communicability(const WeightedGraph& g) {
    const Adjacency adj = binarize(g);
    const std::size_t n = adj.nodes.size();

    // connected components, labelled in node order
    std::vector<std::size_t> component(n, n);
    std::vector<std::vector<std::size_t>> members;
    for (std::size_t root = 0; root < n; ++root) {
        if (component[root] != n) continue;
        const std::size_t label = members.size();
        members.emplace_back();
        std::vector<std::size_t> stack{root};
        component[root] = label;
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            members[label].push_back(u);
            for (std::size_t w = 0; w < n; ++w) {
                if (adj.matrix(u, w) != 0.0 && component[w] == n) {
                    component[w] = label;
                    stack.push_back(w);
                }
            }
        }
    }

    std::map<std::string, double> out;
    for (auto& group : members) {
        std::sort(group.begin(), group.end());
        if (group.size() == 1) {
            out.emplace(adj.nodes[group.front()], 1.0);
            continue;
        }
        Matrix sub(group.size(), group.size());
        for (std::size_t i = 0; i < group.size(); ++i) {
            for (std::size_t j = 0; j < group.size(); ++j) sub(i, j) = adj.matrix(group[i], group[j]);
        }
        const auto eig = eig_sym(sub);
        for (std::size_t i = 0; i < group.size(); ++i) {
            double c = 0.0;
            for (std::size_t j = 0; j < group.size(); ++j) {
                const double x = eig.vectors(i, j);
                c += x * x * std::exp(eig.values[j]);
            }
            out.emplace(adj.nodes[group[i]], c);
        }
    }
    return out;
}

double avg_communicability(const WeightedGraph& g) {
    if (g.node_count() == 0) throw InvalidArgument("average communicability of an empty node set");
    double total = 0.0;
    for (const auto& [id, c] : communicability(g)) total += c;
    return total / static_cast<double>(g.node_count());
}

MeasureRecord measure_graph(const WeightedGraph& g) {
    MeasureRecord r;
    r.bucket = g.bucket();
    r.density = density(g);
    if (g.node_count() == 0) return r;
    const auto s = strengths(g);
    const auto c = communicability(g);
    double s_total = 0.0;
    double c_total = 0.0;
    for (const auto& [id, m] : g.nodes()) {
        const NodeMeasure nm{static_cast<double>(s.at(id)), c.at(id)};
        s_total += nm.strength;
        c_total += nm.communicability;
        r.per_node.emplace(id, nm);
    }
    const double n = static_cast<double>(g.node_count());
    r.avg_strength = s_total / n;
    r.avg_communicability = c_total / n;
    return r;
}

std::vector<MeasureRecord> measure_series(std::span<const CoMention> comentions,
                                          std::span<const ContextRecord> contexts, const Lexicon& lexicon,
                                          const SeriesOptions& options) {
    const auto graphs = aggregate_by_bucket(comentions, contexts, options.granularity, options.node_policy,
                                            lexicon, options.first, options.last);
    std::vector<MeasureRecord> out;
    out.reserve(graphs.size());
    for (const auto& [bucket, g] : graphs) out.push_back(measure_graph(apply_threshold(g, options.threshold)));
    return out;
}

namespace {

std::string optional_real(const std::optional<double>& v) { return v ? format_real(*v) : std::string{}; }

}  // namespace

std::string measures_csv(std::span<const MeasureRecord> records) {
    std::string out = "bucket,density,avg_strength,avg_communicability\n";
    for (const auto& r : records) {
        out += csv_field(bucket_label(r.bucket)) + ',' + format_real(r.density) + ',' +
               optional_real(r.avg_strength) + ',' + optional_real(r.avg_communicability) + '\n';
    }
    return out;
}

std::string per_node_csv(std::span<const MeasureRecord> records) {
    std::string out = "bucket,entity,strength,communicability\n";
    for (const auto& r : records) {
        for (const auto& [id, m] : r.per_node) {
            out += csv_field(bucket_label(r.bucket)) + ',' + csv_field(id) + ',' + format_real(m.strength) +
                   ',' + format_real(m.communicability) + '\n';
        }
    }
    return out;
}

}  // namespace comention
