#pragma once

// Global and per-node connectivity measures of co-mention graphs:
// density, node strength, average strength, communicability (subgraph)
// centrality and its average, plus per-bucket time series.

#include "comention/matrix.hpp"
#include "comention/network.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace comention {

// 2|E| / (|V|(|V|-1)); 0 when |V| < 2.
double density(const WeightedGraph& g);

// Sum of incident edge weights. Throws InvalidArgument for an unknown node.
double strength(const WeightedGraph& g, const std::string& node);

// Mean node strength. Throws InvalidArgument when the graph has no nodes.
double avg_strength(const WeightedGraph& g);

struct EigenDecomposition {
    std::vector<double> values;  // ascending
    Matrix vectors;              // column j pairs with values[j]; orthonormal
    int sweeps = 0;
};

struct JacobiOptions {
    double tolerance = 1e-12;  // off-diagonal Frobenius norm relative to ||A||_F
    int max_sweeps = 100;
};

// Cyclic Jacobi eigensolver for dense symmetric matrices. Symmetry is
// checked exactly. Throws InvalidArgument for non-square or non-symmetric
// input, NumericError when the sweep cap is reached.
EigenDecomposition eig_sym(const Matrix& a, const JacobiOptions& options = {});

// Diagonal of exp(A) for the binarized graph, keyed by entity id. Each
// connected component is diagonalized on its own, so isolated nodes get
// exactly 1.
std::map<std::string, double> communicability(const WeightedGraph& g);

// Mean communicability. Throws InvalidArgument when the graph has no nodes.
double avg_communicability(const WeightedGraph& g);

struct NodeMeasure {
    double strength = 0.0;
    double communicability = 1.0;

    friend bool operator==(const NodeMeasure&, const NodeMeasure&) = default;
};

struct MeasureRecord {
    BucketKey bucket;
    double density = 0.0;
    // nullopt only for an empty node set
    std::optional<double> avg_strength;
    std::optional<double> avg_communicability;
    std::map<std::string, NodeMeasure> per_node;

    friend bool operator==(const MeasureRecord&, const MeasureRecord&) = default;
};

MeasureRecord measure_graph(const WeightedGraph& g);

struct SeriesOptions {
    Granularity granularity = Granularity::quarter;
    std::uint64_t threshold = 0;
    NodePolicy node_policy = NodePolicy::full_lexicon;
    std::optional<TimeBucket> first;  // defaults to the data span
    std::optional<TimeBucket> last;
};

// One record per bucket of the span, chronological, empty buckets included.
std::vector<MeasureRecord> measure_series(std::span<const CoMention> comentions,
                                          std::span<const ContextRecord> contexts, const Lexicon& lexicon,
                                          const SeriesOptions& options);

// `bucket,density,avg_strength,avg_communicability`
std::string measures_csv(std::span<const MeasureRecord> records);
// `bucket,entity,strength,communicability`
std::string per_node_csv(std::span<const MeasureRecord> records);

}  // namespace comention
