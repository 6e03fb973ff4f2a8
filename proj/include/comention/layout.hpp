#pragma once

// Fruchterman-Reingold force-directed placement for snapshot rendering.

#include "comention/network.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <string>

namespace comention {

// SplitMix64: state += 0x9E3779B97F4A7C15, then the 0xBF58476D1CE4E5B9 /
// 0x94D049BB133111EB mixing rounds. Fully specified, so layouts are
// reproducible in any language.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) from the top 53 bits.
    double next_unit() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

inline constexpr std::uint64_t kDefaultLayoutSeed = 20121025;

struct LayoutOptions {
    int iterations = 500;
    std::uint64_t seed = kDefaultLayoutSeed;
    // Pull toward the centroid, force gravity * d^2 / k; 0 disables it.
    double gravity = 0.05;
};

struct LayoutResult {
    std::map<std::string, Point> positions;  // inside [0,1]^2
    std::uint64_t seed = 0;
    int iterations = 0;

    friend bool operator==(const LayoutResult&, const LayoutResult&) = default;
};

// Unit area, k = sqrt(1/|V|), repulsion k^2/d between all pairs, attraction
// d^2/k along edges (weights ignored), step capped by a temperature cooling
// linearly from 0.1 to 0. The final embedding is scaled uniformly and
// centred into the unit square.
// Throws InvalidArgument for an empty graph or iterations < 1.
LayoutResult fr_layout(const WeightedGraph& g, const LayoutOptions& options = {});

struct LayoutEnergy {
    double attractive = 0.0;  // sum over edges of d^3 / (3k)
    double repulsive = 0.0;   // sum over node pairs of -k^2 ln d

    double total() const noexcept { return attractive + repulsive; }
};

// Potentials of the FR forces at the given positions (gravity excluded).
LayoutEnergy layout_energy_terms(const WeightedGraph& g, const std::map<std::string, Point>& positions);
double layout_energy(const WeightedGraph& g, const std::map<std::string, Point>& positions);

// `{"seed":..., "iterations":..., "positions": {entity: [x, y], ...}}`
nlohmann::json layout_to_json(const LayoutResult& layout);
LayoutResult layout_from_json(const nlohmann::json& j);

}  // namespace comention
