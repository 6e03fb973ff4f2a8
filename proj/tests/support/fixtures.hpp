#pragma once

// Synthetic corpora with planted mentions and small graph builders shared by
// the unit and acceptance suites.

#include "comention/extract.hpp"
#include "comention/ingest.hpp"
#include "comention/network.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

using comention::Lexicon;
using comention::Post;
using comention::WeightedGraph;

struct PlantSpec {
    std::string id;
    std::string name;
    std::vector<std::string> patterns;
    comention::EntityKind kind = comention::EntityKind::bank;
    // Surface forms that each produce exactly one mention of this entity.
    std::vector<std::string> surfaces;
};

// Eight Finnish financial institutions; OP/Pohjola and Danske/Sampo are
// merged entities, fiva is the supervisor.
const std::vector<PlantSpec>& plant_specs();
Lexicon bank_lexicon();
std::string bank_lexicon_json();

// Words that never match any entity of bank_lexicon(), near misses included.
const std::vector<std::string>& filler_words();

struct PlantedPost {
    Post post;
    std::vector<std::string> planted;  // one entry per planted mention
    int year = 0;                      // UTC calendar fields of post.ts
    int month = 0;
};

struct PlantOptions {
    int first_year = 2008;
    int years = 3;
    int max_entities = 8;  // distinct entities per post, uniform in [0, max]
    double repeat_probability = 0.2;
    // Posts with a dense entity set added into one quarter.
    std::optional<std::pair<int, int>> burst;  // (year, quarter)
    std::size_t burst_posts = 0;
};

struct PlantedCorpus {
    std::vector<PlantedPost> posts;
    std::vector<Post> plain() const;
    std::string ndjson() const;
};

PlantedCorpus planted_corpus(std::size_t n, std::uint64_t seed, const PlantOptions& options = {});

// Sparse background (at most two entities per post) with a dense burst of
// four to six entities per post in `burst`.
PlantedCorpus burst_corpus(std::uint64_t seed, std::pair<int, int> burst);

Post make_post(std::string id, std::string ts, std::string text);

// Graph helpers; nodes carry mention count 1 unless given.
WeightedGraph complete_graph(int n, std::uint64_t weight = 1);
WeightedGraph graph_from_edges(int n, const std::vector<std::tuple<int, int, std::uint64_t>>& edges);
WeightedGraph random_graph(std::mt19937_64& rng, int n, double p, std::uint64_t max_weight = 1);
// Two 4-cliques joined by the edge n3--n4.
WeightedGraph two_clique_graph();
std::string node_name(int i);

std::filesystem::path scratch_dir(const std::string& name);
void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

}  // namespace fixtures
