#include "fixtures.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fixtures {

using namespace comention;

const std::vector<PlantSpec>& plant_specs() {
    static const std::vector<PlantSpec> specs = {
        {"aktia", "Aktia", {"\\baktia\\w{0,4}\\b"}, EntityKind::bank, {"Aktia", "Aktian", "AKTIA", "Aktiassa"}},
        {"alandsbanken", "Ålandsbanken", {"\\bålandsbank\\w{0,4}\\b"}, EntityKind::bank,
         {"Ålandsbanken", "ÅLANDSBANKEN", "Ålandsbankenin"}},
        {"danske", "Danske Bank", {"\\bdanske\\w{0,4}\\b", "\\bsampo\\w{0,4}\\b"}, EntityKind::bank,
         {"Danske", "Danskelle", "Sampo", "Sampon", "SAMPO"}},
        {"fiva", "Finanssivalvonta", {"\\bfiva\\w{0,2}\\b", "\\bfinanssivalvo\\w{0,4}\\b"}, EntityKind::supervisor,
         {"Fiva", "Fivan", "Finanssivalvonta", "Finanssivalvonnan"}},
        {"handelsbanken", "Handelsbanken", {"\\bhandelsbank\\w{0,4}\\b"}, EntityKind::bank,
         {"Handelsbanken", "Handelsbankenin"}},
        {"nordea", "Nordea", {"\\bnordea\\w{0,4}\\b"}, EntityKind::bank,
         {"Nordea", "Nordean", "Nordeassa", "NORDEA", "nordealle"}},
        {"op", "OP-Pohjola", {"\\bop\\w{0,2}\\b", "\\bpohjola\\w{0,4}\\b"}, EntityKind::bank,
         {"OP", "OP:n", "Op", "Pohjola", "Pohjolan", "OPn"}},
        {"saastopankki", "Säästöpankki", {"\\bsäästöpank\\w{0,4}\\b"}, EntityKind::bank,
         {"Säästöpankki", "Säästöpankin", "SÄÄSTÖPANKKI"}},
    };
    return specs;
}

std::string bank_lexicon_json() {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& s : plant_specs()) {
        doc.push_back({{"id", s.id}, {"name", s.name}, {"patterns", s.patterns}, {"kind", to_string(s.kind)}});
    }
    return doc.dump(2);
}

Lexicon bank_lexicon() { return lexicon_from_json(nlohmann::json::parse(bank_lexicon_json())); }

const std::vector<std::string>& filler_words() {
    static const std::vector<std::string> words = {
        "markkinat", "tänään", "korko", "laina", "osake", "nousi", "laski", "pankki", "asiakkaat", "the",
        "market", "rates", "news", "ja", "sekä", "kertoo", "uutinen", "talous", "kriisi", "Europassa",
        "optio", "Nordeassakaan", "Sampolainen2", "aktiivinen", "kööpenhamina", "€", "2009", "fivaaaa",
        "😀", "opera", "stop", "pohjoinen", "Danskebankenx",
    };
    return words;
}

std::vector<Post> PlantedCorpus::plain() const {
    std::vector<Post> out;
    out.reserve(posts.size());
    for (const auto& p : posts) out.push_back(p.post);
    return out;
}

std::string PlantedCorpus::ndjson() const {
    std::string out;
    for (const auto& p : posts) out += post_to_json(p.post).dump() + "\n";
    return out;
}

Post make_post(std::string id, std::string ts, std::string text) {
    return Post{std::move(id), parse_timestamp(ts), std::move(text), std::nullopt};
}

namespace {

const char* const kSeparators[] = {" ", ", ", ". ", " (", ") ", " - ", "\n", " \"", "\" "};

std::string timestamp_text(int y, int mo, int d, int h, int mi, int s, bool zone) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d%s", y, mo, d, h, mi, s, zone ? "Z" : "");
    return buf;
}

PlantedPost plant(std::mt19937_64& rng, std::size_t serial, int year, int month, std::vector<std::string> entities,
                  double repeat_probability) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

    PlantedPost out;
    out.year = year;
    out.month = month;
    for (const auto& e : entities) {
        out.planted.push_back(e);
        if (u(rng) < repeat_probability) out.planted.push_back(e);
    }
    std::shuffle(out.planted.begin(), out.planted.end(), rng);

    std::vector<std::string> tokens;
    for (const auto& id : out.planted) {
        const auto& spec = *std::find_if(plant_specs().begin(), plant_specs().end(),
                                         [&](const PlantSpec& s) { return s.id == id; });
        tokens.push_back(spec.surfaces[pick(spec.surfaces.size())]);
    }
    const std::size_t fillers = 1 + pick(12);
    for (std::size_t i = 0; i < fillers; ++i) {
        tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(pick(tokens.size() + 1)),
                      filler_words()[pick(filler_words().size())]);
    }
    std::string text;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) text += kSeparators[pick(std::size(kSeparators))];
        text += tokens[i];
    }

    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    const int day = 1 + static_cast<int>(pick(static_cast<std::size_t>(kDays[month - 1])));
    const std::string ts = timestamp_text(year, month, day, static_cast<int>(pick(24)), static_cast<int>(pick(60)),
                                          static_cast<int>(pick(60)), u(rng) < 0.8);
    char id[32];
    std::snprintf(id, sizeof id, "p%06zu", serial);
    out.post = make_post(id, ts, text);
    if (u(rng) < 0.3) out.post.source = "forum-" + std::to_string(pick(5));
    return out;
}

std::vector<std::string> choose_entities(std::mt19937_64& rng, std::size_t k) {
    std::vector<std::string> ids;
    for (const auto& s : plant_specs()) ids.push_back(s.id);
    std::shuffle(ids.begin(), ids.end(), rng);
    ids.resize(std::min(k, ids.size()));
    return ids;
}

}  // namespace

PlantedCorpus planted_corpus(std::size_t n, std::uint64_t seed, const PlantOptions& options) {
    std::mt19937_64 rng(seed);
    PlantedCorpus corpus;
    std::uniform_int_distribution<int> year(options.first_year, options.first_year + options.years - 1);
    std::uniform_int_distribution<int> month(1, 12);
    std::uniform_int_distribution<int> k(0, options.max_entities);
    for (std::size_t i = 0; i < n; ++i) {
        corpus.posts.push_back(plant(rng, corpus.posts.size(), year(rng), month(rng),
                                     choose_entities(rng, static_cast<std::size_t>(k(rng))),
                                     options.repeat_probability));
    }
    if (options.burst) {
        const auto [by, bq] = *options.burst;
        std::uniform_int_distribution<int> bm(3 * bq - 2, 3 * bq);
        std::uniform_int_distribution<int> bk(4, 6);
        for (std::size_t i = 0; i < options.burst_posts; ++i) {
            corpus.posts.push_back(plant(rng, corpus.posts.size(), by, bm(rng),
                                         choose_entities(rng, static_cast<std::size_t>(bk(rng))),
                                         options.repeat_probability));
        }
    }
    return corpus;
}

PlantedCorpus burst_corpus(std::uint64_t seed, std::pair<int, int> burst) {
    PlantOptions o;
    o.first_year = 2007;
    o.years = 4;
    o.max_entities = 2;
    o.burst = burst;
    o.burst_posts = 60;
    return planted_corpus(160, seed, o);
}

std::string node_name(int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "n%02d", i);
    return buf;
}

WeightedGraph graph_from_edges(int n, const std::vector<std::tuple<int, int, std::uint64_t>>& edges) {
    WeightedGraph::NodeMap nodes;
    for (int i = 0; i < n; ++i) nodes.emplace(node_name(i), 1);
    WeightedGraph::EdgeMap em;
    for (const auto& [a, b, w] : edges) em[EntityPair(node_name(a), node_name(b))] = w;
    return WeightedGraph(std::nullopt, std::move(nodes), std::move(em));
}

WeightedGraph complete_graph(int n, std::uint64_t weight) {
    std::vector<std::tuple<int, int, std::uint64_t>> edges;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j, weight);
    }
    return graph_from_edges(n, edges);
}

WeightedGraph random_graph(std::mt19937_64& rng, int n, double p, std::uint64_t max_weight) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<std::uint64_t> w(1, max_weight);
    std::vector<std::tuple<int, int, std::uint64_t>> edges;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (u(rng) < p) edges.emplace_back(i, j, w(rng));
        }
    }
    return graph_from_edges(n, edges);
}

WeightedGraph two_clique_graph() {
    std::vector<std::tuple<int, int, std::uint64_t>> edges;
    for (int base : {0, 4}) {
        for (int i = 0; i < 4; ++i) {
            for (int j = i + 1; j < 4; ++j) edges.emplace_back(base + i, base + j, 1);
        }
    }
    edges.emplace_back(3, 4, 1);
    return graph_from_edges(8, edges);
}

std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("comention-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace fixtures
