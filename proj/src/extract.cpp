#include "comention/extract.hpp"

#include "comention/error.hpp"

#include <algorithm>
#include <istream>
#include <thread>
#include <tuple>

namespace comention {

EntityPair::EntityPair(std::string x, std::string y) {
    if (x == y) throw InvalidArgument("self-pair for entity '" + x + "'");
    if (y < x) std::swap(x, y);
    a_ = std::move(x);
    b_ = std::move(y);
}

std::vector<Mention> scan_post(const Post& post, const Lexicon& lexicon) {
    std::vector<Mention> out;
    if (post.text.empty()) return out;
    const DecodedText decoded(post.text);
    for (const auto& entity : lexicon) {
        for (const auto& span : entity.matcher().find_all(decoded)) {
            out.push_back({post.id, entity.id(), span.begin, span.end,
                           post.text.substr(span.begin, span.end - span.begin)});
        }
    }
    std::sort(out.begin(), out.end(), [](const Mention& x, const Mention& y) {
        return std::tie(x.start, x.end, x.entity_id) < std::tie(y.start, y.end, y.entity_id);
    });
    return out;
}

std::set<std::string> distinct_entities(std::span<const Mention> mentions) {
    std::set<std::string> out;
    for (const auto& m : mentions) out.insert(m.entity_id);
    return out;
}

namespace {

void check_max_distinct(int max_distinct) {
    if (max_distinct < 2) throw InvalidArgument("max_distinct must be at least 2");
}

std::vector<CoMention> pairs_of(const ContextRecord& context) {
    std::vector<CoMention> out;
    if (context.disqualified || context.entities.size() < 2) return out;
    const auto& e = context.entities;
    out.reserve(e.size() * (e.size() - 1) / 2);
    for (std::size_t i = 0; i < e.size(); ++i) {
        for (std::size_t j = i + 1; j < e.size(); ++j) {
            out.push_back({context.post_id, EntityPair(e[i], e[j]), context.ts});
        }
    }
    return out;
}

}  // namespace

PostExtraction extract_post(const Post& post, const Lexicon& lexicon, int max_distinct) {
    check_max_distinct(max_distinct);
    PostExtraction result;
    result.mentions = scan_post(post, lexicon);
    const auto distinct = distinct_entities(result.mentions);
    result.context.post_id = post.id;
    result.context.ts = post.ts;
    result.context.entities.assign(distinct.begin(), distinct.end());
    result.context.disqualified = distinct.size() > static_cast<std::size_t>(max_distinct);
    result.comentions = pairs_of(result.context);
    return result;
}

std::vector<CoMention> extract_comentions(const Post& post, const Lexicon& lexicon, int max_distinct) {
    return extract_post(post, lexicon, max_distinct).comentions;
}

namespace {

void tally(ExtractionSummary& s, const PostExtraction& x) {
    ++s.posts;
    if (!x.mentions.empty()) ++s.posts_with_mentions;
    s.mentions += x.mentions.size();
    s.comentions += x.comentions.size();
    if (x.context.disqualified) ++s.disqualified;
}

std::vector<PostExtraction> extract_batch(std::span<const Post> batch, const Lexicon& lexicon,
                                          int max_distinct, unsigned threads) {
    std::vector<PostExtraction> out(batch.size());
    const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), batch.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < batch.size(); ++i) out[i] = extract_post(batch[i], lexicon, max_distinct);
        return out;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (batch.size() + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    const std::size_t lo = w * chunk;
                    const std::size_t hi = std::min(batch.size(), lo + chunk);
                    for (std::size_t i = lo; i < hi; ++i) {
                        out[i] = extract_post(batch[i], lexicon, max_distinct);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

}  // namespace

ExtractionSummary extract_corpus(CorpusReader& reader, const Lexicon& lexicon,
                                 const ExtractOptions& options, const ExtractionSink& sink) {
    check_max_distinct(options.max_distinct);
    ExtractionSummary summary;
    std::vector<Post> batch;
    const std::size_t batch_size = std::max<std::size_t>(1, options.batch_size);
    auto flush = [&] {
        auto results = extract_batch(batch, lexicon, options.max_distinct, options.threads);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            tally(summary, results[i]);
            if (sink) sink(batch[i], results[i]);
        }
        batch.clear();
    };
    while (auto post = reader.next()) {
        batch.push_back(std::move(*post));
        if (batch.size() >= batch_size) flush();
    }
    flush();
    summary.malformed = reader.error_count();
    return summary;
}

ExtractionResult extract_all(std::span<const Post> posts, const Lexicon& lexicon,
                             const ExtractOptions& options) {
    check_max_distinct(options.max_distinct);
    ExtractionResult result;
    auto extracted = extract_batch(posts, lexicon, options.max_distinct, options.threads);
    for (auto& x : extracted) {
        tally(result.summary, x);
        std::move(x.mentions.begin(), x.mentions.end(), std::back_inserter(result.mentions));
        std::move(x.comentions.begin(), x.comentions.end(), std::back_inserter(result.comentions));
        result.contexts.push_back(std::move(x.context));
    }
    return result;
}

nlohmann::json to_json(const Mention& m) {
    return {{"post_id", m.post_id}, {"entity", m.entity_id}, {"start", m.start},
            {"end", m.end},         {"surface", m.surface}};
}

nlohmann::json to_json(const CoMention& c) {
    return {{"post_id", c.post_id}, {"a", c.pair.a()}, {"b", c.pair.b()}, {"ts", format_timestamp(c.ts)}};
}

nlohmann::json to_json(const ContextRecord& c) {
    return {{"post_id", c.post_id},
            {"ts", format_timestamp(c.ts)},
            {"entities", c.entities},
            {"disqualified", c.disqualified}};
}

Mention mention_from_json(const nlohmann::json& j) {
    Mention m{j.at("post_id").get<std::string>(), j.at("entity").get<std::string>(),
              j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>(),
              j.at("surface").get<std::string>()};
    if (m.start >= m.end) throw DataError("mention with empty span in post '" + m.post_id + "'");
    return m;
}

CoMention comention_from_json(const nlohmann::json& j) {
    return {j.at("post_id").get<std::string>(),
            EntityPair(j.at("a").get<std::string>(), j.at("b").get<std::string>()),
            parse_timestamp(j.at("ts").get<std::string>())};
}

ContextRecord context_from_json(const nlohmann::json& j) {
    ContextRecord c{j.at("post_id").get<std::string>(), parse_timestamp(j.at("ts").get<std::string>()),
                    j.at("entities").get<std::vector<std::string>>(),
                    j.value("disqualified", false)};
    std::sort(c.entities.begin(), c.entities.end());
    c.entities.erase(std::unique(c.entities.begin(), c.entities.end()), c.entities.end());
    return c;
}

namespace {

template <typename T, typename Parse>
std::vector<T> read_ndjson(std::istream& in, const char* what, Parse parse) {
    if (!in) throw DataError(std::string(what) + " stream is not readable");
    std::vector<T> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(parse(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw DataError(std::string(what) + " line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (in.bad()) throw DataError(std::string(what) + " stream read failure");
    return out;
}

}  // namespace

std::vector<Mention> read_mentions(std::istream& in) {
    return read_ndjson<Mention>(in, "mentions", mention_from_json);
}

std::vector<CoMention> read_comentions(std::istream& in) {
    return read_ndjson<CoMention>(in, "co-mentions", comention_from_json);
}

std::vector<ContextRecord> read_contexts(std::istream& in) {
    return read_ndjson<ContextRecord>(in, "contexts", context_from_json);
}

}  // namespace comention
