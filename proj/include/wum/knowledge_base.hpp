#ifndef WUM_KNOWLEDGE_BASE_HPP
#define WUM_KNOWLEDGE_BASE_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wum/core.hpp"
#include "wum/digest.hpp"
#include "wum/page_registry.hpp"
#include "wum/pattern_miner.hpp"
#include "wum/sessions.hpp"

namespace wum {

struct KbMeta {
    // Latest page-view time of the source corpus, so rebuilds are reproducible.
    std::int64_t build_timestamp = 0;
    std::string source_digest = std::string(kAbsent);
    std::uint64_t min_weight = 3;
    std::size_t min_vertices = 2;

    bool operator==(const KbMeta&) const = default;
};

/// Offline artifact queried by the recommender: page registry plus the
/// pattern cluster of every user that has at least one retained pattern.
/// Immutable once built.
struct KnowledgeBase {
    PageRegistry registry;
    std::map<UserId, PatternCluster> clusters;
    KbMeta meta;

    bool operator==(const KnowledgeBase&) const = default;
};

inline constexpr std::string_view kKbVersion = "1";

/// Throws naming the first offending record if the KB violates its invariants.
inline void validate(const KnowledgeBase& kb)
{
    for (const auto& [user, cluster] : kb.clusters) {
        auto where = [&, u = user](std::size_t i) {
            return "user " + std::to_string(u) + " pattern " + std::to_string(i + 1) + ": ";
        };
        if (cluster.user_id != user)
            throw Error("knowledge base: cluster keyed " + std::to_string(user) + " carries user " +
                        std::to_string(cluster.user_id));
        if (cluster.patterns.empty())
            throw Error("knowledge base: empty cluster for user " + std::to_string(user));
        for (std::size_t i = 0; i < cluster.patterns.size(); ++i) {
            const auto& p = cluster.patterns[i];
            for (auto id : p.path)
                if (!kb.registry.contains(id))
                    throw Error("knowledge base: " + where(i) + "dangling page id " + id.str());
            if (p.path.size() < 2 || p.path.size() < kb.meta.min_vertices)
                throw Error("knowledge base: " + where(i) + "path too short");
            if (std::set<PageId>(p.path.begin(), p.path.end()).size() != p.path.size())
                throw Error("knowledge base: " + where(i) + "repeated page in path");
            if (p.weight < kb.meta.min_weight)
                throw Error("knowledge base: " + where(i) + "weight " + std::to_string(p.weight) +
                            " below min_weight " + std::to_string(kb.meta.min_weight));
            if (i > 0 && !pattern_order(cluster.patterns[i - 1], p))
                throw Error("knowledge base: " + where(i) + "cluster not in canonical order");
        }
    }
}

inline std::string serialize_kb(const KnowledgeBase& kb)
{
    validate(kb);
    std::ostringstream out;
    out << "#meta\n"
        << "version\t" << kKbVersion << '\n'
        << "build_timestamp\t" << kb.meta.build_timestamp << '\n'
        << "source_digest\t" << kb.meta.source_digest << '\n'
        << "min_weight\t" << kb.meta.min_weight << '\n'
        << "min_vertices\t" << kb.meta.min_vertices << '\n';
    kb.registry.write_tsv(out);
    write_patterns_tsv(out, kb.clusters);
    std::string body = std::move(out).str();
    body += "#digest " + sha256_hex(body) + "\n";
    return body;
}

inline void store(const KnowledgeBase& kb, const std::filesystem::path& destination)
{
    std::string bytes = serialize_kb(kb);
    std::ofstream f(destination, std::ios::binary | std::ios::trunc);
    if (!f)
        throw Error("cannot write knowledge base: " + destination.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f)
        throw Error("cannot write knowledge base: " + destination.string());
}

inline KnowledgeBase parse_kb(std::string_view text)
{
    // Digest line guards against truncation and edits.
    if (text.empty() || text.back() != '\n')
        throw Error("knowledge base: truncated (no trailing digest line)");
    auto last_start = text.rfind('\n', text.size() - 2);
    last_start = last_start == std::string_view::npos ? 0 : last_start + 1;
    std::string_view digest_line = text.substr(last_start, text.size() - 1 - last_start);
    if (digest_line.substr(0, 8) != "#digest ")
        throw Error("knowledge base: missing digest line");
    std::string_view body = text.substr(0, last_start);
    if (sha256_hex(body) != digest_line.substr(8))
        throw Error("knowledge base: checksum mismatch");

    KnowledgeBase kb;
    enum class Section { none, meta, registry, patterns } section = Section::none;
    std::set<std::string> meta_keys;
    std::size_t lineno = 0;
    for (auto line : split(body.substr(0, body.size() - 1), '\n')) {
        ++lineno;
        if (line == "#meta") {
            section = Section::meta;
            continue;
        }
        if (line == PageRegistry::kHeader) {
            section = Section::registry;
            continue;
        }
        if (line == kPatternsHeader) {
            section = Section::patterns;
            continue;
        }
        if (!line.empty() && line.front() == '#')
            throw Error("knowledge base line " + std::to_string(lineno) + ": unknown section '" +
                        std::string(line) + "'");
        switch (section) {
        case Section::none:
            throw Error("knowledge base line " + std::to_string(lineno) + ": data before #meta");
        case Section::meta: {
            auto cols = split(line, '\t');
            if (cols.size() != 2)
                throw Error("knowledge base line " + std::to_string(lineno) + ": bad meta row");
            std::string key(cols[0]);
            meta_keys.insert(key);
            auto bad = [&] { return Error("knowledge base: bad meta value for " + key); };
            if (key == "version") {
                if (cols[1] != kKbVersion)
                    throw Error("knowledge base: version mismatch (file " + std::string(cols[1]) +
                                ", expected " + std::string(kKbVersion) + ")");
            } else if (key == "build_timestamp") {
                auto v = parse_int<std::int64_t>(cols[1]);
                if (!v)
                    throw bad();
                kb.meta.build_timestamp = *v;
            } else if (key == "source_digest") {
                kb.meta.source_digest = std::string(cols[1]);
            } else if (key == "min_weight") {
                auto v = parse_int<std::uint64_t>(cols[1]);
                if (!v)
                    throw bad();
                kb.meta.min_weight = *v;
            } else if (key == "min_vertices") {
                auto v = parse_int<std::size_t>(cols[1]);
                if (!v)
                    throw bad();
                kb.meta.min_vertices = *v;
            } else {
                throw Error("knowledge base: unknown meta key " + key);
            }
            break;
        }
        case Section::registry:
            kb.registry.insert_row(line, lineno);
            break;
        case Section::patterns:
            read_pattern_row(line, lineno, kb.clusters);
            break;
        }
    }
    if (!meta_keys.count("version"))
        throw Error("knowledge base: version mismatch (no version recorded)");
    validate(kb);
    return kb;
}

inline KnowledgeBase load(const std::filesystem::path& source)
{
    std::ifstream f(source, std::ios::binary);
    if (!f)
        throw Error("cannot read knowledge base: " + source.string());
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_kb(buf.str());
}

/// The user's cluster in cluster order; empty for unknown users.
inline const std::vector<NavigationPattern>& patterns_for(const KnowledgeBase& kb, UserId user)
{
    static const std::vector<NavigationPattern> none;
    auto it = kb.clusters.find(user);
    return it == kb.clusters.end() ? none : it->second.patterns;
}

struct UserPattern {
    UserId user_id;
    const NavigationPattern* pattern;
};

/// Every other user's patterns, by ascending user id then cluster order.
inline std::vector<UserPattern> patterns_excluding(const KnowledgeBase& kb, UserId user)
{
    std::vector<UserPattern> out;
    for (const auto& [u, cluster] : kb.clusters) {
        if (u == user)
            continue;
        for (const auto& p : cluster.patterns)
            out.push_back({u, &p});
    }
    return out;
}

inline KnowledgeBase build_knowledge_base(const SessionCorpus& corpus, const MinerOptions& opts = {},
                                          std::string source_digest = std::string(kAbsent), unsigned threads = 0)
{
    KnowledgeBase kb;
    kb.registry = corpus.registry;
    kb.meta.build_timestamp = corpus.latest_timestamp();
    kb.meta.source_digest = std::move(source_digest);
    kb.meta.min_weight = opts.min_weight;
    kb.meta.min_vertices = opts.min_vertices;
    for (auto& [user, cluster] : mine_clusters(corpus, opts, threads))
        if (!cluster.patterns.empty())
            kb.clusters.emplace(user, std::move(cluster));
    return kb;
}

} // namespace wum

#endif
