#ifndef WUM_PATTERN_MINER_HPP
#define WUM_PATTERN_MINER_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wum/core.hpp"
#include "wum/sessions.hpp"

namespace wum {

struct MinerOptions {
    std::uint64_t min_weight = 3;
    std::size_t min_vertices = 2;
    // Simple-path enumeration is exponential; larger session graphs are rejected.
    std::size_t max_vertices = 64;
};

/// Undirected page graph of one session; edge weight = number of
/// referer->page transitions between the two pages, either direction.
struct SessionGraph {
    using Edge = std::pair<PageId, PageId>;  // (smaller, larger)

    std::set<PageId> vertices;
    std::map<Edge, std::uint32_t> edges;
    std::size_t self_loops = 0;

    static Edge key(PageId a, PageId b) { return a < b ? Edge{a, b} : Edge{b, a}; }

    void add_transition(PageId from, PageId to, std::uint32_t count = 1)
    {
        vertices.insert(from);
        vertices.insert(to);
        if (from == to) {
            self_loops += count;
            return;
        }
        edges[key(from, to)] += count;
    }

    std::optional<std::uint32_t> weight(PageId a, PageId b) const
    {
        auto it = edges.find(key(a, b));
        if (it == edges.end())
            return std::nullopt;
        return it->second;
    }
};

inline SessionGraph build_session_graph(const SessionVisits& session)
{
    SessionGraph g;
    for (const auto& v : session.visits) {
        g.vertices.insert(v.page_id);
        if (v.referer_id)
            g.add_transition(*v.referer_id, v.page_id);
    }
    return g;
}

struct NavigationPattern {
    std::vector<PageId> path;
    std::uint64_t weight = 0;

    bool operator==(const NavigationPattern&) const = default;
};

/// Cluster order: heavier first, then longer, then lexicographic path.
inline bool pattern_order(const NavigationPattern& a, const NavigationPattern& b)
{
    if (a.weight != b.weight)
        return a.weight > b.weight;
    if (a.path.size() != b.path.size())
        return a.path.size() > b.path.size();
    return a.path < b.path;
}

/// Sum of edge weights along `path`, or nullopt if a step is not an edge.
inline std::optional<std::uint64_t> path_weight(const SessionGraph& g, std::span<const PageId> path)
{
    std::uint64_t total = 0;
    for (std::size_t i = 1; i < path.size(); ++i) {
        auto w = g.weight(path[i - 1], path[i]);
        if (!w)
            return std::nullopt;
        total += *w;
    }
    return total;
}

/// All simple paths of the graph found by depth-first search from every
/// vertex. A path and its reversal are reported once, in the orientation
/// whose first id is smaller. Paths lighter than min_weight or shorter than
/// min_vertices are dropped. Result is in cluster order.
inline std::vector<NavigationPattern> enumerate_patterns(const SessionGraph& g, const MinerOptions& opts = {})
{
    if (opts.min_weight < 1)
        throw Error("enumerate_patterns: min_weight must be >= 1");
    if (g.vertices.size() > opts.max_vertices)
        throw Error("session graph has " + std::to_string(g.vertices.size()) + " vertices, above the cap of " +
                    std::to_string(opts.max_vertices) + "; split the session or raise --max-vertices");

    const std::vector<PageId> ids(g.vertices.begin(), g.vertices.end());
    auto index_of = [&](PageId id) {
        return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
    };
    std::vector<std::vector<std::pair<std::size_t, std::uint32_t>>> adj(ids.size());
    for (const auto& [e, w] : g.edges) {
        auto a = index_of(e.first), b = index_of(e.second);
        adj[a].emplace_back(b, w);
        adj[b].emplace_back(a, w);
    }
    for (auto& nbrs : adj)
        std::sort(nbrs.begin(), nbrs.end());

    std::vector<NavigationPattern> out;
    std::vector<std::size_t> path;
    std::vector<char> on_path(ids.size(), 0);
    std::uint64_t weight = 0;

    std::function<void(std::size_t)> extend = [&](std::size_t v) {
        for (auto [u, w] : adj[v]) {
            if (on_path[u])
                continue;
            path.push_back(u);
            on_path[u] = 1;
            weight += w;
            // ids are sorted, so index order is id order
            if (path.front() < u && weight >= opts.min_weight && path.size() >= opts.min_vertices) {
                NavigationPattern p;
                p.weight = weight;
                p.path.reserve(path.size());
                for (auto i : path)
                    p.path.push_back(ids[i]);
                out.push_back(std::move(p));
            }
            extend(u);
            weight -= w;
            on_path[u] = 0;
            path.pop_back();
        }
    };
    for (std::size_t start = 0; start < ids.size(); ++start) {
        path.assign(1, start);
        on_path[start] = 1;
        extend(start);
        on_path[start] = 0;
    }
    std::sort(out.begin(), out.end(), pattern_order);
    return out;
}

struct PatternCluster {
    UserId user_id = 0;
    std::vector<NavigationPattern> patterns;  // cluster order

    bool operator==(const PatternCluster&) const = default;
};

/// Union of the patterns of all of one user's sessions; a path found in
/// several sessions keeps its largest weight.
inline PatternCluster cluster_user_patterns(std::span<const SessionVisits> sessions, const MinerOptions& opts = {})
{
    PatternCluster cluster;
    if (sessions.empty())
        return cluster;
    cluster.user_id = sessions.front().user_id;
    std::map<std::vector<PageId>, std::uint64_t> best;
    for (const auto& s : sessions) {
        if (s.user_id != cluster.user_id)
            throw Error("cluster_user_patterns: sessions belong to different users");
        for (auto& p : enumerate_patterns(build_session_graph(s), opts)) {
            auto& w = best[p.path];
            w = std::max(w, p.weight);
        }
    }
    for (auto& [path, w] : best)
        cluster.patterns.push_back({path, w});
    std::sort(cluster.patterns.begin(), cluster.patterns.end(), pattern_order);
    return cluster;
}

/// Fraction of the distinct pages viewed in `sessions` that occur in at least
/// one retained pattern. 1 - coverage is the outlier fraction.
inline double coverage(const PatternCluster& cluster, std::span<const SessionVisits> sessions)
{
    std::set<PageId> viewed;
    for (const auto& s : sessions)
        for (const auto& v : s.visits)
            viewed.insert(v.page_id);
    if (viewed.empty())
        return 1.0;
    std::set<PageId> covered;
    for (const auto& p : cluster.patterns)
        covered.insert(p.path.begin(), p.path.end());
    std::size_t hit = 0;
    for (auto id : viewed)
        hit += covered.count(id);
    return static_cast<double>(hit) / static_cast<double>(viewed.size());
}

/// Clusters for every user in the corpus (users without retained patterns
/// included, with empty clusters). Users are mined in parallel.
inline std::map<UserId, PatternCluster> mine_clusters(const SessionCorpus& corpus, const MinerOptions& opts = {},
                                                      unsigned threads = 0)
{
    auto users = corpus.by_user();
    std::vector<PatternCluster> clusters(users.size());
    parallel_for(users.size(), threads,
                 [&](std::size_t i) { clusters[i] = cluster_user_patterns(users[i].second, opts); });
    std::map<UserId, PatternCluster> out;
    for (auto& c : clusters)
        out.emplace(c.user_id, std::move(c));
    return out;
}

inline constexpr std::string_view kPatternsHeader = "#patterns v1";

inline void write_pattern_rows(std::ostream& out, const std::map<UserId, PatternCluster>& clusters)
{
    for (const auto& [user, cluster] : clusters)
        for (std::size_t i = 0; i < cluster.patterns.size(); ++i) {
            const auto& p = cluster.patterns[i];
            out << user << '\t' << (i + 1) << '\t' << join_ids(p.path) << '\t' << p.weight << '\n';
        }
}

inline void write_patterns_tsv(std::ostream& out, const std::map<UserId, PatternCluster>& clusters)
{
    out << kPatternsHeader << '\n';
    write_pattern_rows(out, clusters);
}

/// Adds one "user_id<TAB>pattern_index<TAB>ids<TAB>weight" row. Rows of a
/// user must arrive with consecutive indices starting at 1.
inline void read_pattern_row(std::string_view line, std::size_t lineno, std::map<UserId, PatternCluster>& clusters)
{
    auto fail = [&](const std::string& what) {
        return Error("patterns line " + std::to_string(lineno) + ": " + what);
    };
    auto cols = split(line, '\t');
    if (cols.size() != 4)
        throw fail("expected 4 columns");
    auto user = parse_int<UserId>(cols[0]);
    auto index = parse_int<std::size_t>(cols[1]);
    auto path = parse_id_list(cols[2]);
    auto weight = parse_int<std::uint64_t>(cols[3]);
    if (!user || !index || !path || !weight)
        throw fail("malformed row");
    auto& cluster = clusters[*user];
    cluster.user_id = *user;
    if (*index != cluster.patterns.size() + 1)
        throw fail("pattern index out of sequence");
    cluster.patterns.push_back({std::move(*path), *weight});
}

inline std::map<UserId, PatternCluster> read_patterns_tsv(std::istream& in)
{
    std::map<UserId, PatternCluster> clusters;
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line) || line != kPatternsHeader)
        throw Error("patterns: missing or unsupported header");
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty())
            read_pattern_row(line, lineno, clusters);
    }
    return clusters;
}

} // namespace wum

#endif
