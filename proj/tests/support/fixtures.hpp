#ifndef WUM_TESTS_FIXTURES_HPP
#define WUM_TESTS_FIXTURES_HPP

// Hand-built sessions and knowledge bases at the page-id level.

#include <algorithm>
#include <map>
#include <random>
#include <tuple>
#include <vector>

#include "wum/knowledge_base.hpp"
#include "wum/sessions.hpp"

namespace wum::testkit {

inline std::string page_path(PageId id)
{
    static const std::map<std::uint32_t, std::string> known = {
        {0, "/"},
        {5, "/courses/syllabisearch.asp"},
        {18, "/advising/"},
        {19, "/programs/2002/gradse2002.asp"},
        {30, "/people/facultyinfo.asp"},
        {33, "/courses/schedule.asp"},
        {43, "/news/"},
        {58, "/programs/"},
        {61, "/advising/scholarship_finder.asp"},
        {64, "/news/news.asp"},
        {85, "/programs/courses.asp"},
    };
    if (auto it = known.find(id.value); it != known.end())
        return it->second;
    return "/page" + std::to_string(id.value) + ".asp";
}

inline PageId pid(std::uint32_t v) { return PageId{v}; }

inline std::vector<PageId> ids(std::initializer_list<std::uint32_t> vs)
{
    std::vector<PageId> out;
    for (auto v : vs)
        out.push_back(PageId{v});
    return out;
}

inline Visit visit(PageId page, std::optional<PageId> referer, std::int64_t t)
{
    Visit v;
    v.timestamp = t;
    v.page = page_path(page);
    v.page_id = page;
    v.referer_id = referer;
    v.referer_page = referer ? page_path(*referer) : std::string(kAbsent);
    return v;
}

struct Edge {
    std::uint32_t from, to, count;
};

/// One session whose graph has exactly `edges` (each transition repeated
/// `count` times), plus any `isolated` entry pages.
inline SessionVisits session_with(UserId user, std::uint32_t session, const std::vector<Edge>& edges,
                                  const std::vector<std::uint32_t>& isolated = {})
{
    SessionVisits s;
    s.user_id = user;
    s.session_id = session;
    std::int64_t t = 1017619200 + 100000 * static_cast<std::int64_t>(user) + 10000 * session;
    for (auto v : isolated)
        s.visits.push_back(visit(pid(v), std::nullopt, t++));
    for (const auto& e : edges)
        for (std::uint32_t i = 0; i < e.count; ++i)
            s.visits.push_back(visit(pid(e.to), pid(e.from), t++));
    return s;
}

inline SessionCorpus corpus_of(std::vector<SessionVisits> sessions)
{
    SessionCorpus c;
    std::sort(sessions.begin(), sessions.end(), [](const auto& a, const auto& b) {
        return std::tie(a.user_id, a.session_id) < std::tie(b.user_id, b.session_id);
    });
    for (const auto& s : sessions)
        for (const auto& v : s.visits) {
            c.registry.insert(v.page_id, v.page);
            if (v.referer_id)
                c.registry.insert(*v.referer_id, v.referer_page);
        }
    c.sessions = std::move(sessions);
    return c;
}

// Edge weights chosen so the sums along each path reproduce the weights of
// the user-9 pattern table (rows without repeated pages).
inline SessionVisits user9_session()
{
    return session_with(9, 1, {{0, 43, 1}, {43, 5, 2}, {5, 30, 2}, {30, 18, 1}, {18, 61, 1}, {30, 33, 2}, {30, 85, 1}});
}

/// KB holding the given clusters, sorted into cluster order, with every
/// referenced id registered.
inline KnowledgeBase make_kb(const std::map<UserId, std::vector<NavigationPattern>>& clusters,
                             std::uint64_t min_weight = 1)
{
    KnowledgeBase kb;
    kb.meta.min_weight = min_weight;
    for (const auto& [user, patterns] : clusters) {
        PatternCluster c{user, patterns};
        std::sort(c.patterns.begin(), c.patterns.end(), pattern_order);
        for (const auto& p : c.patterns)
            for (auto id : p.path)
                if (!kb.registry.contains(id))
                    kb.registry.insert(id, page_path(id));
        kb.clusters.emplace(user, std::move(c));
    }
    return kb;
}

/// Up to 5 users with up to 4 patterns each over pages 1..alphabet.
inline KnowledgeBase random_kb(std::mt19937_64& rng, std::uint32_t alphabet = 12)
{
    std::map<UserId, std::vector<NavigationPattern>> clusters;
    std::size_t users = 1 + rng() % 5;
    for (std::size_t u = 0; u < users; ++u) {
        UserId user = static_cast<UserId>(1 + rng() % 9);
        auto& patterns = clusters[user];
        std::size_t n = 1 + rng() % 4;
        while (patterns.size() < n) {
            std::vector<PageId> pages;
            for (std::uint32_t v = 1; v <= alphabet; ++v)
                pages.push_back(pid(v));
            for (std::size_t i = pages.size(); i > 1; --i)
                std::swap(pages[i - 1], pages[rng() % i]);
            pages.resize(2 + rng() % 5);
            NavigationPattern p{pages, 1 + rng() % 8};
            if (std::none_of(patterns.begin(), patterns.end(), [&](const auto& q) { return q.path == p.path; }))
                patterns.push_back(std::move(p));
        }
    }
    auto kb = make_kb(clusters);
    for (std::uint32_t v = 1; v <= alphabet; ++v)
        if (!kb.registry.contains(pid(v)))
            kb.registry.insert(pid(v), page_path(pid(v)));
    return kb;
}

} // namespace wum::testkit

#endif
