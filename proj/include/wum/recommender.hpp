#ifndef WUM_RECOMMENDER_HPP
#define WUM_RECOMMENDER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "wum/core.hpp"
#include "wum/knowledge_base.hpp"
#include "wum/page_registry.hpp"
#include "wum/pattern_miner.hpp"

namespace wum {

/// Live session window length: an absolute page count or a fraction of the
/// user's page views (rounded, at least one page).
class LswSize {
public:
    static LswSize count(std::size_t n)
    {
        if (n == 0)
            throw Error("live session window size must be positive");
        return LswSize(n);
    }

    static LswSize fraction(double f)
    {
        if (!(f > 0.0 && f <= 1.0))
            throw Error("live session window fraction must be in (0, 1]");
        return LswSize(f);
    }

    /// "2" is a count, "0.1" a fraction.
    static LswSize parse(std::string_view text)
    {
        if (text.find('.') == std::string_view::npos) {
            auto n = parse_int<std::size_t>(text);
            if (!n)
                throw Error("bad live session window size '" + std::string(text) + "'");
            return count(*n);
        }
        std::size_t used = 0;
        double f = 0.0;
        try {
            f = std::stod(std::string(text), &used);
        } catch (const std::logic_error&) {
            used = 0;
        }
        if (used == 0 || used != text.size())
            throw Error("bad live session window fraction '" + std::string(text) + "'");
        return fraction(f);
    }

    std::size_t resolve(std::size_t total) const
    {
        if (auto n = std::get_if<std::size_t>(&value_))
            return *n;
        double f = std::get<double>(value_);
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(f * static_cast<double>(total))));
    }

    bool is_fraction() const { return std::holds_alternative<double>(value_); }

    std::string str() const
    {
        if (auto n = std::get_if<std::size_t>(&value_))
            return std::to_string(*n);
        std::ostringstream s;
        s << std::get<double>(value_);
        std::string out = s.str();
        if (out.find('.') == std::string::npos)
            out += ".0";
        return out;
    }

private:
    explicit LswSize(std::variant<std::size_t, double> v) : value_(v) {}
    std::variant<std::size_t, double> value_;
};

/// The query of the online engine: a user and the pages of their active
/// session window. Every page must be known to the registry.
class LiveSessionWindow {
public:
    LiveSessionWindow(UserId user, std::vector<PageId> pages, const PageRegistry& registry)
        : user_(user), pages_(std::move(pages))
    {
        if (pages_.empty())
            throw Error("live session window is empty");
        for (auto id : pages_)
            if (!registry.contains(id))
                throw Error("live session window page " + id.str() + " is not in the knowledge base registry");
    }

    UserId user_id() const { return user_; }
    const std::vector<PageId>& pages() const { return pages_; }

private:
    UserId user_;
    std::vector<PageId> pages_;
};

/// Replay capture: the first `size` pages of the user's page views.
inline LiveSessionWindow capture_lsw(UserId user, std::span<const PageId> original, LswSize size,
                                     const PageRegistry& registry)
{
    if (original.empty())
        throw Error("capture_lsw: no page views for user " + std::to_string(user));
    std::size_t n = size.resolve(original.size());
    if (n > original.size())
        throw Error("capture_lsw: window of " + std::to_string(n) + " exceeds " + std::to_string(original.size()) +
                    " page views");
    return LiveSessionWindow(user, std::vector<PageId>(original.begin(), original.begin() + n), registry);
}

/// Longest common subsequence by dynamic programming. Backtrace prefers the
/// diagonal, then up (shorter a), then left (shorter b).
inline std::vector<PageId> lcs(std::span<const PageId> a, std::span<const PageId> b)
{
    const std::size_t n = a.size(), m = b.size();
    if (n == 0 || m == 0)
        return {};
    std::vector<std::uint32_t> dp((n + 1) * (m + 1), 0);
    auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& { return dp[i * (m + 1) + j]; };
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= m; ++j)
            at(i, j) = a[i - 1] == b[j - 1] ? at(i - 1, j - 1) + 1 : std::max(at(i - 1, j), at(i, j - 1));

    std::vector<PageId> out;
    out.reserve(at(n, m));
    std::size_t i = n, j = m;
    while (i > 0 && j > 0) {
        if (a[i - 1] == b[j - 1]) {
            out.push_back(a[i - 1]);
            --i;
            --j;
        } else if (at(i - 1, j) >= at(i, j - 1)) {
            --i;
        } else {
            --j;
        }
    }
    std::reverse(out.begin(), out.end());
    return out;
}

struct RecommendationEntry {
    PageId id;
    std::string uri;

    bool operator==(const RecommendationEntry&) const = default;
};

struct MatchedPattern {
    UserId user_id = 0;
    NavigationPattern pattern;
    std::vector<PageId> common;  // lcs(pattern, window)

    bool operator==(const MatchedPattern&) const = default;
};

struct RecommendationPart {
    std::vector<RecommendationEntry> entries;
    std::optional<MatchedPattern> matched;

    bool empty() const { return entries.empty(); }
    std::vector<PageId> ids() const
    {
        std::vector<PageId> out;
        for (const auto& e : entries)
            out.push_back(e.id);
        return out;
    }

    bool operator==(const RecommendationPart&) const = default;
};

inline constexpr std::string_view kHistoryLabel = "history";
inline constexpr std::string_view kUnvisitedLabel = "unvisited";

struct RecommendationList {
    UserId user_id = 0;
    std::vector<PageId> lsw;
    RecommendationPart history;    // as per the user's historical pattern
    RecommendationPart unvisited;  // compared to other users' patterns
    bool unknown_user = false;

    bool history_empty() const { return history.empty(); }
    bool no_recommendation() const { return unvisited.empty(); }

    /// History entries followed by unvisited entries.
    std::vector<PageId> combined() const
    {
        auto out = history.ids();
        for (const auto& e : unvisited.entries)
            out.push_back(e.id);
        return out;
    }

    bool operator==(const RecommendationList&) const = default;
};

struct RecommendOptions {
    bool dedupe_across_parts = false;
};

namespace detail {

struct Score {
    std::size_t overlap = 0;
    std::uint64_t weight = 0;
    auto operator<=>(const Score&) const = default;
};

// Pattern pages outside `exclude`, in pattern order.
inline RecommendationPart make_part(const KnowledgeBase& kb, UserId owner, const NavigationPattern& pattern,
                                    std::vector<PageId> common, const std::set<PageId>& exclude)
{
    RecommendationPart part;
    std::set<PageId> seen;
    for (auto id : pattern.path) {
        if (exclude.count(id) || !seen.insert(id).second)
            continue;
        part.entries.push_back({id, kb.registry.reverse(id).value_or(std::string(kAbsent))});
    }
    part.matched = MatchedPattern{owner, pattern, std::move(common)};
    return part;
}

} // namespace detail

/// Intuition pages: the user's own pattern with the longest common
/// subsequence with the window (ties: heavier, then earlier in cluster
/// order), minus the pages already in the window.
inline RecommendationPart recommend_from_history(const LiveSessionWindow& lsw, const KnowledgeBase& kb)
{
    const auto& patterns = patterns_for(kb, lsw.user_id());
    const NavigationPattern* best = nullptr;
    std::vector<PageId> best_common;
    detail::Score best_score;
    for (const auto& p : patterns) {
        auto common = lcs(p.path, lsw.pages());
        detail::Score score{common.size(), p.weight};
        if (!best || score > best_score) {
            best = &p;
            best_score = score;
            best_common = std::move(common);
        }
    }
    if (!best)
        return {};
    std::set<PageId> exclude(best_common.begin(), best_common.end());
    exclude.insert(lsw.pages().begin(), lsw.pages().end());
    return detail::make_part(kb, lsw.user_id(), *best, std::move(best_common), exclude);
}

/// Unvisited pages: among other users' patterns sharing at least one page
/// subsequence with the window, the best by (overlap, weight, user id,
/// cluster order), minus its common subsequence and the window pages.
inline RecommendationPart recommend_unvisited(const LiveSessionWindow& lsw, const KnowledgeBase& kb,
                                              const RecommendationPart& history_part = {},
                                              const RecommendOptions& opts = {})
{
    const UserPattern* best = nullptr;
    std::vector<PageId> best_common;
    detail::Score best_score;
    auto candidates = patterns_excluding(kb, lsw.user_id());
    for (const auto& c : candidates) {
        auto common = lcs(c.pattern->path, lsw.pages());
        if (common.empty())
            continue;
        detail::Score score{common.size(), c.pattern->weight};
        if (!best || score > best_score) {
            best = &c;
            best_score = score;
            best_common = std::move(common);
        }
    }
    if (!best)
        return {};
    std::set<PageId> exclude(best_common.begin(), best_common.end());
    exclude.insert(lsw.pages().begin(), lsw.pages().end());
    if (opts.dedupe_across_parts)
        for (const auto& e : history_part.entries)
            exclude.insert(e.id);
    return detail::make_part(kb, best->user_id, *best->pattern, std::move(best_common), exclude);
}

inline RecommendationList recommend(const LiveSessionWindow& lsw, const KnowledgeBase& kb,
                                    const RecommendOptions& opts = {})
{
    RecommendationList list;
    list.user_id = lsw.user_id();
    list.lsw = lsw.pages();
    list.unknown_user = !kb.clusters.count(lsw.user_id());
    list.history = recommend_from_history(lsw, kb);
    list.unvisited = recommend_unvisited(lsw, kb, list.history, opts);
    return list;
}

inline std::string render_tsv(const RecommendationList& list)
{
    std::ostringstream out;
    out << "#recommendation v1\tuser_id=" << list.user_id << "\tlsw=" << join_ids(list.lsw) << '\n';
    out << "#part_label\tpage_id\turi\n";
    for (const auto& e : list.history.entries)
        out << kHistoryLabel << '\t' << e.id.str() << '\t' << e.uri << '\n';
    for (const auto& e : list.unvisited.entries)
        out << kUnvisitedLabel << '\t' << e.id.str() << '\t' << e.uri << '\n';
    for (auto [label, part] : {std::pair{kHistoryLabel, &list.history}, std::pair{kUnvisitedLabel, &list.unvisited}})
        if (part->matched)
            out << "#matched\t" << label << "\tuser_id=" << part->matched->user_id
                << "\tpattern=" << join_ids(part->matched->pattern.path)
                << "\tweight=" << part->matched->pattern.weight
                << "\tcommon=" << join_ids(part->matched->common) << '\n';
    out << "#flags\tunknown_user=" << list.unknown_user << "\thistory_empty=" << list.history_empty()
        << "\tno_recommendation=" << list.no_recommendation() << '\n';
    return out.str();
}

/// Two-table text layout; `uri_prefix` (e.g. "http://www.example.com") is
/// prepended to each page path.
inline std::string render_text(const RecommendationList& list, std::string_view uri_prefix = {})
{
    std::ostringstream out;
    out << "Welcome User " << list.user_id << "\n\n";
    auto table = [&](const RecommendationPart& part, std::string_view caption) {
        if (part.empty()) {
            out << "Sorry !!! No Recommendation List (" << caption << ")\n\n";
            return;
        }
        out << "Recommended List (" << caption << ")\n";
        out << "Page id\tPage Uri\n";
        for (const auto& e : part.entries)
            out << e.id.str() << '\t' << uri_prefix << e.uri << '\n';
        out << '\n';
    };
    table(list.history, "as per user's historical pattern");
    table(list.unvisited, "compared to other user patterns");
    out << "Live Session Window : " << list.lsw.size() << '\n';
    return out.str();
}

} // namespace wum

#endif
