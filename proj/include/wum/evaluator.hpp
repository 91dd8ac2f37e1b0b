#ifndef WUM_EVALUATOR_HPP
#define WUM_EVALUATOR_HPP

#include <cmath>
#include <cstdio>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wum/core.hpp"
#include "wum/knowledge_base.hpp"
#include "wum/recommender.hpp"
#include "wum/sessions.hpp"

namespace wum {

/// |distinct(captured) ∩ distinct(original)| / |distinct(captured)|;
/// nullopt when nothing was captured.
inline std::optional<double> accuracy(std::span<const PageId> captured, std::span<const PageId> original)
{
    std::set<PageId> cap(captured.begin(), captured.end());
    if (cap.empty())
        return std::nullopt;
    std::set<PageId> orig(original.begin(), original.end());
    std::size_t hits = 0;
    for (auto id : cap)
        hits += orig.count(id);
    return static_cast<double>(hits) / static_cast<double>(cap.size());
}

/// "66.6667%" style rendering, four decimals.
inline std::string format_percent(double ratio)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f%%", ratio * 100.0);
    return buf;
}

enum class ListPart { history, unvisited, combined };

inline std::string_view to_string(ListPart p)
{
    switch (p) {
    case ListPart::history: return "history";
    case ListPart::unvisited: return "unvisited";
    case ListPart::combined: return "combined";
    }
    return "combined";
}

inline ListPart parse_list_part(std::string_view s)
{
    if (s == "history")
        return ListPart::history;
    if (s == "unvisited")
        return ListPart::unvisited;
    if (s == "combined")
        return ListPart::combined;
    throw Error("unknown list part '" + std::string(s) + "' (history|unvisited|combined)");
}

enum class EvalStatus { ok, no_recommendation, skipped_short, skipped_unknown_page };

inline std::string_view to_string(EvalStatus s)
{
    switch (s) {
    case EvalStatus::ok: return "ok";
    case EvalStatus::no_recommendation: return "no_recommendation";
    case EvalStatus::skipped_short: return "skipped_short";
    case EvalStatus::skipped_unknown_page: return "skipped_unknown_page";
    }
    return "ok";
}

struct UserAccuracy {
    UserId user_id = 0;
    EvalStatus status = EvalStatus::ok;
    std::size_t page_views = 0;  // distinct original page views
    std::size_t lsw_size = 0;
    std::size_t captured = 0;    // distinct captured pages
    std::size_t hits = 0;        // distinct captured pages also in the original
    std::optional<double> accuracy;

    bool operator==(const UserAccuracy&) const = default;
};

struct AccuracyReport {
    std::string lsw;
    ListPart part = ListPart::combined;
    std::vector<UserAccuracy> per_user;  // ascending user id

    std::size_t count(EvalStatus s) const
    {
        std::size_t n = 0;
        for (const auto& u : per_user)
            n += u.status == s;
        return n;
    }

    /// Arithmetic mean over users with a non-empty captured list.
    std::optional<double> mean_accuracy() const
    {
        double sum = 0;
        std::size_t n = 0;
        for (const auto& u : per_user)
            if (u.accuracy) {
                sum += *u.accuracy;
                ++n;
            }
        if (n == 0)
            return std::nullopt;
        return sum / static_cast<double>(n);
    }

    bool operator==(const AccuracyReport&) const = default;
};

struct EvalOptions {
    LswSize lsw = LswSize::fraction(0.1);
    ListPart part = ListPart::combined;
    RecommendOptions recommend;
    unsigned threads = 0;
};

/// A user's distinct page views in time order, resolved by path against the
/// KB registry (nullopt for pages the KB has never seen).
inline std::vector<std::optional<PageId>> original_page_views(std::span<const SessionVisits> sessions,
                                                              const PageRegistry& registry)
{
    std::vector<std::optional<PageId>> out;
    std::set<std::string_view> seen;
    for (const auto& s : sessions)
        for (const auto& v : s.visits)
            if (seen.insert(v.page).second)
                out.push_back(registry.lookup(v.page));
    return out;
}

inline UserAccuracy evaluate_user(const KnowledgeBase& kb, UserId user, std::span<const SessionVisits> sessions,
                                  const EvalOptions& opts)
{
    UserAccuracy row;
    row.user_id = user;
    auto views = original_page_views(sessions, kb.registry);
    row.page_views = views.size();
    std::size_t n = views.empty() ? 0 : opts.lsw.resolve(views.size());
    row.lsw_size = n;
    if (views.empty() || n > views.size()) {
        row.status = EvalStatus::skipped_short;
        return row;
    }
    std::vector<PageId> original;
    for (const auto& v : views)
        if (v)
            original.push_back(*v);
    for (std::size_t i = 0; i < n; ++i)
        if (!views[i]) {
            row.status = EvalStatus::skipped_unknown_page;
            return row;
        }
    std::vector<PageId> window;
    for (std::size_t i = 0; i < n; ++i)
        window.push_back(*views[i]);

    auto list = recommend(LiveSessionWindow(user, std::move(window), kb.registry), kb, opts.recommend);
    std::vector<PageId> captured;
    switch (opts.part) {
    case ListPart::history: captured = list.history.ids(); break;
    case ListPart::unvisited: captured = list.unvisited.ids(); break;
    case ListPart::combined: captured = list.combined(); break;
    }
    std::set<PageId> cap(captured.begin(), captured.end());
    std::set<PageId> orig(original.begin(), original.end());
    row.captured = cap.size();
    for (auto id : cap)
        row.hits += orig.count(id);
    row.accuracy = accuracy(captured, original);
    row.status = row.accuracy ? EvalStatus::ok : EvalStatus::no_recommendation;
    return row;
}

/// Replays every user of `sessions`: window = prefix of their page views,
/// captured = recommendation list, scored against their full page views.
inline AccuracyReport replay_evaluate(const KnowledgeBase& kb, const SessionCorpus& sessions,
                                      const EvalOptions& opts = {})
{
    AccuracyReport report;
    report.lsw = opts.lsw.str();
    report.part = opts.part;
    auto users = sessions.by_user();
    report.per_user.resize(users.size());
    parallel_for(users.size(), opts.threads, [&](std::size_t i) {
        report.per_user[i] = evaluate_user(kb, users[i].first, users[i].second, opts);
    });
    return report;
}

/// Splits each user's sessions: the first round(train_fraction * k) go to
/// training, the rest are held out. Registries are shared.
inline std::pair<SessionCorpus, SessionCorpus> split_sessions(const SessionCorpus& corpus, double train_fraction)
{
    if (!(train_fraction > 0.0 && train_fraction <= 1.0))
        throw Error("train fraction must be in (0, 1]");
    SessionCorpus train, test;
    train.registry = corpus.registry;
    test.registry = corpus.registry;
    for (const auto& [user, sessions] : corpus.by_user()) {
        auto k = sessions.size();
        auto n_train = std::min<std::size_t>(k, static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(k))));
        for (std::size_t i = 0; i < k; ++i)
            (i < n_train ? train : test).sessions.push_back(sessions[i]);
    }
    return {std::move(train), std::move(test)};
}

inline std::string render_report_tsv(const AccuracyReport& r)
{
    std::ostringstream out;
    out << "#accuracy v1\tlsw=" << r.lsw << "\tpart=" << to_string(r.part) << '\n';
    out << "#user_id\tstatus\tpage_views\tlsw_size\tcaptured\thits\taccuracy\n";
    for (const auto& u : r.per_user)
        out << u.user_id << '\t' << to_string(u.status) << '\t' << u.page_views << '\t' << u.lsw_size << '\t'
            << u.captured << '\t' << u.hits << '\t' << (u.accuracy ? format_percent(*u.accuracy) : "NA") << '\n';
    auto mean = r.mean_accuracy();
    out << "#aggregate\tusers=" << r.per_user.size() << "\tevaluated=" << r.count(EvalStatus::ok)
        << "\tno_recommendation=" << r.count(EvalStatus::no_recommendation)
        << "\tskipped=" << r.count(EvalStatus::skipped_short) + r.count(EvalStatus::skipped_unknown_page)
        << "\tmean_accuracy=" << (mean ? format_percent(*mean) : "NA") << '\n';
    return out.str();
}

inline std::string render_report_csv(const AccuracyReport& r)
{
    std::ostringstream out;
    out << "lsw,part,user_id,status,page_views,lsw_size,captured,hits,accuracy\n";
    for (const auto& u : r.per_user) {
        out << r.lsw << ',' << to_string(r.part) << ',' << u.user_id << ',' << to_string(u.status) << ','
            << u.page_views << ',' << u.lsw_size << ',' << u.captured << ',' << u.hits << ',';
        if (u.accuracy) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6f", *u.accuracy);
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

} // namespace wum

#endif
