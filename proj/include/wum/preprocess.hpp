#ifndef WUM_PREPROCESS_HPP
#define WUM_PREPROCESS_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wum/core.hpp"
#include "wum/log_ingest.hpp"

namespace wum {

struct PreprocessOptions {
    std::vector<std::string> filtered_suffixes{".gif", ".jpeg", ".jpg", ".css"};
    std::int64_t session_timeout_s = 1800;
    // Referers pointing at a host other than the record's cs-host become "-".
    bool external_referer_as_dash = true;
};

/// A cleansed record with its content-retrieved page and referer page.
struct CleanRecord {
    LogRecord log;
    std::string page;
    std::string referer_page;  // canonical path or "-"
    UserId user_id = 0;

    bool operator==(const CleanRecord&) const = default;
};

struct UserKey {
    std::string c_ip;
    std::string user_agent;

    auto operator<=>(const UserKey&) const = default;
};

struct Session {
    std::uint32_t session_id = 0;
    UserId user_id = 0;
    std::vector<CleanRecord> records;

    bool operator==(const Session&) const = default;
};

struct PreprocessStats {
    std::size_t records_in = 0;
    std::size_t records_out = 0;
    std::size_t removed_by_suffix = 0;
    std::size_t removed_by_status = 0;
    std::size_t users = 0;
    std::size_t sessions = 0;
    // Non-initial records whose referer is not an earlier page of the same session.
    std::size_t broken_chain = 0;

    double reduction_fraction() const
    {
        return records_in == 0 ? 0.0
                               : 1.0 - static_cast<double>(records_out) / static_cast<double>(records_in);
    }
};

namespace detail {

// Position just past "scheme://" if `uri` is an absolute URL.
inline std::optional<std::size_t> authority_start(std::string_view uri)
{
    auto pos = uri.find("://");
    if (pos == std::string_view::npos || pos == 0)
        return std::nullopt;
    if (uri.substr(0, pos).find_first_of("/?#") != std::string_view::npos)
        return std::nullopt;
    return pos + 3;
}

inline std::string_view strip_port(std::string_view host)
{
    auto colon = host.rfind(':');
    return colon == std::string_view::npos ? host : host.substr(0, colon);
}

} // namespace detail

/// Host part of an absolute URL, lower-cased and without port; nullopt for relative URIs.
inline std::optional<std::string> uri_host(std::string_view uri)
{
    auto start = detail::authority_start(uri);
    if (!start)
        return std::nullopt;
    auto rest = uri.substr(*start);
    auto end = rest.find_first_of("/?#");
    return to_lower(detail::strip_port(rest.substr(0, end)));
}

/// Reduces a request URI (or full referer URL) to its canonical page path:
/// scheme and host removed, query and fragment removed, lower-cased.
/// The query column carries parameters only and does not change the page.
inline std::string retrieve_content(std::string_view uri_stem, std::string_view uri_query = kAbsent)
{
    (void)uri_query;
    if (uri_stem.empty() || uri_stem == kAbsent)
        return std::string(kAbsent);
    std::string_view s = uri_stem;
    if (auto start = detail::authority_start(s)) {
        s = s.substr(*start);
        auto path = s.find_first_of("/?#");
        s = path == std::string_view::npos ? std::string_view{} : s.substr(path);
    }
    s = s.substr(0, s.find_first_of("?#"));
    if (s.empty())
        return "/";
    return to_lower(s);
}

/// Canonical referer page for a record: "-" stays "-"; off-site referers
/// map to "-" when `external_as_dash` is set.
inline std::string canonical_referer(std::string_view referer, std::string_view cs_host, bool external_as_dash)
{
    if (referer.empty() || referer == kAbsent)
        return std::string(kAbsent);
    if (external_as_dash) {
        auto host = uri_host(referer);
        if (host && *host != to_lower(detail::strip_port(cs_host)))
            return std::string(kAbsent);
    }
    return retrieve_content(referer);
}

inline bool has_filtered_suffix(std::string_view uri_stem, const std::vector<std::string>& suffixes)
{
    std::string page = retrieve_content(uri_stem);
    return std::any_of(suffixes.begin(), suffixes.end(),
                       [&](const std::string& suf) { return iends_with(page, suf); });
}

/// Drops static-asset requests and non-2xx responses, preserving order.
/// A record matching both filters is counted under removed_by_suffix.
inline std::pair<std::vector<LogRecord>, PreprocessStats> cleanse(std::vector<LogRecord> records,
                                                                 const PreprocessOptions& opts = {})
{
    PreprocessStats stats;
    stats.records_in = records.size();
    std::vector<LogRecord> kept;
    kept.reserve(records.size());
    for (auto& r : records) {
        if (has_filtered_suffix(r.cs_uri_stem, opts.filtered_suffixes))
            ++stats.removed_by_suffix;
        else if (r.sc_status < 200 || r.sc_status > 299)
            ++stats.removed_by_status;
        else
            kept.push_back(std::move(r));
    }
    stats.records_out = kept.size();
    return {std::move(kept), stats};
}

inline CleanRecord to_clean_record(LogRecord r, const PreprocessOptions& opts = {})
{
    CleanRecord c;
    c.page = retrieve_content(r.cs_uri_stem, r.cs_uri_query);
    c.referer_page = canonical_referer(r.cs_referer, r.cs_host, opts.external_referer_as_dash);
    c.log = std::move(r);
    return c;
}

/// Numbers users 1, 2, 3, ... by first appearance of their (c-ip, user-agent)
/// pair and stamps each record with its user id.
inline std::map<UserKey, UserId> identify_users(std::vector<CleanRecord>& records)
{
    std::map<UserKey, UserId> ids;
    for (auto& r : records) {
        UserKey key{r.log.c_ip, r.log.cs_user_agent};
        auto [it, inserted] = ids.try_emplace(std::move(key), static_cast<UserId>(ids.size() + 1));
        r.user_id = it->second;
    }
    return ids;
}

/// Splits one user's time-ordered records into sessions. A session starts at
/// the first record, at any record whose referer is "-", and after any gap
/// strictly longer than `timeout_s`.
inline std::vector<Session> sessionize(std::span<const CleanRecord> user_records, std::int64_t timeout_s = 1800)
{
    std::vector<Session> sessions;
    const CleanRecord* prev = nullptr;
    for (const auto& r : user_records) {
        bool fresh = prev == nullptr || r.referer_page == kAbsent || r.log.timestamp - prev->log.timestamp > timeout_s;
        if (fresh) {
            Session s;
            s.session_id = static_cast<std::uint32_t>(sessions.size() + 1);
            s.user_id = r.user_id;
            sessions.push_back(std::move(s));
        }
        sessions.back().records.push_back(r);
        prev = &r;
    }
    return sessions;
}

/// Path completion: a session's entry record carries no referer.
inline Session complete_paths(Session session)
{
    if (session.records.empty())
        throw Error("complete_paths: empty session");
    auto& first = session.records.front();
    if (first.referer_page != kAbsent && first.page != kAbsent)
        first.referer_page = std::string(kAbsent);
    return session;
}

inline std::size_t count_broken_chain(const Session& s)
{
    std::size_t broken = 0;
    std::set<std::string_view> seen;
    for (std::size_t i = 0; i < s.records.size(); ++i) {
        const auto& r = s.records[i];
        if (i > 0 && !seen.count(r.referer_page))
            ++broken;
        seen.insert(r.page);
    }
    return broken;
}

struct PreprocessResult {
    std::vector<Session> sessions;  // ordered by (user_id, session_id)
    PreprocessStats stats;
};

/// cleanse -> content retrieval -> user identification -> sessionization -> path completion.
inline PreprocessResult preprocess_pipeline(std::vector<LogRecord> records, const PreprocessOptions& opts = {})
{
    auto [kept, stats] = cleanse(std::move(records), opts);

    std::vector<CleanRecord> clean;
    clean.reserve(kept.size());
    for (auto& r : kept)
        clean.push_back(to_clean_record(std::move(r), opts));

    auto users = identify_users(clean);
    stats.users = users.size();

    std::vector<std::vector<CleanRecord>> by_user(users.size());
    for (auto& r : clean)
        by_user[r.user_id - 1].push_back(std::move(r));

    PreprocessResult result;
    for (auto& recs : by_user) {
        std::stable_sort(recs.begin(), recs.end(), [](const CleanRecord& a, const CleanRecord& b) {
            return a.log.timestamp < b.log.timestamp;
        });
        for (auto& s : sessionize(recs, opts.session_timeout_s)) {
            result.sessions.push_back(complete_paths(std::move(s)));
            stats.broken_chain += count_broken_chain(result.sessions.back());
        }
    }
    stats.sessions = result.sessions.size();
    result.stats = stats;
    return result;
}

/// Flattens sessions back into log records (page as uri-stem, referer page as
/// referer), in session order.
inline std::vector<LogRecord> to_log_records(std::span<const Session> sessions)
{
    std::vector<LogRecord> out;
    for (const auto& s : sessions)
        for (const auto& r : s.records) {
            LogRecord l = r.log;
            l.cs_uri_stem = r.page;
            l.cs_uri_query = std::string(kAbsent);
            l.cs_referer = r.referer_page;
            out.push_back(std::move(l));
        }
    return out;
}

} // namespace wum

#endif
