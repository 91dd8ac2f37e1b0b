#ifndef WUM_SESSIONS_HPP
#define WUM_SESSIONS_HPP

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wum/core.hpp"
#include "wum/page_registry.hpp"
#include "wum/preprocess.hpp"

namespace wum {

/// One page view of a sessionized corpus, with registry ids resolved.
struct Visit {
    std::int64_t timestamp = 0;
    std::string page;
    std::string referer_page;  // "-" when absent
    PageId page_id;
    std::optional<PageId> referer_id;

    bool operator==(const Visit&) const = default;
};

struct SessionVisits {
    UserId user_id = 0;
    std::uint32_t session_id = 0;
    std::vector<Visit> visits;

    bool operator==(const SessionVisits&) const = default;
};

/// Sessionized corpus as exchanged between the preprocess and mine stages.
struct SessionCorpus {
    static constexpr std::string_view kHeader =
        "#session_id\tuser_id\ttimestamp_epoch_s\tpage\treferer_page\tpage_id\treferer_page_id";

    PageRegistry registry;
    std::vector<SessionVisits> sessions;  // ordered by (user_id, session_id)

    bool operator==(const SessionCorpus&) const = default;

    /// Contiguous per-user runs of `sessions`, by ascending user id.
    std::vector<std::pair<UserId, std::span<const SessionVisits>>> by_user() const
    {
        std::vector<std::pair<UserId, std::span<const SessionVisits>>> out;
        std::size_t i = 0;
        while (i < sessions.size()) {
            std::size_t j = i;
            while (j < sessions.size() && sessions[j].user_id == sessions[i].user_id)
                ++j;
            out.emplace_back(sessions[i].user_id, std::span<const SessionVisits>(sessions).subspan(i, j - i));
            i = j;
        }
        return out;
    }

    std::int64_t latest_timestamp() const
    {
        std::int64_t latest = 0;
        for (const auto& s : sessions)
            for (const auto& v : s.visits)
                latest = std::max(latest, v.timestamp);
        return latest;
    }
};

/// Assigns page ids in stream order (each record's page, then its referer page).
inline SessionCorpus index_sessions(std::span<const Session> sessions, PageRegistry registry = {})
{
    SessionCorpus corpus;
    corpus.registry = std::move(registry);
    corpus.sessions.reserve(sessions.size());
    for (const auto& s : sessions) {
        SessionVisits sv{s.user_id, s.session_id, {}};
        for (const auto& r : s.records) {
            Visit v;
            v.timestamp = r.log.timestamp;
            v.page = r.page;
            v.referer_page = r.referer_page;
            v.page_id = corpus.registry.assign(r.page);
            if (r.referer_page != kAbsent)
                v.referer_id = corpus.registry.assign(r.referer_page);
            sv.visits.push_back(std::move(v));
        }
        corpus.sessions.push_back(std::move(sv));
    }
    return corpus;
}

inline void write_sessions_tsv(std::ostream& out, const SessionCorpus& corpus)
{
    out << SessionCorpus::kHeader << '\n';
    for (const auto& s : corpus.sessions)
        for (const auto& v : s.visits)
            out << s.session_id << '\t' << s.user_id << '\t' << v.timestamp << '\t' << v.page << '\t'
                << v.referer_page << '\t' << v.page_id.str() << '\t'
                << (v.referer_id ? v.referer_id->str() : std::string(kAbsent)) << '\n';
}

/// Reads a sessions TSV, rebuilding the registry from its id columns.
inline SessionCorpus read_sessions_tsv(std::istream& in)
{
    SessionCorpus corpus;
    std::map<std::pair<UserId, std::uint32_t>, std::vector<Visit>> grouped;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.front() == '#')
            continue;
        auto where = [&] { return "sessions line " + std::to_string(lineno) + ": "; };
        auto cols = split(line, '\t');
        if (cols.size() != 7)
            throw Error(where() + "expected 7 columns, got " + std::to_string(cols.size()));
        auto session_id = parse_int<std::uint32_t>(cols[0]);
        auto user_id = parse_int<UserId>(cols[1]);
        auto ts = parse_int<std::int64_t>(cols[2]);
        auto page_id = PageId::parse(cols[5]);
        if (!session_id || !user_id || !ts || !page_id)
            throw Error(where() + "malformed numeric column");
        Visit v;
        v.timestamp = *ts;
        v.page = std::string(cols[3]);
        v.referer_page = std::string(cols[4]);
        v.page_id = *page_id;
        corpus.registry.insert(v.page_id, v.page);
        if (cols[6] != kAbsent) {
            auto ref = PageId::parse(cols[6]);
            if (!ref || v.referer_page == kAbsent)
                throw Error(where() + "inconsistent referer columns");
            v.referer_id = *ref;
            corpus.registry.insert(*ref, v.referer_page);
        } else if (v.referer_page != kAbsent) {
            throw Error(where() + "referer page without id");
        }
        grouped[{*user_id, *session_id}].push_back(std::move(v));
    }
    for (auto& [key, visits] : grouped)
        corpus.sessions.push_back({key.first, key.second, std::move(visits)});
    return corpus;
}

} // namespace wum

#endif
