#ifndef WUM_LOG_INGEST_HPP
#define WUM_LOG_INGEST_HPP

#include <zlib.h>

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wum/core.hpp"

namespace wum {

// W3C extended log fields written by IIS, in default order.
enum class Field : std::uint8_t {
    date,
    time,
    c_ip,
    cs_username,
    s_sitename,
    s_computername,
    s_ip,
    s_port,
    cs_method,
    cs_uri_stem,
    cs_uri_query,
    sc_status,
    time_taken,
    cs_version,
    cs_host,
    cs_user_agent,
    cs_referer,
    unknown,
};

inline constexpr std::size_t kFieldCount = 17;

inline constexpr std::array<std::string_view, kFieldCount> kFieldNames = {
    "date",      "time",         "c-ip",      "cs-username", "s-sitename", "s-computername",
    "s-ip",      "s-port",       "cs-method", "cs-uri-stem", "cs-uri-query", "sc-status",
    "time-taken", "cs-version",  "cs-host",   "cs(User-Agent)", "cs(Referer)",
};

using FieldOrder = std::vector<Field>;

inline FieldOrder default_field_order()
{
    FieldOrder order;
    for (std::size_t i = 0; i < kFieldCount; ++i)
        order.push_back(static_cast<Field>(i));
    return order;
}

inline Field field_from_name(std::string_view name)
{
    for (std::size_t i = 0; i < kFieldCount; ++i)
        if (iequals(name, kFieldNames[i]))
            return static_cast<Field>(i);
    return Field::unknown;
}

/// One parsed access-log entry. Absent text values are "-", never "".
struct LogRecord {
    std::string date;  // YYYY-MM-DD
    std::string time;  // HH:MM:SS, UTC
    std::int64_t timestamp = 0;  // seconds since epoch, derived from date + time
    std::string c_ip;
    std::string cs_username;
    std::string s_sitename;
    std::string s_computername;
    std::string s_ip;
    int s_port = 80;
    std::string cs_method;
    std::string cs_uri_stem;
    std::string cs_uri_query;
    int sc_status = 0;
    std::int64_t time_taken = 0;
    std::string cs_version;
    std::string cs_host;
    std::string cs_user_agent;
    std::string cs_referer;

    bool operator==(const LogRecord&) const = default;
};

/// Seconds since epoch for "YYYY-MM-DD" + "HH:MM:SS", or nullopt if either is malformed.
inline std::optional<std::int64_t> parse_timestamp(std::string_view date, std::string_view time)
{
    using namespace std::chrono;
    if (date.size() != 10 || date[4] != '-' || date[7] != '-')
        return std::nullopt;
    if (time.size() != 8 || time[2] != ':' || time[5] != ':')
        return std::nullopt;
    auto y = parse_int<int>(date.substr(0, 4));
    auto mo = parse_int<unsigned>(date.substr(5, 2));
    auto d = parse_int<unsigned>(date.substr(8, 2));
    auto hh = parse_int<int>(time.substr(0, 2));
    auto mm = parse_int<int>(time.substr(3, 2));
    auto ss = parse_int<int>(time.substr(6, 2));
    if (!y || !mo || !d || !hh || !mm || !ss)
        return std::nullopt;
    year_month_day ymd{year{*y}, month{*mo}, day{*d}};
    if (!ymd.ok() || *hh > 23 || *mm > 59 || *ss > 59)
        return std::nullopt;
    auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<std::int64_t>(days) * 86400 + *hh * 3600 + *mm * 60 + *ss;
}

namespace detail {

template <class Record>
auto text_field(Record& r, Field f) -> decltype(&r.date)
{
    switch (f) {
    case Field::date: return &r.date;
    case Field::time: return &r.time;
    case Field::c_ip: return &r.c_ip;
    case Field::cs_username: return &r.cs_username;
    case Field::s_sitename: return &r.s_sitename;
    case Field::s_computername: return &r.s_computername;
    case Field::s_ip: return &r.s_ip;
    case Field::cs_method: return &r.cs_method;
    case Field::cs_uri_stem: return &r.cs_uri_stem;
    case Field::cs_uri_query: return &r.cs_uri_query;
    case Field::cs_version: return &r.cs_version;
    case Field::cs_host: return &r.cs_host;
    case Field::cs_user_agent: return &r.cs_user_agent;
    case Field::cs_referer: return &r.cs_referer;
    default: return nullptr;
    }
}

inline bool starts_with_ci(std::string_view s, std::string_view prefix)
{
    return s.size() >= prefix.size() && iequals(s.substr(0, prefix.size()), prefix);
}

} // namespace detail

enum class LineKind { record, directive, skipped };

struct ParsedLine {
    LineKind kind = LineKind::skipped;
    LogRecord record;
    std::string skip_reason;        // set when kind == skipped
    std::string directive_warning;  // set for rejected "#Fields:" directives
};

/// Parses one physical log line. A "#Fields:" directive naming all known
/// fields replaces `field_order` for subsequent lines.
inline ParsedLine parse_log_line(std::string_view line, FieldOrder& field_order)
{
    ParsedLine out;
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);

    if (!line.empty() && line.front() == '#') {
        out.kind = LineKind::directive;
        if (detail::starts_with_ci(line, "#Fields:")) {
            FieldOrder order;
            std::array<bool, kFieldCount> seen{};
            for (auto tok : split_ws(line.substr(8))) {
                Field f = field_from_name(tok);
                if (f != Field::unknown)
                    seen[static_cast<std::size_t>(f)] = true;
                order.push_back(f);
            }
            if (std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
                field_order = std::move(order);
            else
                out.directive_warning = "fields-directive-incomplete";
        }
        return out;
    }

    auto skip = [&](std::string reason) {
        out.kind = LineKind::skipped;
        out.skip_reason = std::move(reason);
        return out;
    };

    if (!valid_utf8(line))
        return skip("invalid-utf8");
    auto tokens = split_ws(line);
    if (tokens.empty())
        return skip("blank-line");
    if (tokens.size() != field_order.size())
        return skip("field-count-mismatch");

    LogRecord& r = out.record;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        Field f = field_order[i];
        if (f == Field::unknown)
            continue;
        if (f == Field::s_port) {
            auto v = parse_int<int>(tokens[i]);
            if (!v || *v < 1 || *v > 65535)
                return skip("bad-port");
            r.s_port = *v;
        } else if (f == Field::sc_status) {
            auto v = parse_int<int>(tokens[i]);
            if (!v)
                return skip("bad-status");
            r.sc_status = *v;
        } else if (f == Field::time_taken) {
            auto v = parse_int<std::int64_t>(tokens[i]);
            if (!v)
                return skip("bad-time-taken");
            r.time_taken = *v;
        } else {
            *detail::text_field(r, f) = std::string(tokens[i]);
        }
    }
    auto ts = parse_timestamp(r.date, r.time);
    if (!ts)
        return skip("bad-timestamp");
    r.timestamp = *ts;
    out.kind = LineKind::record;
    return out;
}

/// Inverse of parse_log_line for a given field order; unknown fields are written as "-".
inline std::string serialize_log_record(const LogRecord& r, const FieldOrder& order)
{
    std::string out;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i)
            out += ' ';
        Field f = order[i];
        switch (f) {
        case Field::s_port: out += std::to_string(r.s_port); break;
        case Field::sc_status: out += std::to_string(r.sc_status); break;
        case Field::time_taken: out += std::to_string(r.time_taken); break;
        case Field::unknown: out += kAbsent; break;
        default: out += *detail::text_field(r, f); break;
        }
    }
    return out;
}

struct ParseReport {
    std::size_t lines_total = 0;
    std::size_t records_ok = 0;
    std::size_t lines_skipped = 0;
    std::size_t directives = 0;
    std::size_t timestamp_regressions = 0;  // warning only
    std::map<std::string, std::size_t> skip_reasons;
    std::map<std::string, std::size_t> warnings;

    bool consistent() const { return lines_total == records_ok + lines_skipped + directives; }

    ParseReport& operator+=(const ParseReport& o)
    {
        lines_total += o.lines_total;
        records_ok += o.records_ok;
        lines_skipped += o.lines_skipped;
        directives += o.directives;
        timestamp_regressions += o.timestamp_regressions;
        for (auto& [k, v] : o.skip_reasons)
            skip_reasons[k] += v;
        for (auto& [k, v] : o.warnings)
            warnings[k] += v;
        return *this;
    }
};

namespace detail {

// Streaming state shared by the istream and gzip readers.
template <class Sink>
class LineParser {
public:
    explicit LineParser(Sink& sink) : sink_(sink) {}

    void feed(std::string_view line)
    {
        ++report_.lines_total;
        ParsedLine p = parse_log_line(line, order_);
        switch (p.kind) {
        case LineKind::directive:
            ++report_.directives;
            if (!p.directive_warning.empty())
                ++report_.warnings[p.directive_warning];
            break;
        case LineKind::skipped:
            ++report_.lines_skipped;
            ++report_.skip_reasons[p.skip_reason];
            break;
        case LineKind::record:
            ++report_.records_ok;
            if (have_last_ && p.record.timestamp < last_ts_)
                ++report_.timestamp_regressions;
            last_ts_ = p.record.timestamp;
            have_last_ = true;
            sink_(std::move(p.record));
            break;
        }
    }

    ParseReport report() const
    {
        ParseReport r = report_;
        if (r.timestamp_regressions)
            r.warnings["timestamp-regression"] = r.timestamp_regressions;
        return r;
    }

private:
    Sink& sink_;
    FieldOrder order_ = default_field_order();
    ParseReport report_;
    std::int64_t last_ts_ = 0;
    bool have_last_ = false;
};

} // namespace detail

/// Streams records from `in` into `sink(LogRecord&&)` in file order.
/// Throws Error with the byte offset if the stream becomes unreadable.
template <class Sink>
ParseReport parse_log_stream(std::istream& in, Sink&& sink)
{
    detail::LineParser<std::remove_reference_t<Sink>> parser(sink);
    std::string line;
    std::uint64_t offset = 0;
    while (std::getline(in, line)) {
        parser.feed(line);
        offset += line.size() + 1;
    }
    if (in.bad())
        throw Error("log read failed at byte offset " + std::to_string(offset));
    return parser.report();
}

inline bool is_gzip_file(const std::filesystem::path& path)
{
    std::ifstream f(path, std::ios::binary);
    unsigned char magic[2] = {0, 0};
    f.read(reinterpret_cast<char*>(magic), 2);
    return f.gcount() == 2 && magic[0] == 0x1F && magic[1] == 0x8B;
}

/// Streams a log file, transparently decompressing gzip input (magic 1F 8B).
template <class Sink>
ParseReport parse_log_file(const std::filesystem::path& path, Sink&& sink)
{
    if (!std::filesystem::exists(path))
        throw Error("cannot open log file: " + path.string());
    if (!is_gzip_file(path)) {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw Error("cannot open log file: " + path.string());
        return parse_log_stream(in, sink);
    }

    gzFile gz = gzopen(path.string().c_str(), "rb");
    if (!gz)
        throw Error("cannot open gzip log file: " + path.string());
    struct Closer {
        gzFile f;
        ~Closer() { gzclose(f); }
    } closer{gz};

    detail::LineParser<std::remove_reference_t<Sink>> parser(sink);
    std::vector<char> buf(1 << 16);
    std::string pending;
    std::uint64_t offset = 0;
    for (;;) {
        int n = gzread(gz, buf.data(), static_cast<unsigned>(buf.size()));
        if (n < 0) {
            int code = 0;
            const char* msg = gzerror(gz, &code);
            throw Error("gzip read failed in " + path.string() + " at byte offset " +
                        std::to_string(offset) + ": " + (msg ? msg : "unknown"));
        }
        if (n == 0)
            break;
        std::string_view chunk(buf.data(), static_cast<std::size_t>(n));
        std::size_t start = 0;
        for (std::size_t nl; (nl = chunk.find('\n', start)) != std::string_view::npos; start = nl + 1) {
            pending.append(chunk.substr(start, nl - start));
            parser.feed(pending);
            offset += pending.size() + 1;
            pending.clear();
        }
        pending.append(chunk.substr(start));
    }
    if (!pending.empty())
        parser.feed(pending);
    return parser.report();
}

/// Convenience: collect all records from a stream.
inline std::pair<std::vector<LogRecord>, ParseReport> read_log_records(std::istream& in)
{
    std::vector<LogRecord> records;
    auto report = parse_log_stream(in, [&](LogRecord&& r) { records.push_back(std::move(r)); });
    return {std::move(records), report};
}

} // namespace wum

#endif
