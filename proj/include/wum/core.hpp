#ifndef WUM_CORE_HPP
#define WUM_CORE_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace wum {

/// Raised for fatal conditions: unreadable input, corrupt files, violated
/// preconditions. Recoverable per-line problems are reported, not thrown.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Marker for an absent field value in logs and TSV files.
inline constexpr std::string_view kAbsent = "-";

using UserId = std::uint32_t;

/// Sequential page identifier, rendered "p<n>".
struct PageId {
    std::uint32_t value = 0;

    friend constexpr auto operator<=>(PageId, PageId) = default;

    std::string str() const { return "p" + std::to_string(value); }

    /// Accepts both "p12" and bare "12".
    static std::optional<PageId> parse(std::string_view text)
    {
        if (!text.empty() && (text.front() == 'p' || text.front() == 'P'))
            text.remove_prefix(1);
        if (text.empty())
            return std::nullopt;
        std::uint32_t v = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || ptr != text.data() + text.size())
            return std::nullopt;
        return PageId{v};
    }
};

struct PageIdHash {
    std::size_t operator()(PageId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};

// String helpers shared by the parsers and writers.

inline std::string to_lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline bool iequals(std::string_view a, std::string_view b)
{
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
               return std::tolower(x) == std::tolower(y);
           });
}

inline bool iends_with(std::string_view s, std::string_view suffix)
{
    return s.size() >= suffix.size() && iequals(s.substr(s.size() - suffix.size()), suffix);
}

/// Splits on runs of spaces and tabs; never yields empty tokens.
inline std::vector<std::string_view> split_ws(std::string_view line)
{
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t'))
            ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t')
            ++i;
        if (i > start)
            tokens.push_back(line.substr(start, i - start));
    }
    return tokens;
}

/// Splits on a single delimiter, keeping empty fields.
inline std::vector<std::string_view> split(std::string_view s, char delim)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        std::size_t pos = s.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

template <class Int>
std::optional<Int> parse_int(std::string_view text)
{
    Int v{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
        return std::nullopt;
    return v;
}

inline std::string join_ids(const std::vector<PageId>& ids, char delim = ',')
{
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i)
            out += delim;
        out += ids[i].str();
    }
    return out;
}

inline std::optional<std::vector<PageId>> parse_id_list(std::string_view text, char delim = ',')
{
    std::vector<PageId> ids;
    if (text.empty())
        return ids;
    for (auto tok : split(text, delim)) {
        auto id = PageId::parse(tok);
        if (!id)
            return std::nullopt;
        ids.push_back(*id);
    }
    return ids;
}

inline bool valid_utf8(std::string_view s)
{
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        std::size_t extra = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            extra = 1;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            extra = 2;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            extra = 3;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + extra >= s.size())
            return false;
        for (std::size_t k = 1; k <= extra; ++k) {
            auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80)
                return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        // overlong forms, surrogates, out of range
        if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000) ||
            (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF)
            return false;
        i += extra + 1;
    }
    return true;
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). fn must only write to slot i of its output.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn)
{
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> workers;
        workers.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            workers.emplace_back([&, t] {
                try {
                    for (std::size_t i = t; i < n; i += threads)
                        fn(i);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace wum

#endif
