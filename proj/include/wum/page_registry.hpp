#ifndef WUM_PAGE_REGISTRY_HPP
#define WUM_PAGE_REGISTRY_HPP

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>

#include "wum/core.hpp"

namespace wum {

/// Bijection between canonical page paths and page ids.
///
/// assign() hands out p1, p2, ... in first-seen order. insert() accepts
/// externally numbered ids (including the 0-based labels some datasets use)
/// as long as the mapping stays one-to-one; later assign() calls continue
/// after the largest id present.
class PageRegistry {
public:
    static constexpr std::string_view kHeader = "#page_registry v1";

    PageId assign(std::string_view path)
    {
        check_path(path);
        if (auto it = by_path_.find(std::string(path)); it != by_path_.end())
            return it->second;
        PageId id{next_};
        add(id, std::string(path));
        return id;
    }

    /// Registers an explicit (id, path) pair. Re-inserting an identical pair is a no-op.
    void insert(PageId id, std::string_view path)
    {
        check_path(path);
        auto by_id = by_id_.find(id);
        auto by_path = by_path_.find(std::string(path));
        if (by_id != by_id_.end() || by_path != by_path_.end()) {
            if (by_id != by_id_.end() && by_path != by_path_.end() && by_path->second == id)
                return;
            throw Error("page registry conflict: " + id.str() + " <-> " + std::string(path));
        }
        add(id, std::string(path));
    }

    std::optional<PageId> lookup(std::string_view path) const
    {
        if (auto it = by_path_.find(std::string(path)); it != by_path_.end())
            return it->second;
        return std::nullopt;
    }

    std::optional<std::string> reverse(PageId id) const
    {
        if (auto it = by_id_.find(id); it != by_id_.end())
            return it->second;
        return std::nullopt;
    }

    bool contains(PageId id) const { return by_id_.count(id) != 0; }
    std::size_t size() const { return by_id_.size(); }
    bool empty() const { return by_id_.empty(); }

    /// Entries ordered by id.
    const std::map<PageId, std::string>& entries() const { return by_id_; }

    bool operator==(const PageRegistry& o) const { return by_id_ == o.by_id_; }

    void write_tsv(std::ostream& out, bool with_header = true) const
    {
        if (with_header)
            out << kHeader << '\n';
        for (const auto& [id, path] : by_id_)
            out << id.str() << '\t' << path << '\n';
    }

    /// Parses "page_id<TAB>path" lines. When `expect_header` is set the first
    /// line must be the registry header.
    static PageRegistry read_tsv(std::istream& in, bool expect_header = true)
    {
        PageRegistry reg;
        std::string line;
        std::size_t lineno = 0;
        if (expect_header) {
            ++lineno;
            if (!std::getline(in, line) || line != kHeader)
                throw Error("page registry: missing or unsupported header");
        }
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty())
                continue;
            reg.insert_row(line, lineno);
        }
        return reg;
    }

    /// Parses one "page_id<TAB>path" row; used by the knowledge base reader too.
    void insert_row(std::string_view line, std::size_t lineno)
    {
        auto cols = split(line, '\t');
        if (cols.size() != 2)
            throw Error("page registry line " + std::to_string(lineno) + ": expected 2 columns");
        auto id = PageId::parse(cols[0]);
        if (!id)
            throw Error("page registry line " + std::to_string(lineno) + ": bad page id '" +
                        std::string(cols[0]) + "'");
        insert(*id, cols[1]);
    }

private:
    static void check_path(std::string_view path)
    {
        if (path.empty() || path == kAbsent)
            throw Error("page registry: absent path has no page id");
        if (path.find_first_of(" \t\r\n") != std::string_view::npos)
            throw Error("page registry: path contains whitespace: '" + std::string(path) + "'");
    }

    void add(PageId id, std::string path)
    {
        by_path_.emplace(path, id);
        by_id_.emplace(id, std::move(path));
        if (id.value >= next_)
            next_ = id.value + 1;
    }

    std::map<PageId, std::string> by_id_;
    std::unordered_map<std::string, PageId> by_path_;
    std::uint32_t next_ = 1;
};

} // namespace wum

#endif
