#ifndef WUM_CONFIG_HPP
#define WUM_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "wum/core.hpp"
#include "wum/evaluator.hpp"
#include "wum/pattern_miner.hpp"
#include "wum/preprocess.hpp"
#include "wum/recommender.hpp"

namespace wum {

/// Pipeline settings shared by all subcommands. Precedence when loaded by the
/// CLI: command-line flags, then the --config file, then these defaults.
struct Config {
    std::vector<std::string> filtered_suffixes{".gif", ".jpeg", ".jpg", ".css"};
    std::int64_t session_timeout_s = 1800;
    std::uint64_t min_weight = 3;
    std::size_t min_vertices = 2;
    std::size_t max_vertices = 64;
    std::string lsw = "0.1";
    bool external_referer_as_dash = true;
    bool dedupe_across_parts = false;
    unsigned threads = 0;

    void validate() const
    {
        if (session_timeout_s <= 0)
            throw Error("session_timeout_s must be positive");
        if (min_weight == 0)
            throw Error("min_weight must be positive");
        if (min_vertices < 2)
            throw Error("min_vertices must be at least 2");
        if (max_vertices == 0)
            throw Error("max_vertices must be positive");
        (void)LswSize::parse(lsw);
    }

    PreprocessOptions preprocess() const
    {
        PreprocessOptions o;
        o.filtered_suffixes = filtered_suffixes;
        o.session_timeout_s = session_timeout_s;
        o.external_referer_as_dash = external_referer_as_dash;
        return o;
    }

    MinerOptions miner() const { return {min_weight, min_vertices, max_vertices}; }

    EvalOptions eval() const
    {
        EvalOptions o;
        o.lsw = LswSize::parse(lsw);
        o.recommend.dedupe_across_parts = dedupe_across_parts;
        o.threads = threads;
        return o;
    }
};

} // namespace wum

#endif
