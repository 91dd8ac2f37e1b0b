// wum: command-line front end for the web usage mining pipeline.
//
//   wum preprocess -i access.log -o sessions.tsv
//   wum mine       -s sessions.tsv -o site.wkb
//   wum recommend  -k site.wkb -u 9 --pages p12,p7
//   wum evaluate   -k site.wkb -s sessions.tsv --lsw 2
//   wum inspect    -k site.wkb --section patterns
//
// Exit codes: 0 ok, 1 no recommendation (recommend only), 2 fatal.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wum/wum.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNoRecommendation = 1;
constexpr int kExitFatal = 2;

std::string read_file(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw wum::Error("cannot open " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

// "-" means standard output.
void write_output(const std::string& path, const std::string& bytes)
{
    if (path == "-") {
        std::cout << bytes << std::flush;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw wum::Error("cannot write " + path);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f)
        throw wum::Error("cannot write " + path);
}

wum::SessionCorpus read_sessions(const std::string& path)
{
    std::istringstream in(read_file(path));
    return wum::read_sessions_tsv(in);
}

std::vector<wum::LswSize> parse_sweep(const std::string& spec)
{
    auto dots = spec.find("..");
    if (dots == std::string::npos)
        throw wum::Error("--sweep expects A..B, got '" + spec + "'");
    auto lo = wum::parse_int<std::size_t>(std::string_view(spec).substr(0, dots));
    auto hi = wum::parse_int<std::size_t>(std::string_view(spec).substr(dots + 2));
    if (!lo || !hi || *lo == 0 || *lo > *hi)
        throw wum::Error("--sweep expects 1 <= A <= B, got '" + spec + "'");
    std::vector<wum::LswSize> sizes;
    for (auto n = *lo; n <= *hi; ++n)
        sizes.push_back(wum::LswSize::count(n));
    return sizes;
}

int run_preprocess(const wum::Config& cfg, const std::vector<std::string>& inputs, const std::string& output)
{
    auto t0 = std::chrono::steady_clock::now();
    std::vector<wum::LogRecord> records;
    wum::ParseReport parse;
    for (const auto& path : inputs)
        parse += wum::parse_log_file(path, [&](wum::LogRecord&& r) { records.push_back(std::move(r)); });

    auto result = wum::preprocess_pipeline(std::move(records), cfg.preprocess());
    auto corpus = wum::index_sessions(result.sessions);
    std::ostringstream out;
    wum::write_sessions_tsv(out, corpus);
    write_output(output, out.str());
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const auto& s = result.stats;
    std::fprintf(stderr, "lines: %zu (records %zu, skipped %zu, directives %zu)\n", parse.lines_total,
                 parse.records_ok, parse.lines_skipped, parse.directives);
    for (const auto& [reason, n] : parse.skip_reasons)
        std::fprintf(stderr, "  skipped %s: %zu\n", reason.c_str(), n);
    for (const auto& [warning, n] : parse.warnings)
        std::fprintf(stderr, "  warning %s: %zu\n", warning.c_str(), n);
    std::fprintf(stderr, "records in: %zu, out: %zu (removed by suffix %zu, by status %zu)\n", s.records_in,
                 s.records_out, s.removed_by_suffix, s.removed_by_status);
    std::fprintf(stderr, "reduction: %.1f%%\n", s.reduction_fraction() * 100.0);
    std::fprintf(stderr, "users: %zu, sessions: %zu, pages: %zu, broken-chain: %zu\n", s.users, s.sessions,
                 corpus.registry.size(), s.broken_chain);
    std::fprintf(stderr, "elapsed: %.3fs\n", elapsed);
    return kExitOk;
}

int run_mine(const wum::Config& cfg, const std::string& sessions_path, const std::string& kb_path,
             double train_fraction, const std::string& patterns_out)
{
    std::string bytes = read_file(sessions_path);
    std::istringstream in(bytes);
    auto corpus = wum::read_sessions_tsv(in);
    if (train_fraction < 1.0)
        corpus = wum::split_sessions(corpus, train_fraction).first;

    auto kb = wum::build_knowledge_base(corpus, cfg.miner(), wum::sha256_hex(bytes), cfg.threads);
    wum::store(kb, kb_path);
    if (!patterns_out.empty()) {
        std::ostringstream pat;
        wum::write_patterns_tsv(pat, kb.clusters);
        write_output(patterns_out, pat.str());
    }

    std::printf("#user_id\tpatterns\tcoverage\n");
    std::size_t total = 0;
    for (const auto& [user, sessions] : corpus.by_user()) {
        const auto& patterns = wum::patterns_for(kb, user);
        wum::PatternCluster cluster{user, patterns};
        total += patterns.size();
        std::printf("%u\t%zu\t%s\n", user, patterns.size(), wum::format_percent(wum::coverage(cluster, sessions)).c_str());
    }
    std::printf("#total\tusers=%zu\tpatterns=%zu\tpages=%zu\n", corpus.by_user().size(), total, kb.registry.size());
    return kExitOk;
}

int run_recommend(const wum::Config& cfg, const std::string& kb_path, wum::UserId user,
                  const std::vector<std::string>& pages, const std::string& replay, const std::string& format,
                  const std::string& uri_prefix)
{
    auto kb = wum::load(kb_path);
    std::vector<wum::PageId> window;
    if (!pages.empty()) {
        for (const auto& p : pages) {
            auto id = wum::PageId::parse(p);
            if (!id)
                throw wum::Error("bad page id '" + p + "'");
            window.push_back(*id);
        }
    } else if (!replay.empty()) {
        auto corpus = read_sessions(replay);
        for (const auto& [u, sessions] : corpus.by_user()) {
            if (u != user)
                continue;
            std::vector<wum::PageId> original;
            for (const auto& v : wum::original_page_views(sessions, kb.registry)) {
                if (!v)
                    break;
                original.push_back(*v);
            }
            window = wum::capture_lsw(user, original, wum::LswSize::parse(cfg.lsw), kb.registry).pages();
        }
        if (window.empty())
            throw wum::Error("user " + std::to_string(user) + " has no replayable page views in " + replay);
    } else {
        throw wum::Error("recommend needs --pages or --replay");
    }

    wum::LiveSessionWindow lsw(user, std::move(window), kb.registry);
    wum::RecommendOptions opts{cfg.dedupe_across_parts};
    auto list = wum::recommend(lsw, kb, opts);
    if (format == "tsv")
        std::cout << wum::render_tsv(list);
    else
        std::cout << wum::render_text(list, uri_prefix);
    return list.history_empty() && list.no_recommendation() ? kExitNoRecommendation : kExitOk;
}

int run_evaluate(const wum::Config& cfg, const std::string& kb_path, const std::string& sessions_path,
                 const std::string& part, const std::string& sweep, double train_fraction,
                 const std::string& output, const std::string& csv)
{
    auto kb = wum::load(kb_path);
    auto corpus = read_sessions(sessions_path);
    if (train_fraction < 1.0)
        corpus = wum::split_sessions(corpus, train_fraction).second;

    auto opts = cfg.eval();
    opts.part = wum::parse_list_part(part);
    std::vector<wum::LswSize> sizes = sweep.empty() ? std::vector<wum::LswSize>{opts.lsw} : parse_sweep(sweep);

    std::string tsv, csv_bytes;
    for (const auto& size : sizes) {
        opts.lsw = size;
        auto report = wum::replay_evaluate(kb, corpus, opts);
        tsv += wum::render_report_tsv(report);
        auto rows = wum::render_report_csv(report);
        csv_bytes += csv_bytes.empty() ? rows : rows.substr(rows.find('\n') + 1);
    }
    write_output(output, tsv);
    if (!csv.empty())
        write_output(csv, csv_bytes);
    return kExitOk;
}

int run_inspect(const std::string& kb_path, const std::string& section)
{
    auto kb = wum::load(kb_path);
    std::string bytes = wum::serialize_kb(kb);
    std::string_view marker = section == "meta"       ? "#meta"
                              : section == "registry" ? wum::PageRegistry::kHeader
                              : section == "patterns" ? wum::kPatternsHeader
                                                      : std::string_view{};
    if (marker.empty()) {
        std::cout << bytes;
        return kExitOk;
    }
    bool in_section = false;
    for (auto line : wum::split(bytes, '\n')) {
        if (!line.empty() && line.front() == '#')
            in_section = line == marker;
        if (in_section)
            std::cout << line << '\n';
    }
    return kExitOk;
}

// Config files may spell keys like the Config fields (session_timeout_s).
class UnderscoreConfig : public CLI::ConfigBase {
public:
    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override
    {
        auto items = CLI::ConfigBase::from_config(input);
        for (auto& item : items)
            std::replace(item.name.begin(), item.name.end(), '_', '-');
        return items;
    }
};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Web usage mining: sessionize access logs, mine navigation patterns, recommend pages."};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value configuration file (flags take precedence)");
    app.config_formatter(std::make_shared<UnderscoreConfig>());
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.option_defaults()->always_capture_default();

    wum::Config cfg;
    app.add_option("--filtered-suffixes", cfg.filtered_suffixes, "URI suffixes removed during cleansing")
        ->delimiter(',');
    app.add_option("--session-timeout-s", cfg.session_timeout_s, "Idle gap (seconds) that ends a session");
    app.add_option("--min-weight", cfg.min_weight, "Minimum total edge weight of a retained pattern");
    app.add_option("--min-vertices", cfg.min_vertices, "Minimum pages in a retained pattern");
    app.add_option("--max-vertices", cfg.max_vertices, "Largest session graph accepted for path enumeration");
    app.add_option("--lsw,--lsw-size", cfg.lsw, "Live session window: page count (2) or fraction (0.1)");
    app.add_flag("--external-referer-as-dash,!--keep-external-referer", cfg.external_referer_as_dash,
                 "Treat referers from other hosts as direct entries (default: on)");
    app.add_flag("--dedupe-across-parts", cfg.dedupe_across_parts,
                 "Drop unvisited-part pages already in the history part (default: off)");
    app.add_option("--threads", cfg.threads, "Worker threads (0 = hardware concurrency)");

    std::vector<std::string> pre_inputs;
    std::string pre_output = "-";
    auto* pre = app.add_subcommand("preprocess", "Parse, cleanse and sessionize access logs into a sessions TSV");
    pre->fallthrough();
    pre->add_option("-i,--input", pre_inputs, "W3C extended log files (plain or gzip)")->required();
    pre->add_option("-o,--output", pre_output, "Sessions TSV ('-' for stdout)");

    std::string mine_sessions, mine_kb, mine_patterns;
    double train_fraction = 1.0;
    auto* mine = app.add_subcommand("mine", "Mine per-user pattern clusters into a knowledge base");
    mine->fallthrough();
    mine->add_option("-s,--sessions", mine_sessions, "Sessions TSV from preprocess")->required();
    mine->add_option("-o,--output", mine_kb, "Knowledge base file (.wkb)")->required();
    mine->add_option("--patterns-out", mine_patterns, "Also write the cluster file TSV");
    mine->add_option("--train-fraction", train_fraction, "Mine only the first fraction of each user's sessions")
        ->check(CLI::Range(0.0, 1.0));

    std::string rec_kb, rec_replay, rec_format = "text", rec_uri_prefix;
    wum::UserId rec_user = 0;
    std::vector<std::string> rec_pages;
    auto* rec = app.add_subcommand("recommend", "Recommendation list for one user's live session window");
    rec->fallthrough();
    rec->add_option("-k,--kb", rec_kb, "Knowledge base file")->required();
    rec->add_option("-u,--user", rec_user, "User id")->required();
    auto* pages_opt = rec->add_option("--pages", rec_pages, "Window page ids (p12 or 12)")->delimiter(',');
    rec->add_option("--replay", rec_replay, "Sessions TSV; window = first --lsw pages of the user's page views")
        ->excludes(pages_opt);
    rec->add_option("--format", rec_format, "Output format")->check(CLI::IsMember({"text", "tsv"}));
    rec->add_option("--uri-prefix", rec_uri_prefix, "Prefix for page paths in text output");

    std::string ev_kb, ev_sessions, ev_part = "combined", ev_sweep, ev_output = "-", ev_csv;
    double ev_train_fraction = 1.0;
    auto* ev = app.add_subcommand("evaluate", "Replay sessions against a knowledge base and report accuracy");
    ev->fallthrough();
    ev->add_option("-k,--kb", ev_kb, "Knowledge base file")->required();
    ev->add_option("-s,--sessions", ev_sessions, "Sessions TSV to replay")->required();
    ev->add_option("--part", ev_part, "List scored")->check(CLI::IsMember({"history", "unvisited", "combined"}));
    ev->add_option("--sweep", ev_sweep, "Repeat over window sizes A..B");
    ev->add_option("--train-fraction", ev_train_fraction,
                   "Replay only sessions after the first fraction of each user's sessions")
        ->check(CLI::Range(0.0, 1.0));
    ev->add_option("-o,--output", ev_output, "Report TSV ('-' for stdout)");
    ev->add_option("--csv", ev_csv, "Also write the report as CSV");

    std::string insp_kb, insp_section = "all";
    auto* insp = app.add_subcommand("inspect", "Dump knowledge base sections");
    insp->add_option("-k,--kb", insp_kb, "Knowledge base file")->required();
    insp->add_option("--section", insp_section, "Section")->check(CLI::IsMember({"all", "meta", "registry", "patterns"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitFatal;
    }

    try {
        cfg.validate();
        if (*pre)
            return run_preprocess(cfg, pre_inputs, pre_output);
        if (*mine)
            return run_mine(cfg, mine_sessions, mine_kb, train_fraction, mine_patterns);
        if (*rec)
            return run_recommend(cfg, rec_kb, rec_user, rec_pages, rec_replay, rec_format, rec_uri_prefix);
        if (*ev)
            return run_evaluate(cfg, ev_kb, ev_sessions, ev_part, ev_sweep, ev_train_fraction, ev_output, ev_csv);
        if (*insp)
            return run_inspect(insp_kb, insp_section);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "wum: error: %s\n", e.what());
        return kExitFatal;
    }
    return kExitFatal;
}
