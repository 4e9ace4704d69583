// sig-audit: static and empirical audit of regex IDS signatures.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sigaudit/sigaudit.hpp"

#ifndef SIGAUDIT_DATA_DIR
#define SIGAUDIT_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace sigaudit;

namespace {

struct shared_flags {
    std::string signatures;
    std::string vectors;
    std::string pipeline_path;
    bool raw{false};
    std::string format; // per-command default
    std::uint64_t seed{0};
    unsigned jobs{1};
    bool case_sensitive{false};
    std::string set_a;
    std::string families;
    bool fail_on_findings{false};
};

std::string data_dir()
{
    if (const char *env = std::getenv("SIG_AUDIT_DATA"); env != nullptr && *env != '\0') return env;
    return SIGAUDIT_DATA_DIR;
}

std::string data_file(const std::string &given, const char *name)
{
    if (!given.empty()) return given;
    return (fs::path(data_dir()) / name).string();
}

corpus load_inputs(const shared_flags &f)
{
    return load_corpus(data_file(f.signatures, "phpids_sqli_signatures.tsv"),
                       data_file(f.vectors, "phpids_sqli_vectors.tsv"));
}

pipeline select_pipeline(const shared_flags &f)
{
    if (f.raw) return pipeline::capability();
    if (!f.pipeline_path.empty()) return pipeline::load_file(f.pipeline_path);
    return pipeline::deployed();
}

std::vector<std::string> select_set_a(const shared_flags &f)
{
    if (!f.set_a.empty()) return load_id_list(f.set_a);
    const auto bundled = fs::path(data_dir()) / "set_a.txt";
    if (fs::exists(bundled)) return load_id_list(bundled.string());
    return {};
}

audit_config make_config(const shared_flags &f)
{
    audit_config cfg;
    if (!f.families.empty()) cfg.families = load_families_file(f.families, cfg.lexicon);
    cfg.set_a = select_set_a(f);
    cfg.mutation.seed = f.seed;
    cfg.matching.jobs = f.jobs == 0 ? 1 : f.jobs;
    cfg.matching.case_sensitive = f.case_sensitive;
    return cfg;
}

void add_shared(CLI::App *cmd, shared_flags &f)
{
    cmd->add_option("--signatures", f.signatures, "signature file (.tsv or .json)");
    cmd->add_option("--vectors", f.vectors, "attack vector file (.tsv or .json)");
    cmd->add_option("--pipeline", f.pipeline_path, "pipeline JSON file");
    cmd->add_flag("--raw", f.raw, "decode-only pipeline, no prefilter");
    cmd->add_option("--format", f.format, "json, text or csv")->check(CLI::IsMember({"json", "text", "csv"}));
    cmd->add_option("--seed", f.seed, "mutation seed");
    cmd->add_option("--jobs", f.jobs, "worker threads");
    cmd->add_flag("--case-sensitive", f.case_sensitive, "match signatures case-sensitively");
    cmd->add_option("--set-a", f.set_a, "set A id list");
    cmd->add_option("--families", f.families, "related operator families JSON");
    cmd->add_flag("--fail-on-findings", f.fail_on_findings, "exit 2 when any finding is reported");
}

int finish(const std::vector<audit_finding> &fs, const shared_flags &f)
{
    return f.fail_on_findings && !fs.empty() ? 2 : 0;
}

int cmd_audit(const shared_flags &f)
{
    const auto c = load_inputs(f);
    const auto r = run_audit(c, select_pipeline(f), make_config(f));
    std::cout << render(r, parse_render_format(f.format.empty() ? "json" : f.format));
    for (const auto &w : r.warnings) std::cerr << "warning: " << w << "\n";
    return finish(r.findings, f);
}

int cmd_classify(const shared_flags &f, const std::string &only)
{
    const auto c = load_inputs(f);
    auto r = run_audit(c, select_pipeline(f), make_config(f));
    if (!only.empty()) {
        const auto w = parse_weakness(only);
        std::erase_if(r.findings, [&](const audit_finding &x) { return x.label != w; });
    }
    if (f.format == "csv") {
        std::cout << render_findings_csv(r.findings);
    } else if (f.format == "text") {
        for (const auto &x : r.findings) {
            std::cout << x.signature_id << "\t" << to_string(x.label) << "\t" << x.summary() << "\n";
        }
    } else {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto &x : r.findings) arr.push_back(to_json(x));
        std::cout << arr.dump(2) << "\n";
    }
    return finish(r.findings, f);
}

int cmd_matrix(const shared_flags &f)
{
    const auto c = load_inputs(f);
    match_options opt{f.case_sensitive, f.jobs == 0 ? 1 : f.jobs};
    // Matrices default to decode-only rows; --pipeline overrides.
    const auto p = f.pipeline_path.empty() ? pipeline::capability() : select_pipeline(f);
    const auto m = build_detection_matrix(c, p, opt);
    if (f.format == "json") {
        std::cout << matrix_to_json(m).dump(2) << "\n";
    } else {
        write_matrix_csv(std::cout, m);
    }
    return 0;
}

detection_matrix read_matrix_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    if (format_from_path(path) == file_format::json) {
        try {
            return matrix_from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::parse_error &e) {
            throw parse_error(path + ": " + e.what(), 0);
        }
    }
    return read_matrix_csv(in);
}

int cmd_stats(const shared_flags &f, const std::string &matrix_path, bool histogram)
{
    detection_matrix m;
    if (!matrix_path.empty()) {
        m = read_matrix_file(matrix_path);
    } else {
        m = build_detection_matrix(load_inputs(f), pipeline::capability(), {f.case_sensitive, f.jobs});
    }
    const auto profile = contribution(m);
    if (histogram) {
        write_histogram_csv(std::cout, profile);
        return 0;
    }
    const auto split = partition(m, select_set_a(f));
    const auto ov = overlap(m, split.a, split.b);
    nlohmann::json out = {{"profile", to_json(profile)},
                          {"partition", {{"a", split.a}, {"b", split.b}}},
                          {"overlap", to_json(ov)}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_structure(const shared_flags &f, const std::string &id)
{
    const auto c = load_inputs(f);
    const auto *s = c.find_signature(id);
    if (s == nullptr) throw unknown_id(id);
    auto lex = operator_lexicon::sql();
    if (!f.families.empty()) load_families_file(f.families, lex);
    const auto t = extract_operators(*s, lex);
    const auto subs = expand_subrules(*s);
    nlohmann::json bounds = nlohmann::json::array();
    for (const auto &b : bounded_specials(*s)) {
        bounds.push_back({{"position", b.position}, {"char_class", b.char_class}, {"max", b.max_occurrences}});
    }
    nlohmann::json out = {{"signature", s->id},
                          {"pattern", s->pattern},
                          {"operators", std::vector<std::string>(t.operators.begin(), t.operators.end())},
                          {"keywords", std::vector<std::string>(t.keywords.begin(), t.keywords.end())},
                          {"subrules", subs.subrules},
                          {"expansion_complete", subs.expansion_complete},
                          {"bounds", bounds}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_mutate(const std::string &payload, const std::vector<std::string> &schemes, std::size_t budget,
               std::uint64_t seed)
{
    mutation_config cfg;
    if (!schemes.empty()) {
        cfg.schemes.clear();
        for (const auto &s : schemes) cfg.schemes.push_back(mutation_scheme::parse(s));
    }
    cfg.budget = budget;
    cfg.seed = seed;
    for (const auto &m : generate(url_decode(payload), cfg)) std::cout << url_encode(m.payload) << "\n";
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"sig-audit: audit regex IDS signatures against an attack-vector corpus"};
    app.set_version_flag("--version", std::string(tool_version));
    app.require_subcommand(1);

    shared_flags flags;
    auto *audit = app.add_subcommand("audit", "full audit report");
    add_shared(audit, flags);

    auto *classify = app.add_subcommand("classify", "findings only");
    add_shared(classify, flags);
    std::string only;
    classify->add_option("--only", only, "restrict to one weakness label");

    auto *matrix = app.add_subcommand("matrix", "detection matrix");
    add_shared(matrix, flags);

    auto *stats = app.add_subcommand("stats", "contribution profile and set overlap");
    add_shared(stats, flags);
    std::string matrix_path;
    bool histogram = false;
    stats->add_option("--matrix", matrix_path, "matrix file (.csv or .json)");
    stats->add_flag("--histogram", histogram, "per-signature CSV histogram");

    auto *structure = app.add_subcommand("structure", "operators, sub-rules and bounds of one signature");
    add_shared(structure, flags);
    std::string sig_id;
    structure->add_option("id", sig_id, "signature id")->required();

    auto *mutate = app.add_subcommand("mutate", "print URL-encoded mutants of a payload");
    std::string payload;
    std::vector<std::string> schemes;
    std::size_t budget = 32;
    std::uint64_t mseed = 0;
    mutate->add_option("--payload", payload, "seed payload (URL-encoded or plain)")->required();
    mutate->add_option("--schemes", schemes, "scheme list")->delimiter(',');
    mutate->add_option("--budget", budget, "maximum mutants");
    mutate->add_option("--seed", mseed, "random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*audit) return cmd_audit(flags);
        if (*classify) return cmd_classify(flags, only);
        if (*matrix) return cmd_matrix(flags);
        if (*stats) return cmd_stats(flags, matrix_path, histogram);
        if (*structure) return cmd_structure(flags, sig_id);
        if (*mutate) return cmd_mutate(payload, schemes, budget, mseed);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
