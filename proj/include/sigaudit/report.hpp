#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigaudit/classify.hpp"
#include "sigaudit/corpus.hpp"
#include "sigaudit/errors.hpp"
#include "sigaudit/matcher.hpp"
#include "sigaudit/mutate.hpp"
#include "sigaudit/normalize.hpp"
#include "sigaudit/stats.hpp"
#include "sigaudit/structural.hpp"

namespace sigaudit {

inline constexpr std::string_view tool_version = "0.3.1";

inline constexpr std::string_view approximation_note =
    "prefilter and converter defaults are reverse-engineered approximations of an unpublished IDS stage";

struct audit_config {
    operator_lexicon lexicon = operator_lexicon::sql();
    std::vector<related_operator_family> families = default_families();
    std::vector<std::string> set_a; // empty: every signature in B
    expansion_caps caps;
    mutation_config mutation;
    match_options matching;
};

struct bypass_summary {
    std::size_t capability_detected{0}; // vectors some rule matches after decoding only
    std::size_t deployed_detected{0};
    std::size_t prefilter_skipped{0};
    std::size_t unmatched{0};
    std::vector<std::string> ids;

    bool operator==(const bypass_summary &) const = default;
};

struct audit_report {
    std::string version{tool_version};
    std::string corpus_fingerprint;
    std::string pipeline_fingerprint;
    nlohmann::json pipeline = nlohmann::json::object();
    std::vector<audit_finding> findings;
    contribution_profile profile;
    std::vector<std::string> set_a;
    overlap_stats overlap;
    bypass_summary bypass;
    std::map<std::string, std::size_t> category_counts; // distinct signatures per label
    std::vector<std::string> warnings;
    std::vector<std::string> notes;

    bool operator==(const audit_report &) const = default;
};

inline std::map<std::string, std::size_t> count_categories(const std::vector<audit_finding> &fs)
{
    std::map<std::string, std::set<std::string>> sigs;
    for (const auto w : all_weaknesses) sigs[std::string(to_string(w))];
    for (const auto &f : fs) sigs[std::string(to_string(f.label))].insert(f.signature_id);
    std::map<std::string, std::size_t> out;
    for (const auto &[k, v] : sigs) out[k] = v.size();
    return out;
}

// Capability rows (decode only) feed Irrelevant, SemiRelevant, Redundant, susceptibility and the
// statistics; the deployed pipeline only decides IDS'_a.
inline audit_report run_audit(const corpus &c, const pipeline &deployed, const audit_config &cfg)
{
    validate_families(cfg.families, cfg.lexicon);
    audit_report r;
    r.corpus_fingerprint = corpus_fingerprint(c);
    r.pipeline_fingerprint = deployed.fingerprint();
    r.pipeline = deployed.to_json();
    r.notes.emplace_back(approximation_note);

    const auto logical = logical_subset(c);
    if (c.vectors.empty()) {
        r.warnings.emplace_back("vector corpus is empty: every signature is vacuously Irrelevant");
    } else if (logical.empty()) {
        r.warnings.emplace_back("no logical vectors (L_a is empty): every signature is vacuously Irrelevant");
    }

    const auto capability = pipeline::capability();
    const auto matrix = build_detection_matrix(c, capability, cfg.matching);
    const auto logical_mask = matrix.mask(logical);
    const std::size_t n = c.signatures.size();

    std::vector<std::vector<audit_finding>> per_sig(n);
    std::vector<std::string> per_sig_warning(n);
    parallel_for(n, cfg.matching.jobs, [&](std::size_t i) {
        const auto &s = c.signatures[i];
        auto &out = per_sig[i];
        if (auto f = classify_incomplete(extract_operators(s, cfg.lexicon), cfg.families)) out.push_back(*f);
        auto irrelevant = classify_irrelevant(s.id, matrix.rows[i], logical_mask);
        if (irrelevant) {
            out.push_back(*irrelevant);
        } else {
            const auto subs = expand_subrules(s, cfg.caps);
            if (!subs.expansion_complete) {
                per_sig_warning[i] = s.id + ": sub-rule expansion hit its caps; semi-relevance not assessed";
            } else if (auto f = classify_semirelevant(subs, c, logical, capability, cfg.matching)) {
                out.push_back(*f);
            }
        }
        std::vector<attack_vector> seeds;
        for (std::size_t v = 0; v < c.vectors.size(); ++v) {
            if (matrix.rows[i].test(v)) seeds.push_back(c.vectors[v]);
        }
        if (!seeds.empty()) {
            if (auto f = probe_susceptible(s, seeds, bounded_specials(s), cfg.mutation, capability, cfg.matching)) {
                out.push_back(*f);
            }
        }
    });
    for (std::size_t i = 0; i < n; ++i) {
        r.findings.insert(r.findings.end(), per_sig[i].begin(), per_sig[i].end());
        if (!per_sig_warning[i].empty()) r.warnings.push_back(per_sig_warning[i]);
    }
    for (auto &f : classify_redundant(matrix, &logical_mask)) r.findings.push_back(std::move(f));
    for (auto &f : classify_inconsistent(c, deployed, cfg.matching)) r.findings.push_back(std::move(f));
    for (auto &f : r.findings) {
        f.corpus_fingerprint = r.corpus_fingerprint;
        f.pipeline_fingerprint = r.pipeline_fingerprint;
    }
    sort_findings(r.findings);
    r.category_counts = count_categories(r.findings);

    r.profile = contribution(matrix);
    r.set_a = cfg.set_a;
    const auto split = partition(matrix, cfg.set_a);
    r.overlap = overlap(matrix, split.a, split.b);

    const auto bypass = full_pipeline_bypass(c, deployed, cfg.matching);
    bit_row any(c.vectors.size());
    for (const auto &row : matrix.rows) any |= row;
    r.bypass.capability_detected = any.count();
    r.bypass.deployed_detected = c.vectors.size() - bypass.ids.size();
    for (const auto st : bypass.stages) {
        (st == bypass_stage::prefilter ? r.bypass.prefilter_skipped : r.bypass.unmatched) += 1;
    }
    r.bypass.ids = bypass.ids;
    return r;
}

inline std::vector<related_operator_family> load_families_file(const std::string &path, operator_lexicon &lex)
{
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    std::vector<related_operator_family> out;
    try {
        const auto doc = nlohmann::json::parse(in);
        const auto &arr = doc.is_array() ? doc : doc.at("families");
        for (const auto &f : arr) {
            related_operator_family fam{f.at("name").get<std::string>(), {}};
            for (const auto &m : f.at("members")) {
                fam.members.insert(m.get<std::string>());
                lex.add(m.get<std::string>());
            }
            out.push_back(std::move(fam));
        }
    } catch (const nlohmann::json::exception &e) {
        throw parse_error(path + ": " + e.what(), 0);
    }
    return out;
}

// --- rendering -------------------------------------------------------------

inline nlohmann::json to_json(const audit_finding &f)
{
    return {{"signature", f.signature_id}, {"label", std::string(to_string(f.label))}, {"evidence", f.evidence},
            {"corpus_fingerprint", f.corpus_fingerprint}, {"pipeline_fingerprint", f.pipeline_fingerprint}};
}

inline audit_finding finding_from_json(const nlohmann::json &j)
{
    return {j.at("signature").get<std::string>(), parse_weakness(j.at("label").get<std::string>()),
            j.at("evidence"), j.at("corpus_fingerprint").get<std::string>(),
            j.at("pipeline_fingerprint").get<std::string>()};
}

inline nlohmann::json to_json(const audit_report &r)
{
    nlohmann::json findings = nlohmann::json::array();
    for (const auto &f : r.findings) findings.push_back(to_json(f));
    return {{"tool_version", r.version},
            {"corpus_fingerprint", r.corpus_fingerprint},
            {"pipeline_fingerprint", r.pipeline_fingerprint},
            {"pipeline", r.pipeline},
            {"findings", findings},
            {"profile", to_json(r.profile)},
            {"set_a", r.set_a},
            {"overlap", to_json(r.overlap)},
            {"bypass",
             {{"capability_detected", r.bypass.capability_detected},
              {"deployed_detected", r.bypass.deployed_detected},
              {"prefilter_skipped", r.bypass.prefilter_skipped},
              {"unmatched", r.bypass.unmatched},
              {"ids", r.bypass.ids}}},
            {"category_counts", r.category_counts},
            {"warnings", r.warnings},
            {"notes", r.notes}};
}

inline audit_report report_from_json(const nlohmann::json &j)
{
    try {
        audit_report r;
        r.version = j.at("tool_version").get<std::string>();
        r.corpus_fingerprint = j.at("corpus_fingerprint").get<std::string>();
        r.pipeline_fingerprint = j.at("pipeline_fingerprint").get<std::string>();
        r.pipeline = j.at("pipeline");
        for (const auto &f : j.at("findings")) r.findings.push_back(finding_from_json(f));
        r.profile = profile_from_json(j.at("profile"));
        r.set_a = j.at("set_a").get<std::vector<std::string>>();
        r.overlap = overlap_from_json(j.at("overlap"));
        const auto &b = j.at("bypass");
        r.bypass = {b.at("capability_detected").get<std::size_t>(), b.at("deployed_detected").get<std::size_t>(),
                    b.at("prefilter_skipped").get<std::size_t>(), b.at("unmatched").get<std::size_t>(),
                    b.at("ids").get<std::vector<std::string>>()};
        r.category_counts = j.at("category_counts").get<std::map<std::string, std::size_t>>();
        r.warnings = j.at("warnings").get<std::vector<std::string>>();
        r.notes = j.at("notes").get<std::vector<std::string>>();
        return r;
    } catch (const nlohmann::json::exception &e) {
        throw parse_error(std::string("report JSON: ") + e.what(), 0);
    }
}

enum class render_format { json, text, csv };

inline render_format parse_render_format(std::string_view s)
{
    if (s == "json") return render_format::json;
    if (s == "text") return render_format::text;
    if (s == "csv") return render_format::csv;
    throw parse_error("unknown format: " + std::string(s), 0);
}

inline std::string csv_field(std::string_view s)
{
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string render_findings_csv(const std::vector<audit_finding> &fs)
{
    std::string out = "signature,label,evidence\n";
    for (const auto &f : fs) {
        out += csv_field(f.signature_id) + "," + std::string(to_string(f.label)) + "," + csv_field(f.summary()) + "\n";
    }
    return out;
}

inline std::string render_text(const audit_report &r)
{
    std::ostringstream os;
    os << "sig-audit " << r.version << "\n";
    os << "corpus   " << r.corpus_fingerprint << "\n";
    os << "pipeline " << r.pipeline_fingerprint << "\n";
    for (const auto &w : r.warnings) os << "WARNING: " << w << "\n";
    for (const auto w : all_weaknesses) {
        const std::string name(to_string(w));
        os << "\n== " << name << " (" << r.category_counts.at(name) << " signatures) ==\n";
        for (const auto &f : r.findings) {
            if (f.label == w) os << "  " << f.signature_id << "  " << f.summary() << "\n";
        }
    }
    os << "\n== Contribution (top 10 of " << r.profile.ranking.size() << ") ==\n";
    for (std::size_t i = 0; i < r.profile.ranking.size() && i < 10; ++i) {
        const auto &e = r.profile.ranking[i];
        os << "  " << e.signature_id << "  " << e.count << "/" << r.profile.total << "  " << one_decimal(e.percent)
           << "%\n";
    }
    const auto total = r.overlap.total();
    auto pct = [&](std::size_t v) { return total == 0 ? std::string("0.0") : one_decimal(100.0 * v / total); };
    os << "\n== Overlap (A=" << r.set_a.size() << " signatures) ==\n";
    os << "  union A " << r.overlap.union_a() << "  union B " << r.overlap.union_b() << "\n";
    os << "  both " << r.overlap.both << " (" << pct(r.overlap.both) << "%)  only A " << r.overlap.only_a << " ("
       << pct(r.overlap.only_a) << "%)  only B " << r.overlap.only_b << "  neither " << r.overlap.neither << "\n";
    os << "\n== Coverage ==\n";
    os << "  capability " << r.bypass.capability_detected << "  deployed " << r.bypass.deployed_detected
       << "  prefilter-skipped " << r.bypass.prefilter_skipped << "  unmatched " << r.bypass.unmatched << "\n";
    for (const auto &n : r.notes) os << "\nnote: " << n << "\n";
    return os.str();
}

inline std::string render(const audit_report &r, render_format fmt)
{
    switch (fmt) {
    case render_format::json:
        return to_json(r).dump(2) + "\n";
    case render_format::text:
        return render_text(r);
    case render_format::csv:
        return render_findings_csv(r.findings);
    }
    return "";
}

} // namespace sigaudit
