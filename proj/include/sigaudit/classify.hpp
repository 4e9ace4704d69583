#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigaudit/corpus.hpp"
#include "sigaudit/errors.hpp"
#include "sigaudit/matcher.hpp"
#include "sigaudit/mutate.hpp"
#include "sigaudit/normalize.hpp"
#include "sigaudit/structural.hpp"
#include "sigaudit/util.hpp"

namespace sigaudit {

enum class weakness { incomplete, irrelevant, semi_relevant, susceptible, redundant, inconsistent };

inline constexpr weakness all_weaknesses[] = {weakness::incomplete,  weakness::irrelevant,
                                              weakness::semi_relevant, weakness::susceptible,
                                              weakness::redundant,   weakness::inconsistent};

inline std::string_view to_string(weakness w)
{
    switch (w) {
    case weakness::incomplete:
        return "Incomplete";
    case weakness::irrelevant:
        return "Irrelevant";
    case weakness::semi_relevant:
        return "SemiRelevant";
    case weakness::susceptible:
        return "Susceptible";
    case weakness::redundant:
        return "Redundant";
    case weakness::inconsistent:
        return "Inconsistent";
    }
    return "";
}

inline weakness parse_weakness(std::string_view s)
{
    for (const auto w : all_weaknesses) {
        if (to_string(w) == s || case_fold(to_string(w)) == case_fold(s)) return w;
    }
    if (case_fold(s) == "semi_relevant" || case_fold(s) == "semi-relevant") return weakness::semi_relevant;
    throw parse_error("unknown weakness label: " + std::string(s), 0);
}

struct related_operator_family {
    std::string name;
    std::set<std::string> members;
};

inline std::vector<related_operator_family> default_families()
{
    return {{"RO1", {"and", "or", "xor"}}, {"RO2", {"||", "&&", "^", "|", "&"}}};
}

inline void validate_families(const std::vector<related_operator_family> &fams, const operator_lexicon &lex)
{
    for (const auto &f : fams) {
        if (f.members.size() < 2) {
            throw parse_error("family " + f.name + " needs at least two members", 0);
        }
        for (const auto &m : f.members) {
            if (!lex.contains(m)) throw parse_error("family " + f.name + " member not in lexicon: " + m, 0);
        }
    }
}

struct audit_finding {
    std::string signature_id;
    weakness label{weakness::incomplete};
    nlohmann::json evidence = nlohmann::json::object();
    std::string corpus_fingerprint;
    std::string pipeline_fingerprint;

    bool operator==(const audit_finding &) const = default;

    // One-cell evidence digest for CSV and text output.
    std::string summary() const
    {
        switch (label) {
        case weakness::incomplete: {
            std::string out;
            for (const auto &f : evidence.at("families")) {
                if (!out.empty()) out += ';';
                out += f.at("name").get<std::string>() + ":";
                bool first = true;
                for (const auto &m : f.at("missing")) {
                    out += (first ? "" : "|") + m.get<std::string>();
                    first = false;
                }
            }
            return out;
        }
        case weakness::irrelevant:
            return "detected=" + std::to_string(evidence.value("detected", 0));
        case weakness::semi_relevant: {
            std::string out = "dead=";
            bool first = true;
            for (const auto &d : evidence.at("dead")) {
                out += (first ? "" : "|") + std::to_string(d.at("index").get<int>());
                first = false;
            }
            return out;
        }
        case weakness::susceptible: {
            const auto &w = evidence.at("witnesses");
            return w.empty() ? std::string() : w.front().at("mutant_encoded").get<std::string>();
        }
        case weakness::redundant:
            return evidence.at("superseded_by").get<std::string>();
        case weakness::inconsistent: {
            std::string out;
            for (const auto &v : evidence.at("vectors")) {
                if (!out.empty()) out += '|';
                out += v.at("id").get<std::string>();
            }
            return out;
        }
        }
        return "";
    }
};

inline bool finding_less(const audit_finding &a, const audit_finding &b)
{
    if (a.signature_id != b.signature_id) return natural_less(a.signature_id, b.signature_id);
    if (a.label != b.label) return a.label < b.label;
    return a.evidence.dump() < b.evidence.dump();
}

inline void sort_findings(std::vector<audit_finding> &fs) { std::stable_sort(fs.begin(), fs.end(), finding_less); }

// Incomplete: some family meets S_O(n) without being contained in it.
inline std::optional<audit_finding> classify_incomplete(const tokenized_signature &t,
                                                        const std::vector<related_operator_family> &families)
{
    auto sorted = families;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto &a, const auto &b) { return a.name < b.name; });
    nlohmann::json hits = nlohmann::json::array();
    for (const auto &f : sorted) {
        std::vector<std::string> present;
        std::vector<std::string> missing;
        for (const auto &m : f.members) {
            (t.operators.count(m) != 0 ? present : missing).push_back(m);
        }
        if (!present.empty() && !missing.empty()) {
            hits.push_back({{"name", f.name}, {"present", present}, {"missing", missing}});
        }
    }
    if (hits.empty()) return std::nullopt;
    audit_finding f{t.signature_id, weakness::incomplete, {}, {}, {}};
    f.evidence = {{"families", hits},
                  {"operators", std::vector<std::string>(t.operators.begin(), t.operators.end())}};
    return f;
}

// Irrelevant: the detected set is disjoint from L_a.
inline std::optional<audit_finding> classify_irrelevant(std::string_view signature_id, const bit_row &row,
                                                        const bit_row &logical)
{
    if (row.intersects(logical)) return std::nullopt;
    audit_finding f{std::string(signature_id), weakness::irrelevant, {}, {}, {}};
    f.evidence = {{"detected", row.count()}, {"logical_detected", 0}};
    return f;
}

inline std::optional<audit_finding> classify_irrelevant(const detection_matrix &m, std::size_t sig,
                                                        const std::set<std::string> &logical)
{
    return classify_irrelevant(m.signature_ids[sig], m.rows[sig], m.mask(logical));
}

// SemiRelevant: at least one dead and at least one live sub-rule over L_a.
inline std::optional<audit_finding> classify_semirelevant(const subrule_set &subs, const corpus &c,
                                                          const std::set<std::string> &logical,
                                                          const pipeline &p = pipeline::capability(),
                                                          const match_options &opt = {})
{
    if (!subs.expansion_complete) throw indeterminate_expansion(subs.signature_id);
    if (subs.subrules.size() < 2) return std::nullopt;
    std::vector<std::string> texts;
    for (const auto &v : c.vectors) {
        if (logical.count(v.id) != 0) texts.push_back(p.apply(v.payload));
    }
    nlohmann::json dead = nlohmann::json::array();
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < subs.subrules.size(); ++i) {
        const regex::pattern rx(subs.subrules[i], !opt.case_sensitive);
        const bool hit = std::any_of(texts.begin(), texts.end(), [&](const std::string &t) { return rx.search(t); });
        if (hit) {
            live.push_back(i);
        } else {
            dead.push_back({{"index", i}, {"source", subs.subrules[i]}});
        }
    }
    if (dead.empty() || live.empty()) return std::nullopt;
    audit_finding f{subs.signature_id, weakness::semi_relevant, {}, {}, {}};
    f.evidence = {{"subrules", subs.subrules.size()}, {"dead", dead}, {"live", live}};
    return f;
}

inline constexpr std::size_t max_reported_witnesses = 16;

// Seeds are decoded, mutated past each bound, re-encoded and replayed.
inline std::optional<audit_finding> probe_susceptible(const signature &s, const std::vector<attack_vector> &detected,
                                                      const std::vector<quantifier_bound> &bounds,
                                                      const mutation_config &cfg,
                                                      const pipeline &p = pipeline::capability(),
                                                      const match_options &opt = {})
{
    if (bounds.empty() || detected.empty()) return std::nullopt;
    const auto cs = compile(s, !opt.case_sensitive);
    nlohmann::json witnesses = nlohmann::json::array();
    std::size_t total = 0;
    for (const auto &v : detected) {
        if (!matches(cs, p.apply(v.payload))) continue;
        const std::string seed = url_decode(v.payload);
        for (const auto &b : bounds) {
            auto mutants = targeted_repeats(seed, b);
            if (mutants.size() > cfg.budget) mutants.resize(cfg.budget);
            for (const auto &m : mutants) {
                const std::string enc = url_encode(m);
                if (matches(cs, p.apply(enc))) continue;
                ++total;
                if (witnesses.size() < max_reported_witnesses) {
                    witnesses.push_back({{"vector", v.id},
                                         {"seed", seed},
                                         {"mutant", m},
                                         {"mutant_encoded", enc},
                                         {"scheme", "bounded_repeat"},
                                         {"bound",
                                          {{"position", b.position},
                                           {"char_class", b.char_class},
                                           {"max", b.max_occurrences}}}});
                }
            }
        }
    }
    if (total == 0) return std::nullopt;
    audit_finding f{s.id, weakness::susceptible, {}, {}, {}};
    f.evidence = {{"witnesses", witnesses}, {"witness_count", total}};
    return f;
}

// Redundancy over matrix rows. All-false rows, and rows disjoint from `logical`
// when given, take no part.
inline std::vector<audit_finding> classify_redundant(const detection_matrix &m, const bit_row *logical = nullptr)
{
    std::vector<std::size_t> eligible;
    for (std::size_t n = 0; n < m.rows.size(); ++n) {
        if (m.rows[n].none()) continue;
        if (logical != nullptr && !m.rows[n].intersects(*logical)) continue;
        eligible.push_back(n);
    }
    std::vector<audit_finding> out;
    for (const auto n : eligible) {
        for (const auto k : eligible) {
            if (n == k || !m.rows[n].subset_of(m.rows[k])) continue;
            const bool equal = m.rows[n] == m.rows[k];
            if (equal && !(m.signature_ids[n] > m.signature_ids[k])) continue;
            audit_finding f{m.signature_ids[n], weakness::redundant, {}, {}, {}};
            f.evidence = {{"superseded_by", m.signature_ids[k]},
                          {"relation", equal ? "duplicate" : "subset"},
                          {"detected", m.rows[n].count()},
                          {"superset_detected", m.rows[k].count()}};
            out.push_back(std::move(f));
        }
    }
    sort_findings(out);
    return out;
}

// Inconsistent: capability row meets IDS'_a under the deployed pipeline.
inline std::vector<audit_finding> classify_inconsistent(const corpus &c, const pipeline &p,
                                                        const match_options &opt = {})
{
    const auto bypass = full_pipeline_bypass(c, p, opt);
    const auto raw = build_detection_matrix(c, pipeline::capability(), opt);
    std::vector<audit_finding> out;
    for (std::size_t n = 0; n < raw.rows.size(); ++n) {
        if (!raw.rows[n].intersects(bypass.mask)) continue;
        nlohmann::json vecs = nlohmann::json::array();
        for (std::size_t i = 0, b = 0; i < c.vectors.size(); ++i) {
            if (!bypass.mask.test(i)) continue;
            if (raw.rows[n].test(i)) {
                const bool skipped = bypass.stages[b] == bypass_stage::prefilter;
                vecs.push_back({{"id", c.vectors[i].id}, {"stage", skipped ? "prefilter" : "transform"}});
            }
            ++b;
        }
        audit_finding f{raw.signature_ids[n], weakness::inconsistent, {}, {}, {}};
        f.evidence = {{"vectors", vecs}};
        out.push_back(std::move(f));
    }
    sort_findings(out);
    return out;
}

} // namespace sigaudit
