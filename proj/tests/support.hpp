#pragma once

// Shared fixtures for the unit suites and the acceptance runner: bundled data
// access, a std::regex oracle, a random corpus generator with ground truth,
// brute-force evaluations of the five weakness definitions, and property
// checks that return a failure description or nothing.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <map>
#include <optional>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sigaudit/sigaudit.hpp"

#ifndef SIGAUDIT_TEST_DATA
#define SIGAUDIT_TEST_DATA "data"
#endif

namespace sigaudit::testkit {

inline std::string data_path(const std::string &name) { return std::string(SIGAUDIT_TEST_DATA) + "/" + name; }

inline const corpus &bundled()
{
    static const corpus c =
        load_corpus(data_path("phpids_sqli_signatures.tsv"), data_path("phpids_sqli_vectors.tsv"));
    return c;
}

// Bundled signatures plus extra signature and vector files.
inline corpus bundled_plus(const std::string &extra_sigs, const std::string &extra_vecs, bool keep_vectors = true)
{
    corpus c = bundled();
    if (!keep_vectors) c.vectors.clear();
    if (!extra_sigs.empty()) {
        for (auto &s : load_signatures_file(data_path(extra_sigs))) c.signatures.push_back(std::move(s));
    }
    if (!extra_vecs.empty()) {
        for (auto &v : load_vectors_file(data_path(extra_vecs), &c.signatures)) c.vectors.push_back(std::move(v));
    }
    return c;
}

// --- independent matching path ------------------------------------------------

inline bool oracle_search(const std::string &pattern, const std::string &text, bool icase = true)
{
    auto flags = std::regex::ECMAScript;
    if (icase) flags |= std::regex::icase;
    const std::regex re(pattern, flags);
    return std::regex_search(text, re);
}

inline bool oracle_full(const std::string &pattern, const std::string &text)
{
    const std::regex re(pattern, std::regex::ECMAScript);
    return std::regex_match(text, re);
}

inline std::string oracle_decode(const std::string &in)
{
    std::string out;
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (in[i] == '%' && i + 2 < in.size() && std::isxdigit(static_cast<unsigned char>(in[i + 1])) &&
            std::isxdigit(static_cast<unsigned char>(in[i + 2]))) {
            out += static_cast<char>(std::stoi(in.substr(i + 1, 2), nullptr, 16));
            i += 2;
        } else {
            out += in[i];
        }
    }
    return out;
}

// --- random corpora with ground truth -------------------------------------------

struct generated_signature {
    signature sig;
    std::set<std::string> operators;
    std::vector<std::string> subrules;
    std::vector<std::vector<std::string>> slots; // pattern pieces; alternation groups hold several
};

struct random_case {
    corpus c;
    std::vector<generated_signature> truth;
};

class corpus_generator {
public:
    explicit corpus_generator(std::uint64_t seed) : rng_(seed) {}

    random_case make(std::size_t max_sigs = 8, std::size_t max_vecs = 20)
    {
        random_case rc;
        const auto ns = pick(max_sigs) + 1;
        for (std::size_t n = 0; n < ns; ++n) {
            auto g = make_signature("R_" + std::to_string(n + 1));
            rc.c.signatures.push_back(g.sig);
            rc.truth.push_back(std::move(g));
        }
        const auto nv = pick(max_vecs + 1);
        for (std::size_t v = 0; v < nv; ++v) {
            attack_vector a;
            a.id = "Q_" + std::to_string(v + 1);
            a.target = rc.c.signatures[pick(ns)].id;
            if (pick(2) == 0) {
                a.payload = make_payload();
            } else {
                const auto &g = rc.truth[pick(ns)];
                a.payload = url_encode(url_decode(make_payload()).substr(0, pick(4)) + instantiate(g));
            }
            const auto roll = pick(4);
            a.intent = roll == 0 ? intent::probe : roll == 1 ? intent::logic_error : intent::exec_unauthorized;
            a.dialects = {dialect::generic};
            rc.c.vectors.push_back(std::move(a));
        }
        return rc;
    }

    // Piece-wise pattern built so its operator set and sub-rules are known.
    generated_signature make_signature(const std::string &id)
    {
        static const std::vector<std::string> words = {"or", "and", "xor", "not", "union", "select", "having", "1", "a"};
        static const std::vector<std::pair<std::string, std::string>> symbols = {
            {"\\|\\|", "||"}, {"&&", "&&"}, {"\\^", "^"}, {"\\|", "|"}, {"&", "&"}};
        static const std::vector<std::string> seps = {"\\s*", "\\s+", "\\W", "[=<>]", "\\s?", "[\"']", "\\W*"};
        static const std::vector<std::string> fillers = {"\\d+", "\\w+", "[\"'\\d]+", "\\(", "\\)", "--", "#", ";"};
        const std::set<std::string> lexicon_words = {"or", "and", "xor", "not"};

        static const std::vector<std::string> solid_seps = {"\\s+", "\\W", "[=<>]", "[\"']"};

        generated_signature g;
        std::vector<std::vector<std::string>> pieces;
        std::vector<bool> symbolic; // piece may contribute a symbol operator
        const auto np = pick(4) + 1;
        int groups = 0;
        for (std::size_t p = 0; p < np; ++p) {
            const auto kind = pick(4);
            if (kind == 0 && groups < 3) {
                ++groups;
                std::vector<std::string> branches;
                std::set<std::string> used;
                bool sym = false;
                const auto nb = pick(2) + 2;
                while (branches.size() < nb) {
                    std::string b;
                    std::string plain;
                    if (pick(3) == 0) {
                        const auto &s = symbols[pick(symbols.size())];
                        b = s.first;
                        plain = s.second;
                        sym = true;
                    } else {
                        b = plain = words[pick(words.size())];
                    }
                    if (!used.insert(b).second) continue;
                    branches.push_back(b);
                    note_token(g, plain, lexicon_words);
                }
                pieces.push_back(branches);
                symbolic.push_back(sym);
            } else if (kind == 1) {
                const auto &s = symbols[pick(symbols.size())];
                pieces.push_back({s.first});
                symbolic.push_back(true);
                note_token(g, s.second, lexicon_words);
            } else if (kind == 2) {
                pieces.push_back({fillers[pick(fillers.size())]});
                symbolic.push_back(false);
            } else {
                const auto &w = words[pick(words.size())];
                pieces.push_back({w});
                symbolic.push_back(false);
                note_token(g, w, lexicon_words);
            }
        }
        // Separators between symbol-bearing pieces never vanish, so two symbols
        // cannot fuse into a longer one.
        std::vector<std::vector<std::string>> slots;
        auto sep = [&](bool solid) { return solid ? solid_seps[pick(solid_seps.size())] : seps[pick(seps.size())]; };
        if (pick(3) == 0) slots.push_back({sep(false)});
        for (std::size_t p = 0; p < pieces.size(); ++p) {
            if (p > 0) slots.push_back({sep(symbolic[p] || symbolic[p - 1])});
            slots.push_back(pieces[p]);
        }
        if (pick(3) == 0) slots.push_back({sep(false)});

        std::string body;
        for (const auto &s : slots) body += s.size() == 1 ? s.front() : "(?:" + join(s) + ")";
        g.sig = {id, "(?:" + body + ")", "", false};

        std::vector<std::string> acc = {""};
        for (const auto &s : slots) {
            std::vector<std::string> next;
            for (const auto &a : acc) {
                for (const auto &b : s) next.push_back(a + b);
            }
            acc = std::move(next);
        }
        for (const auto &a : acc) g.subrules.push_back("(?:" + a + ")");
        g.slots = std::move(slots);
        return g;
    }

    // A text the signature matches, built by picking a sample for every piece.
    std::string instantiate(const generated_signature &g)
    {
        static const std::map<std::string, std::vector<std::string>> samples = {
            {"\\s*", {"", " ", "  "}},     {"\\s+", {" ", "\t", "   "}}, {"\\W", {" ", "=", "(", "'"}},
            {"[=<>]", {"=", "<"}},          {"\\s?", {"", " "}},          {"[\"']", {"'", "\""}},
            {"\\W*", {"", " ", "(("}},     {"\\d+", {"1", "42"}},        {"\\w+", {"ab", "x1"}},
            {"[\"'\\d]+", {"'1", "\"9"}}, {"\\(", {"("}},              {"\\)", {")"}},
            {"\\|\\|", {"||"}},           {"\\^", {"^"}},               {"\\|", {"|"}}};
        std::string out;
        for (const auto &slot : g.slots) {
            const auto &piece = slot[pick(slot.size())];
            const auto it = samples.find(piece);
            if (it != samples.end()) {
                out += it->second[pick(it->second.size())];
            } else {
                std::string w = piece;
                if (pick(2) == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
                out += w;
            }
        }
        return out;
    }

    std::string make_payload()
    {
        static const std::vector<std::string> toks = {
            "1", "or", "and", "xor", "not", "union", "select", "having", "a", "OR", "And", "Select", " ", " ",
            "  ", "\t", "=", "'", "\"", "(", ")", "||", "&&", "^", "|", "&", "@", "--", "#", ";", "/**/", "5",
            "\xA0", "<", "\"1\"", "user"};
        std::string out;
        const auto n = pick(8) + 1;
        for (std::size_t i = 0; i < n; ++i) out += toks[pick(toks.size())];
        return url_encode(out);
    }

    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
    std::mt19937_64 &rng() { return rng_; }

private:
    static std::string join(const std::vector<std::string> &v)
    {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "|" : "") + v[i];
        return out;
    }

    static void note_token(generated_signature &g, const std::string &t, const std::set<std::string> &lex_words)
    {
        static const std::set<std::string> syms = {"||", "&&", "^", "|", "&"};
        if (lex_words.count(t) != 0 || syms.count(t) != 0) g.operators.insert(t);
    }

    std::mt19937_64 rng_;
};

// --- brute-force definition oracles ---------------------------------------------

using finding_key = std::pair<std::string, std::string>; // (signature, detail)

inline std::set<finding_key> keys_of(const std::vector<audit_finding> &fs, weakness w)
{
    std::set<finding_key> out;
    for (const auto &f : fs) {
        if (f.label != w) continue;
        std::string detail;
        switch (w) {
        case weakness::incomplete:
            for (const auto &fam : f.evidence.at("families")) {
                detail += fam.at("name").get<std::string>() + ":";
                for (const auto &m : fam.at("missing")) detail += m.get<std::string>() + ",";
                detail += ";";
            }
            break;
        case weakness::semi_relevant:
            for (const auto &d : f.evidence.at("dead")) detail += std::to_string(d.at("index").get<int>()) + ",";
            break;
        case weakness::redundant:
            detail = f.evidence.at("superseded_by").get<std::string>() + "/" +
                     f.evidence.at("relation").get<std::string>();
            break;
        case weakness::inconsistent:
            for (const auto &v : f.evidence.at("vectors")) {
                detail += v.at("id").get<std::string>() + "@" + v.at("stage").get<std::string>() + ",";
            }
            break;
        default:
            break;
        }
        out.insert({f.signature_id, detail});
    }
    return out;
}

struct oracle_rows {
    std::vector<std::vector<bool>> rows; // [signature][vector]
    std::vector<bool> logical;
};

inline oracle_rows brute_rows(const corpus &c)
{
    oracle_rows r;
    for (const auto &v : c.vectors) r.logical.push_back(v.intent != intent::probe);
    for (const auto &s : c.signatures) {
        std::vector<bool> row;
        for (const auto &v : c.vectors) row.push_back(oracle_search(s.pattern, oracle_decode(v.payload)));
        r.rows.push_back(std::move(row));
    }
    return r;
}

// Incomplete over the generator's recorded operator sets.
inline std::set<finding_key> oracle_incomplete(const std::vector<generated_signature> &truth,
                                               const std::vector<related_operator_family> &fams)
{
    std::set<finding_key> out;
    auto sorted = fams;
    std::sort(sorted.begin(), sorted.end(), [](const auto &a, const auto &b) { return a.name < b.name; });
    for (const auto &g : truth) {
        std::string detail;
        for (const auto &f : sorted) {
            bool meets = false;
            bool contained = true;
            std::string missing;
            for (const auto &m : f.members) {
                if (g.operators.count(m) != 0) {
                    meets = true;
                } else {
                    contained = false;
                    missing += m + ",";
                }
            }
            if (meets && !contained) detail += f.name + ":" + missing + ";";
        }
        if (!detail.empty()) out.insert({g.sig.id, detail});
    }
    return out;
}

// Irrelevant: L_a and S_a(n) are disjoint.
inline std::set<finding_key> oracle_irrelevant(const corpus &c, const oracle_rows &r)
{
    std::set<finding_key> out;
    for (std::size_t n = 0; n < c.signatures.size(); ++n) {
        bool hit = false;
        for (std::size_t v = 0; v < c.vectors.size(); ++v) hit = hit || (r.rows[n][v] && r.logical[v]);
        if (!hit) out.insert({c.signatures[n].id, ""});
    }
    return out;
}

// SemiRelevant over the generator's recorded sub-rules.
inline std::set<finding_key> oracle_semirelevant(const corpus &c, const std::vector<generated_signature> &truth)
{
    std::set<finding_key> out;
    for (const auto &g : truth) {
        if (g.subrules.size() < 2) continue;
        std::string dead;
        bool any_live = false;
        for (std::size_t i = 0; i < g.subrules.size(); ++i) {
            bool live = false;
            for (const auto &v : c.vectors) {
                if (v.intent == intent::probe) continue;
                live = live || oracle_search(g.subrules[i], oracle_decode(v.payload));
            }
            if (live) {
                any_live = true;
            } else {
                dead += std::to_string(i) + ",";
            }
        }
        if (any_live && !dead.empty()) out.insert({g.sig.id, dead});
    }
    return out;
}

// Redundant with strict subsets, ties flagged on the larger id; rows that are
// empty or miss L_a entirely take no part.
inline std::set<finding_key> oracle_redundant(const corpus &c, const oracle_rows &r)
{
    std::set<finding_key> out;
    const auto nv = c.vectors.size();
    auto eligible = [&](std::size_t n) {
        bool any = false;
        bool logical = false;
        for (std::size_t v = 0; v < nv; ++v) {
            any = any || r.rows[n][v];
            logical = logical || (r.rows[n][v] && r.logical[v]);
        }
        return any && logical;
    };
    for (std::size_t n = 0; n < c.signatures.size(); ++n) {
        if (!eligible(n)) continue;
        for (std::size_t m = 0; m < c.signatures.size(); ++m) {
            if (m == n || !eligible(m)) continue;
            bool subset = true;
            bool equal = true;
            for (std::size_t v = 0; v < nv; ++v) {
                if (r.rows[n][v] && !r.rows[m][v]) subset = false;
                if (r.rows[n][v] != r.rows[m][v]) equal = false;
            }
            if (!subset) continue;
            if (equal && !(c.signatures[n].id > c.signatures[m].id)) continue;
            out.insert({c.signatures[n].id, c.signatures[m].id + "/" + (equal ? "duplicate" : "subset")});
        }
    }
    return out;
}

// Inconsistent: the capability row meets the set of vectors the deployed pipeline lets through.
inline std::set<finding_key> oracle_inconsistent(const corpus &c, const oracle_rows &r, const pipeline &p)
{
    std::vector<std::string> stage(c.vectors.size());
    for (std::size_t v = 0; v < c.vectors.size(); ++v) {
        const auto text = p.apply(c.vectors[v].payload);
        if (p.prefilter() && oracle_full(*p.prefilter(), text)) {
            stage[v] = "prefilter";
            continue;
        }
        bool hit = false;
        for (const auto &s : c.signatures) hit = hit || oracle_search(s.pattern, text);
        if (!hit) stage[v] = "transform";
    }
    std::set<finding_key> out;
    for (std::size_t n = 0; n < c.signatures.size(); ++n) {
        std::string detail;
        for (std::size_t v = 0; v < c.vectors.size(); ++v) {
            if (!stage[v].empty() && r.rows[n][v]) detail += c.vectors[v].id + "@" + stage[v] + ",";
        }
        if (!detail.empty()) out.insert({c.signatures[n].id, detail});
    }
    return out;
}

struct oracle_tally {
    std::size_t cases{0};
    std::map<std::string, std::size_t> mismatches;
    std::vector<std::string> first_failures;

    std::size_t total_mismatches() const
    {
        std::size_t t = 0;
        for (const auto &[k, v] : mismatches) t += v;
        return t;
    }
};

inline void compare(oracle_tally &t, const std::string &def, const std::set<finding_key> &got,
                    const std::set<finding_key> &want, const corpus &c)
{
    t.mismatches[def];
    if (got == want) return;
    ++t.mismatches[def];
    if (t.first_failures.size() < 5) {
        std::ostringstream os;
        os << def << " mismatch on corpus with " << c.signatures.size() << " signatures:";
        for (const auto &s : c.signatures) os << " " << s.id << "=" << s.pattern;
        os << " | got";
        for (const auto &[a, b] : got) os << " " << a << "{" << b << "}";
        os << " | want";
        for (const auto &[a, b] : want) os << " " << a << "{" << b << "}";
        t.first_failures.push_back(os.str());
    }
}

// Runs every classifier against its brute-force definition on `cases` random corpora.
inline oracle_tally run_definition_oracle(std::size_t cases, std::uint64_t seed)
{
    oracle_tally t;
    corpus_generator gen(seed);
    const auto fams = default_families();
    const auto lex = operator_lexicon::sql();
    const auto deployed = pipeline::deployed();
    const auto capability = pipeline::capability();
    for (std::size_t k = 0; k < cases; ++k) {
        const auto rc = gen.make();
        const auto &c = rc.c;
        const auto rows = brute_rows(c);
        const auto m = build_detection_matrix(c, capability);
        const auto logical = logical_subset(c);
        const auto lmask = m.mask(logical);

        std::vector<audit_finding> inc, irr, semi;
        for (std::size_t n = 0; n < c.signatures.size(); ++n) {
            if (auto f = classify_incomplete(extract_operators(c.signatures[n], lex), fams)) inc.push_back(*f);
            if (auto f = classify_irrelevant(m, n, logical)) irr.push_back(*f);
            const auto subs = expand_subrules(c.signatures[n]);
            if (auto f = classify_semirelevant(subs, c, logical)) semi.push_back(*f);
        }
        compare(t, "incomplete", keys_of(inc, weakness::incomplete), oracle_incomplete(rc.truth, fams), c);
        compare(t, "irrelevant", keys_of(irr, weakness::irrelevant), oracle_irrelevant(c, rows), c);
        compare(t, "semirelevant", keys_of(semi, weakness::semi_relevant), oracle_semirelevant(c, rc.truth), c);
        compare(t, "redundant", keys_of(classify_redundant(m, &lmask), weakness::redundant),
                oracle_redundant(c, rows), c);
        compare(t, "inconsistent", keys_of(classify_inconsistent(c, deployed), weakness::inconsistent),
                oracle_inconsistent(c, rows, deployed), c);
        ++t.cases;
    }
    return t;
}

// --- property checks --------------------------------------------------------------

using check = std::optional<std::string>;

inline std::string random_text(std::mt19937_64 &rng, const std::string &alphabet, std::size_t max_len)
{
    std::uniform_int_distribution<std::size_t> len(0, max_len);
    std::uniform_int_distribution<std::size_t> at(0, alphabet.size() - 1);
    std::string out;
    for (auto n = len(rng); n > 0; --n) out += alphabet[at(rng)];
    return out;
}

// Texts are assembled from the pattern's own literal bytes and a few
// separators so that matches are frequent enough to be informative.
inline check subrule_soundness(const signature &s, std::mt19937_64 &rng, std::size_t trials)
{
    const auto subs = expand_subrules(s);
    if (!subs.expansion_complete) return std::nullopt;
    const regex::pattern whole(s.pattern);
    std::vector<regex::pattern> parts;
    for (const auto &r : subs.subrules) parts.emplace_back(r);
    std::string alphabet = " \t'\"()=;#-1aA";
    for (const char c : s.pattern) {
        if (std::isalnum(static_cast<unsigned char>(c)) || std::ispunct(static_cast<unsigned char>(c))) alphabet += c;
    }
    std::vector<std::string> words;
    for (const auto &w : {"or", "and", "select", "union", "drop", "alter", "having", "waitfor", "delay", "--", "/*"}) {
        words.emplace_back(w);
    }
    std::uniform_int_distribution<int> coin(0, 2);
    for (std::size_t k = 0; k < trials; ++k) {
        std::string t;
        for (int parts_n = 0; parts_n < 4; ++parts_n) {
            t += coin(rng) == 0 ? words[rng() % words.size()] : random_text(rng, alphabet, 4);
        }
        const bool a = whole.search(t);
        const bool b = std::any_of(parts.begin(), parts.end(), [&](const auto &p) { return p.search(t); });
        if (a != b) return s.id + ": sub-rules disagree with the signature on \"" + t + "\"";
    }
    return std::nullopt;
}

inline check pipeline_properties(std::mt19937_64 &rng, std::size_t trials)
{
    const auto deployed = pipeline::deployed();
    const pipeline empty;
    const std::string alphabet = "abcXYZ019 \t\n'\"()=;@_.,\xA0";
    for (std::size_t k = 0; k < trials; ++k) {
        const auto raw = random_text(rng, alphabet, 24);
        const auto encoded = url_encode(raw);
        if (empty.apply(encoded) != encoded) return "empty pipeline changed \"" + encoded + "\"";
        const auto once = deployed.apply(encoded);
        if (deployed.apply(once) != once) return "default pipeline not a fixed point on \"" + encoded + "\"";
        if (case_fold(case_fold(raw)) != case_fold(raw)) return "case fold not idempotent";
        const auto wc = whitespace_collapse(raw);
        if (whitespace_collapse(wc) != wc) return "whitespace collapse not idempotent";
        for (std::size_t i = 0; i + 1 < wc.size(); ++i) {
            if (regex::is_space_byte(static_cast<unsigned char>(wc[i])) &&
                regex::is_space_byte(static_cast<unsigned char>(wc[i + 1]))) {
                return "adjacent whitespace after collapse";
            }
        }
        if (nbsp_to_space(nbsp_to_space(raw)) != nbsp_to_space(raw)) return "nbsp mapping not idempotent";
    }
    return std::nullopt;
}

inline check matrix_properties(std::uint64_t seed, std::size_t cases)
{
    corpus_generator gen(seed);
    for (std::size_t k = 0; k < cases; ++k) {
        const auto rc = gen.make(10, 10);
        const auto p = pipeline::capability();
        const auto a = build_detection_matrix(rc.c, p, {false, 1});
        const auto b = build_detection_matrix(rc.c, p, {false, 3});
        if (!(a == b)) return "matrix differs across thread counts";
        const auto rows = brute_rows(rc.c);
        for (std::size_t n = 0; n < rows.rows.size(); ++n) {
            for (std::size_t v = 0; v < rows.rows[n].size(); ++v) {
                if (a.cell(n, v) != rows.rows[n][v]) {
                    return "cell (" + rc.c.signatures[n].id + ", " + rc.c.vectors[v].id + ") differs from oracle";
                }
            }
        }
        const auto with_pf = full_pipeline_bypass(rc.c, pipeline::deployed());
        const auto no_pf = full_pipeline_bypass(
            rc.c, pipeline(pipeline::deployed().transforms(), std::nullopt));
        if (!no_pf.mask.subset_of(with_pf.mask)) return "bypass not monotone in the prefilter";
    }
    return std::nullopt;
}

inline check mutation_properties(std::uint64_t seed, std::size_t cases)
{
    corpus_generator gen(seed);
    auto balance = [](const std::string &s) {
        long b = 0;
        for (const char c : s) b += c == '(' ? 1 : c == ')' ? -1 : 0;
        return b;
    };
    for (std::size_t k = 0; k < cases; ++k) {
        const auto payload = url_decode(gen.make_payload());
        if (payload.empty()) continue;
        mutation_config cfg;
        cfg.seed = k;
        cfg.budget = 1 + gen.pick(40);
        cfg.schemes.push_back(mutation_scheme::parse("repeat:(:2"));
        cfg.schemes.push_back(mutation_scheme::parse("repeat:space:3"));
        const auto a = generate(payload, cfg);
        const auto b = generate(payload, cfg);
        if (a.size() != b.size()) return "mutation output not deterministic";
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i].payload != b[i].payload || !(a[i].scheme == b[i].scheme)) return "mutation order not deterministic";
            if (a[i].payload == payload) return "mutant equals its seed";
            const auto kind = a[i].scheme.kind;
            const bool paren = kind == scheme_kind::redundant_parens ||
                               (kind == scheme_kind::bounded_repeat && a[i].scheme.ch == '(');
            if (paren && balance(a[i].payload) != balance(payload)) {
                return "paren scheme changed balance: \"" + payload + "\" -> \"" + a[i].payload + "\"";
            }
        }
        if (a.size() > cfg.budget) return "budget exceeded";
    }
    return std::nullopt;
}

inline check report_properties(const corpus &c)
{
    audit_config cfg;
    cfg.set_a = load_id_list(data_path("set_a.txt"));
    cfg.matching.jobs = 1;
    const auto r1 = run_audit(c, pipeline::deployed(), cfg);
    cfg.matching.jobs = 4;
    const auto r4 = run_audit(c, pipeline::deployed(), cfg);
    if (render(r1, render_format::json) != render(r4, render_format::json)) return "report depends on thread count";
    const auto back = report_from_json(nlohmann::json::parse(render(r1, render_format::json)));
    if (!(back == r1)) return "report JSON round trip is lossy";
    for (const auto &f : r1.findings) {
        if (f.corpus_fingerprint != r1.corpus_fingerprint || f.pipeline_fingerprint != r1.pipeline_fingerprint) {
            return "finding fingerprint differs from report header";
        }
    }
    const auto raw = run_audit(c, pipeline::capability(), cfg);
    for (const auto &f : raw.findings) {
        if (f.label == weakness::inconsistent) return "raw pipeline produced an Inconsistent finding";
    }
    return std::nullopt;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace sigaudit::testkit
