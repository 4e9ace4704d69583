#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sigaudit/errors.hpp"
#include "sigaudit/normalize.hpp"
#include "sigaudit/regex.hpp"
#include "sigaudit/structural.hpp"

namespace sigaudit {

enum class scheme_kind {
    case_toggle,
    whitespace_variant,
    nbsp_substitute,
    comment_inject,
    redundant_parens,
    url_reencode,
    bounded_repeat
};

struct mutation_scheme {
    scheme_kind kind{scheme_kind::case_toggle};
    char ch{0};   // bounded_repeat only
    int count{0}; // bounded_repeat only

    // All schemes insert or rewrite only between tokens, inside whitespace
    // runs or in keyword case, which is the probing assumption.
    bool semantics_preserving() const { return true; }

    // Whether a pre-processing stage could undo the scheme.
    bool pipeline_defeatable() const
    {
        switch (kind) {
        case scheme_kind::case_toggle:
        case scheme_kind::whitespace_variant:
        case scheme_kind::nbsp_substitute:
        case scheme_kind::url_reencode:
            return true;
        case scheme_kind::bounded_repeat:
            return ch == ' ' || ch == '\t';
        default:
            return false;
        }
    }

    std::string name() const
    {
        switch (kind) {
        case scheme_kind::case_toggle:
            return "case_toggle";
        case scheme_kind::whitespace_variant:
            return "whitespace";
        case scheme_kind::nbsp_substitute:
            return "nbsp";
        case scheme_kind::comment_inject:
            return "comment";
        case scheme_kind::redundant_parens:
            return "parens";
        case scheme_kind::url_reencode:
            return "url_reencode";
        case scheme_kind::bounded_repeat: {
            const std::string c = ch == ' ' ? "space" : ch == '\t' ? "tab" : std::string(1, ch);
            return "repeat:" + c + ":" + std::to_string(count);
        }
        }
        return "";
    }

    static mutation_scheme parse(std::string_view s)
    {
        for (auto k : {scheme_kind::case_toggle, scheme_kind::whitespace_variant, scheme_kind::nbsp_substitute,
                       scheme_kind::comment_inject, scheme_kind::redundant_parens, scheme_kind::url_reencode}) {
            if (mutation_scheme{k}.name() == s) return {k};
        }
        if (s.rfind("repeat:", 0) == 0) {
            const auto last = s.rfind(':');
            const auto c = s.substr(7, last - 7);
            mutation_scheme m{scheme_kind::bounded_repeat};
            if (c == "space") {
                m.ch = ' ';
            } else if (c == "tab") {
                m.ch = '\t';
            } else if (c.size() == 1) {
                m.ch = c[0];
            } else {
                throw parse_error("bad repeat character in scheme: " + std::string(s), 0);
            }
            try {
                m.count = std::stoi(std::string(s.substr(last + 1)));
            } catch (const std::exception &) {
                throw parse_error("bad repeat count in scheme: " + std::string(s), 0);
            }
            if (m.count < 1) throw parse_error("repeat count must be positive", 0);
            return m;
        }
        throw parse_error("unknown mutation scheme: " + std::string(s), 0);
    }

    bool operator==(const mutation_scheme &) const = default;
};

inline std::vector<mutation_scheme> default_schemes()
{
    return {{scheme_kind::case_toggle},    {scheme_kind::whitespace_variant}, {scheme_kind::nbsp_substitute},
            {scheme_kind::comment_inject}, {scheme_kind::redundant_parens},   {scheme_kind::url_reencode}};
}

struct mutation_config {
    std::vector<mutation_scheme> schemes = default_schemes();
    std::size_t budget{32};
    std::uint64_t seed{0};
};

struct mutant {
    std::string payload; // decoded form
    mutation_scheme scheme;
};

namespace lexer {

enum class kind { ident, number, string, comment, op, space };

struct token {
    kind k;
    std::string text;
};

inline bool ident_char(unsigned char c)
{
    return regex::is_word_byte(c) || c == '@' || c == '$' || c == '.';
}

inline bool space(unsigned char c) { return regex::is_space_byte(c) || c == 0xA0; }

inline std::vector<token> tokenize(std::string_view s)
{
    std::vector<token> out;
    std::size_t i = 0;
    auto push = [&](kind k, std::size_t end) {
        out.push_back({k, std::string(s.substr(i, end - i))});
        i = end;
    };
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        std::size_t j = i + 1;
        if (space(c)) {
            while (j < s.size() && space(static_cast<unsigned char>(s[j]))) ++j;
            push(kind::space, j);
        } else if (c == '\'' || c == '"') {
            while (j < s.size() && s[j] != static_cast<char>(c)) ++j;
            push(kind::string, std::min(j + 1, s.size()));
        } else if (c == '/' && j < s.size() && s[j] == '*') {
            const auto close = s.find("*/", j + 1);
            push(kind::comment, close == std::string_view::npos ? s.size() : close + 2);
        } else if (c == '#' || (c == '-' && j < s.size() && s[j] == '-')) {
            push(kind::comment, s.size());
        } else if (c >= '0' && c <= '9') {
            while (j < s.size() && (regex::is_word_byte(static_cast<unsigned char>(s[j])) || s[j] == '.')) ++j;
            push(kind::number, j);
        } else if (regex::is_word_byte(c) || c == '@') {
            while (j < s.size() && ident_char(static_cast<unsigned char>(s[j]))) ++j;
            push(kind::ident, j);
        } else {
            static constexpr std::string_view pairs[] = {"||", "&&", "<=", ">=", "!=", "<>"};
            for (auto p : pairs) {
                if (s.compare(i, 2, p) == 0) j = i + 2;
            }
            push(kind::op, j);
        }
    }
    return out;
}

inline std::string join(const std::vector<token> &ts)
{
    std::string out;
    for (const auto &t : ts) out += t.text;
    return out;
}

inline bool is_keyword(std::string_view word)
{
    static const std::set<std::string, std::less<>> kw = {
        "union",  "select", "insert", "update", "delete",   "drop",     "alter",     "create",   "rename",
        "truncate", "load", "having", "where",  "like",     "from",     "and",       "or",       "xor",
        "not",    "nand",   "all",    "distinct", "distinctrow", "order", "group",   "by",       "limit",
        "as",     "into",   "values", "set",    "table",    "exec",     "execute",   "waitfor",  "delay",
        "time",   "declare", "begin", "end",    "if",       "case",     "when",      "then",     "else",
        "sleep",  "benchmark", "concat", "group_concat", "char", "user", "database", "version", "procedure",
        "analyse", "regexp", "in",    "is",     "null",     "between",  "count",     "load_file", "open",
        "cursor", "for",    "use",    "while",  "schema",   "sounds",   "coalesce"};
    std::string low(word);
    for (auto &ch : low) {
        if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch + 32);
    }
    return kw.count(low) != 0;
}

// Index of the ')' closing the '(' at ts[open], or npos.
inline std::size_t matching_paren(const std::vector<token> &ts, std::size_t open)
{
    int depth = 0;
    for (std::size_t i = open; i < ts.size(); ++i) {
        if (ts[i].k != kind::op) continue;
        if (ts[i].text == "(") ++depth;
        if (ts[i].text == ")" && --depth == 0) return i;
    }
    return static_cast<std::size_t>(-1);
}

} // namespace lexer

namespace detail {

inline std::string upper(std::string s)
{
    for (auto &c : s) {
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 32);
    }
    return s;
}

inline std::string lower(std::string s) { return case_fold(s); }

inline std::vector<std::size_t> keyword_slots(const std::vector<lexer::token> &ts)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts[i].k == lexer::kind::ident && lexer::is_keyword(ts[i].text)) out.push_back(i);
    }
    return out;
}

inline std::vector<std::size_t> slots_of(const std::vector<lexer::token> &ts, lexer::kind k)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts[i].k == k) out.push_back(i);
    }
    return out;
}

template <class F> std::string rewrite(std::vector<lexer::token> ts, const std::vector<std::size_t> &slots, F &&f)
{
    for (std::size_t n = 0; n < slots.size(); ++n) ts[slots[n]].text = f(ts[slots[n]].text, n);
    return lexer::join(ts);
}

inline std::string percent(unsigned char c)
{
    static constexpr char digits[] = "0123456789ABCDEF";
    return {'%', digits[c >> 4], digits[c & 0xf]};
}

inline std::vector<std::string> case_toggle(const std::vector<lexer::token> &ts, std::mt19937_64 &rng)
{
    const auto kw = keyword_slots(ts);
    if (kw.empty()) return {};
    std::vector<std::string> out;
    out.push_back(rewrite(ts, kw, [](const std::string &t, std::size_t) { return upper(t); }));
    out.push_back(rewrite(ts, kw, [](const std::string &t, std::size_t) {
        auto s = lower(t);
        s[0] = upper(s.substr(0, 1))[0];
        return s;
    }));
    out.push_back(rewrite(ts, kw, [](const std::string &t, std::size_t n) {
        auto s = lower(t);
        const std::size_t k = n % s.size();
        s[k] = upper(s.substr(k, 1))[0];
        return s;
    }));
    for (int r = 0; r < 2; ++r) {
        out.push_back(rewrite(ts, kw, [&](const std::string &t, std::size_t) {
            std::string s = t;
            for (auto &c : s) {
                const bool up = (rng() & 1U) != 0;
                if (c >= 'a' && c <= 'z' && up) c = static_cast<char>(c - 32);
                else if (c >= 'A' && c <= 'Z' && !up) c = static_cast<char>(c + 32);
            }
            return s;
        }));
    }
    return out;
}

inline std::vector<std::string> whitespace_variant(const std::vector<lexer::token> &ts)
{
    const auto sp = slots_of(ts, lexer::kind::space);
    if (sp.empty()) return {};
    std::vector<std::string> out;
    for (const char *r : {"  ", "\t", "\n", "\r\n"}) {
        out.push_back(rewrite(ts, sp, [&](const std::string &, std::size_t) { return std::string(r); }));
    }
    return out;
}

inline std::vector<std::string> nbsp_substitute(const std::vector<lexer::token> &ts)
{
    const auto sp = slots_of(ts, lexer::kind::space);
    if (sp.empty()) return {};
    return {rewrite(ts, sp, [](const std::string &, std::size_t) { return std::string("\xA0"); }),
            rewrite(ts, sp, [](const std::string &, std::size_t) { return std::string("\xC2\xA0"); })};
}

inline std::vector<std::string> comment_inject(const std::vector<lexer::token> &ts)
{
    std::vector<std::string> out;
    const auto sp = slots_of(ts, lexer::kind::space);
    if (!sp.empty()) {
        out.push_back(rewrite(ts, sp, [](const std::string &, std::size_t) { return std::string("/**/"); }));
    }
    auto kw = keyword_slots(ts);
    std::vector<std::size_t> later;
    for (const auto i : kw) {
        if (i > 0 && ts[i - 1].k == lexer::kind::space) later.push_back(i);
    }
    if (!later.empty()) {
        out.push_back(rewrite(ts, later, [](const std::string &t, std::size_t) { return "/*!" + t + "*/"; }));
    }
    if (!sp.empty()) {
        out.push_back(rewrite(ts, sp, [](const std::string &t, std::size_t) { return t + "/**/" + t; }));
    }
    return out;
}

inline std::string wrap_group(std::vector<lexer::token> ts, std::size_t open, std::size_t close, int times)
{
    ts[open].text = std::string(static_cast<std::size_t>(times), '(');
    ts[close].text = std::string(static_cast<std::size_t>(times), ')');
    return lexer::join(ts);
}

inline std::vector<std::string> redundant_parens(const std::vector<lexer::token> &ts)
{
    std::vector<std::string> out;
    const auto nums = slots_of(ts, lexer::kind::number);
    if (!nums.empty()) {
        out.push_back(rewrite(ts, nums, [](const std::string &t, std::size_t) { return "(" + t + ")"; }));
    }
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts[i].k == lexer::kind::op && ts[i].text == "(") {
            const auto close = lexer::matching_paren(ts, i);
            if (close != static_cast<std::size_t>(-1)) out.push_back(wrap_group(ts, i, close, 2));
        }
    }
    for (const auto n : nums) {
        out.push_back(rewrite(ts, {n}, [](const std::string &t, std::size_t) { return "(" + t + ")"; }));
    }
    return out;
}

inline std::vector<std::string> url_reencode(const std::vector<lexer::token> &ts)
{
    std::vector<std::string> out;
    const auto sp = slots_of(ts, lexer::kind::space);
    if (!sp.empty()) {
        out.push_back(rewrite(ts, sp, [](const std::string &t, std::size_t) {
            std::string r;
            for (const char c : t) r += percent(static_cast<unsigned char>(c));
            return r;
        }));
    }
    const auto kw = keyword_slots(ts);
    if (!kw.empty()) {
        out.push_back(rewrite(ts, kw, [](const std::string &t, std::size_t) {
            return percent(static_cast<unsigned char>(t[0])) + t.substr(1);
        }));
    }
    const auto ops = slots_of(ts, lexer::kind::op);
    if (!ops.empty()) {
        out.push_back(rewrite(ts, ops, [](const std::string &t, std::size_t) {
            std::string r;
            for (const char c : t) r += percent(static_cast<unsigned char>(c));
            return r;
        }));
    }
    return out;
}

inline std::vector<std::string> bounded_repeat(const std::vector<lexer::token> &ts, char ch, int count)
{
    std::vector<std::string> out;
    if (ch == ' ' || ch == '\t') {
        const auto sp = slots_of(ts, lexer::kind::space);
        auto grow = [&](const std::string &t, std::size_t) {
            const std::size_t n = std::max<std::size_t>(static_cast<std::size_t>(count), t.size());
            return std::string(n, ch);
        };
        if (!sp.empty()) out.push_back(rewrite(ts, sp, grow));
        for (const auto s : sp) out.push_back(rewrite(ts, {s}, grow));
    } else if (ch == '(' || ch == ')') {
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (ts[i].k == lexer::kind::op && ts[i].text == "(") {
                const auto close = lexer::matching_paren(ts, i);
                if (close != static_cast<std::size_t>(-1)) out.push_back(wrap_group(ts, i, close, count));
            }
        }
    }
    return out;
}

} // namespace detail

// Scheme outputs are interleaved round-robin so a small budget still samples
// every scheme; duplicates and identities are dropped.
inline std::vector<mutant> generate(std::string_view payload, const mutation_config &cfg)
{
    std::mt19937_64 rng(cfg.seed);
    const auto ts = lexer::tokenize(payload);
    std::vector<std::vector<std::string>> lists;
    for (const auto &s : cfg.schemes) {
        switch (s.kind) {
        case scheme_kind::case_toggle:
            lists.push_back(detail::case_toggle(ts, rng));
            break;
        case scheme_kind::whitespace_variant:
            lists.push_back(detail::whitespace_variant(ts));
            break;
        case scheme_kind::nbsp_substitute:
            lists.push_back(detail::nbsp_substitute(ts));
            break;
        case scheme_kind::comment_inject:
            lists.push_back(detail::comment_inject(ts));
            break;
        case scheme_kind::redundant_parens:
            lists.push_back(detail::redundant_parens(ts));
            break;
        case scheme_kind::url_reencode:
            lists.push_back(detail::url_reencode(ts));
            break;
        case scheme_kind::bounded_repeat:
            lists.push_back(detail::bounded_repeat(ts, s.ch, s.count));
            break;
        }
    }
    std::vector<mutant> out;
    std::set<std::string, std::less<>> seen{std::string(payload)};
    std::size_t longest = 0;
    for (const auto &l : lists) longest = std::max(longest, l.size());
    for (std::size_t k = 0; k < longest && out.size() < cfg.budget; ++k) {
        for (std::size_t s = 0; s < lists.size() && out.size() < cfg.budget; ++s) {
            if (k < lists[s].size() && seen.insert(lists[s][k]).second) {
                out.push_back({lists[s][k], cfg.schemes[s]});
            }
        }
    }
    return out;
}

// Repetitions of a bounded repeatable character past the bound's maximum.
inline std::vector<std::string> targeted_repeats(std::string_view payload, const quantifier_bound &bound)
{
    const auto ts = lexer::tokenize(payload);
    const auto target = static_cast<std::size_t>(bound.max_occurrences) + 1;
    std::vector<std::string> out;
    const char ws = bound.bytes.test(' ') ? ' ' : bound.bytes.test('\t') ? '\t' : '\0';
    if (ws != '\0') {
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (ts[i].k == lexer::kind::space) {
                auto copy = ts;
                copy[i].text = std::string(std::max(target, ts[i].text.size() + 1), ws);
                out.push_back(lexer::join(copy));
            } else if (ts[i].k == lexer::kind::string) {
                // extend runs inside a literal; never create new ones there
                const auto &t = ts[i].text;
                for (std::size_t p = 0; p < t.size();) {
                    if (t[p] != ' ' && t[p] != '\t') {
                        ++p;
                        continue;
                    }
                    std::size_t e = p;
                    while (e < t.size() && (t[e] == ' ' || t[e] == '\t')) ++e;
                    auto copy = ts;
                    copy[i].text = t.substr(0, p) + std::string(std::max(target, e - p + 1), ws) + t.substr(e);
                    out.push_back(lexer::join(copy));
                    p = e;
                }
            }
        }
        for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
            if (ts[i].k == lexer::kind::space || ts[i + 1].k == lexer::kind::space ||
                ts[i].k == lexer::kind::comment || ts[i + 1].k == lexer::kind::comment) {
                continue;
            }
            auto copy = ts;
            copy[i].text += std::string(target, ws);
            out.push_back(lexer::join(copy));
        }
    }
    if (bound.bytes.test('(') || bound.bytes.test(')')) {
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (ts[i].k == lexer::kind::op && ts[i].text == "(") {
                const auto close = lexer::matching_paren(ts, i);
                if (close != static_cast<std::size_t>(-1)) {
                    out.push_back(detail::wrap_group(ts, i, close, static_cast<int>(target)));
                }
            }
        }
    }
    std::vector<std::string> uniq;
    std::set<std::string, std::less<>> seen{std::string(payload)};
    for (auto &m : out) {
        if (seen.insert(m).second) uniq.push_back(std::move(m));
    }
    return uniq;
}

} // namespace sigaudit
