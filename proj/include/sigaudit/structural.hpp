#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sigaudit/corpus.hpp"
#include "sigaudit/errors.hpp"
#include "sigaudit/regex.hpp"

namespace sigaudit {

struct operator_lexicon {
    std::vector<std::string> words;    // need a non-word neighbour on both sides
    std::vector<std::string> symbols;  // matched verbatim, longest first
    std::vector<std::string> keywords; // reported, never used for incompleteness

    static operator_lexicon sql()
    {
        return {{"and", "or", "xor", "nand", "not"},
                {"||", "&&", "^", "|", "&"},
                {"union", "select", "insert", "update", "delete", "drop", "alter", "create", "rename",
                 "truncate", "load", "having", "where", "like", "from"}};
    }

    bool contains(std::string_view tok) const
    {
        return std::find(words.begin(), words.end(), tok) != words.end() ||
               std::find(symbols.begin(), symbols.end(), tok) != symbols.end();
    }

    // Adds a token, classifying it as a word when it is all word bytes.
    void add(const std::string &tok)
    {
        if (tok.empty() || contains(tok)) return;
        const bool word = std::all_of(tok.begin(), tok.end(),
                                      [](char c) { return regex::is_word_byte(static_cast<unsigned char>(c)); });
        (word ? words : symbols).push_back(tok);
    }
};

struct tokenized_signature {
    std::string signature_id;
    std::set<std::string> operators; // S_O(n)
    std::set<std::string> keywords;
};

namespace detail {

struct flat_atom {
    enum class kind { literal, bytes, edge } k;
    unsigned char byte{0};
    regex::byte_set set;
};

using flat_seq = std::vector<flat_atom>;

inline constexpr std::size_t flatten_cap = 4096;

// Enumerates the atom sequences a pattern can produce, one iteration per
// repeat and both choices for optional parts. Past the cap a sub-tree is
// replaced by an opaque atom, which can only hide tokens, never invent them.
inline std::vector<flat_seq> flatten(const regex::node &n)
{
    using regex::node_kind;
    auto opaque = [] {
        flat_atom a{flat_atom::kind::bytes, 0, {}};
        a.set.set();
        return std::vector<flat_seq>{{a}};
    };
    switch (n.kind) {
    case node_kind::empty:
        return {{}};
    case node_kind::literal: {
        unsigned char b = n.byte;
        if (b >= 'A' && b <= 'Z') b = static_cast<unsigned char>(b + 32);
        return {{flat_atom{flat_atom::kind::literal, b, {}}}};
    }
    case node_kind::set:
    case node_kind::any:
        return {{flat_atom{flat_atom::kind::bytes, 0, regex::atom_bytes(n, true)}}};
    case node_kind::line_begin:
    case node_kind::line_end:
        return {{flat_atom{flat_atom::kind::edge, 0, {}}}};
    case node_kind::group:
        return flatten(n.children.front());
    case node_kind::alternation: {
        std::vector<flat_seq> out;
        for (const auto &c : n.children) {
            auto part = flatten(c);
            out.insert(out.end(), part.begin(), part.end());
            if (out.size() > flatten_cap) return opaque();
        }
        return out;
    }
    case node_kind::concat: {
        std::vector<flat_seq> acc{{}};
        for (const auto &c : n.children) {
            auto part = flatten(c);
            if (acc.size() * part.size() > flatten_cap) part = opaque();
            std::vector<flat_seq> next;
            next.reserve(acc.size() * part.size());
            for (const auto &a : acc) {
                for (const auto &p : part) {
                    flat_seq s = a;
                    s.insert(s.end(), p.begin(), p.end());
                    next.push_back(std::move(s));
                }
            }
            acc = std::move(next);
        }
        return acc;
    }
    case node_kind::repeat: {
        const auto &body = n.children.front();
        std::vector<flat_seq> out;
        if (n.min == 0) out.push_back({});
        if (n.max == 1 || !body.is_atom()) {
            auto part = flatten(body);
            out.insert(out.end(), part.begin(), part.end());
        } else {
            out.push_back({flat_atom{flat_atom::kind::bytes, 0, regex::atom_bytes(body, true)}});
        }
        return out.size() > flatten_cap ? opaque() : out;
    }
    }
    return {{}};
}

inline bool admits_boundary(const flat_seq &s, std::ptrdiff_t idx)
{
    if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(s.size())) return true;
    const auto &a = s[static_cast<std::size_t>(idx)];
    switch (a.k) {
    case flat_atom::kind::edge:
        return true;
    case flat_atom::kind::literal:
        return !regex::is_word_byte(a.byte);
    case flat_atom::kind::bytes:
        return (a.set & ~regex::word_set()).any();
    }
    return true;
}

inline void scan_words(const flat_seq &s, std::size_t run_begin, const std::string &run,
                       const std::vector<std::string> &words, std::set<std::string> &out)
{
    for (const auto &w : words) {
        for (std::size_t k = run.find(w); k != std::string::npos; k = run.find(w, k + 1)) {
            const std::size_t e = k + w.size();
            const bool left = k > 0 ? !regex::is_word_byte(static_cast<unsigned char>(run[k - 1]))
                                    : admits_boundary(s, static_cast<std::ptrdiff_t>(run_begin) - 1);
            const bool right = e < run.size()
                                   ? !regex::is_word_byte(static_cast<unsigned char>(run[e]))
                                   : admits_boundary(s, static_cast<std::ptrdiff_t>(run_begin + run.size()));
            if (left && right) out.insert(w);
        }
    }
}

inline void scan_symbols(const std::string &run, const std::vector<std::string> &symbols,
                         std::set<std::string> &out)
{
    std::size_t k = 0;
    while (k < run.size()) {
        std::size_t best = 0;
        for (const auto &sym : symbols) {
            if (sym.size() > best && run.compare(k, sym.size(), sym) == 0) best = sym.size();
        }
        if (best == 0) {
            ++k;
            continue;
        }
        out.insert(run.substr(k, best));
        k += best;
    }
}

} // namespace detail

inline tokenized_signature extract_operators(const signature &s, const operator_lexicon &lex)
{
    regex::node ast;
    try {
        ast = regex::parse(s.pattern);
    } catch (const regex_dialect_error &e) {
        throw e.with_id(s.id);
    }
    tokenized_signature t{s.id, {}, {}};
    for (const auto &seq : detail::flatten(ast)) {
        std::size_t i = 0;
        while (i < seq.size()) {
            if (seq[i].k != detail::flat_atom::kind::literal) {
                ++i;
                continue;
            }
            const std::size_t start = i;
            std::string run;
            while (i < seq.size() && seq[i].k == detail::flat_atom::kind::literal) {
                run += static_cast<char>(seq[i].byte);
                ++i;
            }
            detail::scan_words(seq, start, run, lex.words, t.operators);
            detail::scan_symbols(run, lex.symbols, t.operators);
            detail::scan_words(seq, start, run, lex.keywords, t.keywords);
        }
    }
    return t;
}

struct expansion_caps {
    int max_depth{3};
    std::size_t max_product{64};
};

struct subrule_set {
    std::string signature_id;
    std::vector<std::string> subrules; // SS_(n)
    bool expansion_complete{true};
};

namespace detail {

class expander {
public:
    expander(std::string_view src, expansion_caps caps) : src_(src), caps_(caps) {}

    std::vector<std::string> run(const regex::node &root)
    {
        auto out = expand(root, 0, true);
        if (out.size() > caps_.max_product) {
            complete_ = false;
            return {std::string(src_)};
        }
        return out;
    }

    bool complete() const noexcept { return complete_; }

private:
    std::string text(const regex::node &n) const { return std::string(src_.substr(n.begin, n.end - n.begin)); }

    std::vector<std::string> branches(const regex::node &alt, int depth)
    {
        if (depth >= caps_.max_depth) {
            complete_ = false;
            return {};
        }
        std::vector<std::string> out;
        for (const auto &b : alt.children) {
            auto part = expand(b, depth + 1, false);
            out.insert(out.end(), part.begin(), part.end());
            if (out.size() > caps_.max_product) {
                complete_ = false;
                return {};
            }
        }
        return out;
    }

    std::vector<std::string> expand(const regex::node &n, int depth, bool root)
    {
        using regex::node_kind;
        switch (n.kind) {
        case node_kind::alternation: {
            auto out = branches(n, depth);
            return out.empty() ? std::vector<std::string>{text(n)} : out;
        }
        case node_kind::group: {
            const auto &body = n.children.front();
            if (body.kind == node_kind::alternation) {
                auto out = branches(body, depth);
                if (out.empty()) return {text(n)};
                if (root) {
                    for (auto &b : out) b = "(?:" + b + ")";
                }
                return out;
            }
            const std::string open = n.capturing ? "(" : "(?:";
            auto inner = expand(body, depth, false);
            for (auto &v : inner) v = open + v + ")";
            return inner;
        }
        case node_kind::concat: {
            std::vector<std::string> acc{""};
            for (const auto &c : n.children) {
                auto part = expand(c, depth, false);
                if (acc.size() * part.size() > caps_.max_product) {
                    complete_ = false;
                    part = {text(c)};
                }
                std::vector<std::string> next;
                next.reserve(acc.size() * part.size());
                for (const auto &a : acc) {
                    for (const auto &p : part) next.push_back(a + p);
                }
                acc = std::move(next);
            }
            return acc;
        }
        default:
            return {text(n)};
        }
    }

    std::string_view src_;
    expansion_caps caps_;
    bool complete_{true};
};

} // namespace detail

// Cross-product expansion of unquantified alternation groups. Quantified
// groups stay verbatim since each iteration may pick a different branch.
inline subrule_set expand_subrules(const signature &s, expansion_caps caps = {})
{
    regex::node ast;
    try {
        ast = regex::parse(s.pattern);
    } catch (const regex_dialect_error &e) {
        throw e.with_id(s.id);
    }
    detail::expander ex(s.pattern, caps);
    subrule_set out{s.id, ex.run(ast), true};
    out.expansion_complete = ex.complete();
    return out;
}

struct quantifier_bound {
    std::string signature_id;
    std::size_t position{0};
    std::string char_class;
    int max_occurrences{0};
    regex::byte_set bytes; // case-folded bytes the atom admits

    bool operator==(const quantifier_bound &o) const
    {
        return signature_id == o.signature_id && position == o.position && char_class == o.char_class &&
               max_occurrences == o.max_occurrences;
    }
};

inline regex::byte_set default_repeatable()
{
    regex::byte_set s;
    for (const unsigned char c : {' ', '\t', '(', ')', '\'', '"'}) s.set(c);
    return s;
}

inline std::vector<quantifier_bound> bounded_specials(const signature &s,
                                                      const regex::byte_set &repeatable = default_repeatable())
{
    regex::node ast;
    try {
        ast = regex::parse(s.pattern);
    } catch (const regex_dialect_error &e) {
        throw e.with_id(s.id);
    }
    std::vector<quantifier_bound> out;
    auto visit = [&](auto &&self, const regex::node &n) -> void {
        if (n.kind == regex::node_kind::repeat && n.max >= 0) {
            const regex::node *body = &n.children.front();
            while (body->kind == regex::node_kind::group && body->children.front().is_atom()) {
                body = &body->children.front();
            }
            if (body->is_atom()) {
                const auto bytes = regex::atom_bytes(*body, true);
                if ((bytes & repeatable).any()) {
                    out.push_back({s.id, body->begin, s.pattern.substr(body->begin, body->end - body->begin),
                                   n.max, bytes});
                }
            }
        }
        for (const auto &c : n.children) self(self, c);
    };
    visit(visit, ast);
    return out;
}

} // namespace sigaudit
