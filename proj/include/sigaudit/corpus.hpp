#pragma once

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigaudit/errors.hpp"
#include "sigaudit/regex.hpp"
#include "sigaudit/util.hpp"

namespace sigaudit {

enum class intent { exec_unauthorized, logic_error, probe };
enum class dialect { mysql, mssql, generic };
enum class file_format { json, tsv };

inline std::string_view to_string(intent i)
{
    switch (i) {
    case intent::exec_unauthorized:
        return "exec_unauthorized";
    case intent::logic_error:
        return "logic_error";
    case intent::probe:
        return "probe";
    }
    return "";
}

inline intent parse_intent(std::string_view token)
{
    if (token == "exec_unauthorized" || token == "exec") return intent::exec_unauthorized;
    if (token == "logic_error" || token == "error") return intent::logic_error;
    if (token == "probe") return intent::probe;
    throw unknown_intent(std::string(token));
}

inline std::string_view to_string(dialect d)
{
    switch (d) {
    case dialect::mysql:
        return "mysql";
    case dialect::mssql:
        return "mssql";
    case dialect::generic:
        return "generic";
    }
    return "";
}

inline dialect parse_dialect(std::string_view token)
{
    if (token == "mysql") return dialect::mysql;
    if (token == "mssql") return dialect::mssql;
    if (token == "generic") return dialect::generic;
    throw unknown_dialect(std::string(token));
}

inline bool is_logical(intent i) { return i != intent::probe; }

struct signature {
    std::string id;
    std::string pattern;
    std::string note;
    bool reconstructed{false};

    bool operator==(const signature &) const = default;
};

inline constexpr std::string_view no_target = "none";

struct attack_vector {
    std::string id;
    std::string target;
    std::string payload; // URL-encoded, as submitted
    sigaudit::intent intent{intent::exec_unauthorized};
    std::vector<dialect> dialects; // sorted, unique
    std::string note;

    bool operator==(const attack_vector &) const = default;
};

struct corpus {
    std::vector<signature> signatures;
    std::vector<attack_vector> vectors;

    const signature *find_signature(std::string_view id) const
    {
        for (const auto &s : signatures) {
            if (s.id == id) return &s;
        }
        return nullptr;
    }
    const attack_vector *find_vector(std::string_view id) const
    {
        for (const auto &v : vectors) {
            if (v.id == id) return &v;
        }
        return nullptr;
    }
};

inline file_format format_from_path(std::string_view path)
{
    const auto dot = path.rfind('.');
    if (dot != std::string_view::npos && path.substr(dot) == ".json") {
        return file_format::json;
    }
    return file_format::tsv;
}

namespace detail {

inline std::vector<dialect> parse_dialects(std::string_view field)
{
    std::vector<dialect> out;
    for (const auto &tok : split(field, ',')) {
        const auto t = trim(tok);
        if (!t.empty()) {
            out.push_back(parse_dialect(t));
        }
    }
    if (out.empty()) {
        out.push_back(dialect::generic);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline std::string join_dialects(const std::vector<dialect> &ds)
{
    std::string out;
    for (const auto d : ds) {
        if (!out.empty()) out += ',';
        out += to_string(d);
    }
    return out;
}

template <class F> void for_each_row(std::istream &in, F &&f)
{
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
        ++no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        f(std::string_view(line), no);
    }
}

inline nlohmann::json read_json(std::istream &in)
{
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error &e) {
        throw parse_error(e.what(), 0);
    }
}

inline void validate_pattern(const signature &s, std::size_t line)
{
    if (s.pattern.empty()) {
        throw parse_error("empty pattern for " + s.id, line);
    }
    try {
        regex::pattern check(s.pattern);
    } catch (const regex_dialect_error &e) {
        throw e.with_id(s.id);
    }
}

} // namespace detail

inline std::vector<signature> load_signatures(std::istream &in, file_format fmt)
{
    std::vector<signature> out;
    std::unordered_set<std::string> seen;
    auto add = [&](signature s, std::size_t line) {
        if (s.id.empty()) {
            throw parse_error("empty signature id", line);
        }
        if (!seen.insert(s.id).second) {
            throw duplicate_id(s.id);
        }
        detail::validate_pattern(s, line);
        out.push_back(std::move(s));
    };
    if (fmt == file_format::tsv) {
        detail::for_each_row(in, [&](std::string_view row, std::size_t no) {
            const auto tab = row.find('\t');
            if (tab == std::string_view::npos) {
                throw parse_error("expected id<TAB>pattern", no);
            }
            signature s;
            s.id = std::string(trim(row.substr(0, tab)));
            s.pattern = std::string(row.substr(tab + 1));
            add(std::move(s), no);
        });
        return out;
    }
    in >> std::ws;
    if (in.peek() == std::char_traits<char>::eof()) {
        return out;
    }
    const auto doc = detail::read_json(in);
    if (!doc.is_array()) {
        throw parse_error("signature JSON must be an array", 0);
    }
    std::size_t idx = 0;
    for (const auto &o : doc) {
        ++idx;
        try {
            signature s;
            s.id = o.at("id").get<std::string>();
            s.pattern = o.at("pattern").get<std::string>();
            s.note = o.value("note", std::string());
            s.reconstructed = o.value("reconstructed", false);
            add(std::move(s), idx);
        } catch (const nlohmann::json::exception &e) {
            throw parse_error(std::string("signature entry: ") + e.what(), idx);
        }
    }
    return out;
}

// known may be null, in which case target references are not checked.
inline std::vector<attack_vector> load_vectors(
    std::istream &in, file_format fmt, const std::vector<signature> *known = nullptr)
{
    std::unordered_set<std::string> ids;
    std::unordered_set<std::string> targets;
    if (known != nullptr) {
        for (const auto &s : *known) targets.insert(s.id);
    }
    std::vector<attack_vector> out;
    auto add = [&](attack_vector v, std::size_t line) {
        if (v.id.empty()) {
            throw parse_error("empty vector id", line);
        }
        if (v.payload.empty()) {
            throw parse_error("empty payload for " + v.id, line);
        }
        if (!ids.insert(v.id).second) {
            throw duplicate_id(v.id);
        }
        if (known != nullptr && v.target != no_target && targets.count(v.target) == 0) {
            throw unknown_signature_ref(v.target);
        }
        out.push_back(std::move(v));
    };
    if (fmt == file_format::tsv) {
        detail::for_each_row(in, [&](std::string_view row, std::size_t no) {
            std::vector<std::string_view> f;
            std::size_t start = 0;
            for (int i = 0; i < 4; ++i) {
                const auto tab = row.find('\t', start);
                if (tab == std::string_view::npos) {
                    throw parse_error("expected id<TAB>target<TAB>intent<TAB>dialects<TAB>payload", no);
                }
                f.push_back(row.substr(start, tab - start));
                start = tab + 1;
            }
            attack_vector v;
            v.id = std::string(trim(f[0]));
            v.target = std::string(trim(f[1]));
            v.intent = parse_intent(trim(f[2]));
            v.dialects = detail::parse_dialects(f[3]);
            v.payload = std::string(row.substr(start));
            add(std::move(v), no);
        });
        return out;
    }
    in >> std::ws;
    if (in.peek() == std::char_traits<char>::eof()) {
        return out;
    }
    const auto doc = detail::read_json(in);
    if (!doc.is_array()) {
        throw parse_error("vector JSON must be an array", 0);
    }
    std::size_t idx = 0;
    for (const auto &o : doc) {
        ++idx;
        try {
            attack_vector v;
            v.id = o.at("id").get<std::string>();
            v.target = o.value("target", std::string(no_target));
            v.intent = parse_intent(o.value("intent", std::string("exec_unauthorized")));
            const auto &d = o.contains("dialects") ? o.at("dialects") : nlohmann::json("generic");
            if (d.is_array()) {
                std::string joined;
                for (const auto &t : d) joined += t.get<std::string>() + ",";
                v.dialects = detail::parse_dialects(joined);
            } else {
                v.dialects = detail::parse_dialects(d.get<std::string>());
            }
            v.payload = o.at("payload").get<std::string>();
            v.note = o.value("note", std::string());
            add(std::move(v), idx);
        } catch (const nlohmann::json::exception &e) {
            throw parse_error(std::string("vector entry: ") + e.what(), idx);
        }
    }
    return out;
}

inline void write_signatures(std::ostream &out, const std::vector<signature> &sigs, file_format fmt)
{
    if (fmt == file_format::tsv) {
        for (const auto &s : sigs) out << s.id << '\t' << s.pattern << '\n';
        return;
    }
    auto arr = nlohmann::json::array();
    for (const auto &s : sigs) {
        arr.push_back({{"id", s.id}, {"pattern", s.pattern}, {"note", s.note},
                       {"reconstructed", s.reconstructed}});
    }
    out << arr.dump(1) << '\n';
}

inline void write_vectors(std::ostream &out, const std::vector<attack_vector> &vecs, file_format fmt)
{
    if (fmt == file_format::tsv) {
        for (const auto &v : vecs) {
            out << v.id << '\t' << v.target << '\t' << to_string(v.intent) << '\t'
                << detail::join_dialects(v.dialects) << '\t' << v.payload << '\n';
        }
        return;
    }
    auto arr = nlohmann::json::array();
    for (const auto &v : vecs) {
        arr.push_back({{"id", v.id}, {"target", v.target}, {"intent", std::string(to_string(v.intent))},
                       {"dialects", detail::join_dialects(v.dialects)}, {"payload", v.payload},
                       {"note", v.note}});
    }
    out << arr.dump(1) << '\n';
}

inline std::vector<signature> load_signatures_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot open " + path);
    }
    try {
        return load_signatures(in, format_from_path(path));
    } catch (const parse_error &e) {
        throw parse_error(path + ": " + e.detail(), e.line());
    }
}

inline std::vector<attack_vector> load_vectors_file(
    const std::string &path, const std::vector<signature> *known = nullptr)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot open " + path);
    }
    try {
        return load_vectors(in, format_from_path(path), known);
    } catch (const parse_error &e) {
        throw parse_error(path + ": " + e.detail(), e.line());
    }
}

inline corpus load_corpus(const std::string &sig_path, const std::string &vec_path)
{
    corpus c;
    c.signatures = load_signatures_file(sig_path);
    c.vectors = load_vectors_file(vec_path, &c.signatures);
    return c;
}

// L_a: ids of vectors whose intent is logical.
inline std::set<std::string> logical_subset(const corpus &c)
{
    std::set<std::string> out;
    for (const auto &v : c.vectors) {
        if (is_logical(v.intent)) out.insert(v.id);
    }
    return out;
}

inline corpus filter_by_dialect(const corpus &c, dialect d)
{
    corpus out;
    out.signatures = c.signatures;
    for (const auto &v : c.vectors) {
        const bool keep = std::find(v.dialects.begin(), v.dialects.end(), d) != v.dialects.end() ||
                          std::find(v.dialects.begin(), v.dialects.end(), dialect::generic) !=
                              v.dialects.end();
        if (keep) out.vectors.push_back(v);
    }
    return out;
}

inline std::string corpus_fingerprint(const corpus &c)
{
    std::ostringstream os;
    write_signatures(os, c.signatures, file_format::tsv);
    os << "\x1e";
    write_vectors(os, c.vectors, file_format::tsv);
    return fingerprint(os.str());
}

} // namespace sigaudit
