#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigaudit/errors.hpp"
#include "sigaudit/matcher.hpp"
#include "sigaudit/util.hpp"

namespace sigaudit {

struct contribution_entry {
    std::string signature_id;
    std::size_t count{0};
    double percent{0.0};

    bool operator==(const contribution_entry &) const = default;
};

struct contribution_profile {
    std::size_t total{0};
    std::vector<contribution_entry> ranking; // count desc, then natural id order

    bool operator==(const contribution_profile &) const = default;
};

inline contribution_profile contribution(const detection_matrix &m)
{
    contribution_profile p;
    p.total = m.vector_ids.size();
    for (std::size_t n = 0; n < m.signature_ids.size(); ++n) {
        const auto c = m.rows[n].count();
        const double pct = p.total == 0 ? 0.0 : 100.0 * static_cast<double>(c) / static_cast<double>(p.total);
        p.ranking.push_back({m.signature_ids[n], c, pct});
    }
    std::stable_sort(p.ranking.begin(), p.ranking.end(), [](const auto &a, const auto &b) {
        if (a.count != b.count) return a.count > b.count;
        return natural_less(a.signature_id, b.signature_id);
    });
    return p;
}

struct set_partition {
    std::vector<std::string> a;
    std::vector<std::string> b;
};

inline set_partition partition(const detection_matrix &m, const std::vector<std::string> &explicit_a)
{
    std::set<std::string> wanted(explicit_a.begin(), explicit_a.end());
    for (const auto &id : wanted) {
        if (std::find(m.signature_ids.begin(), m.signature_ids.end(), id) == m.signature_ids.end()) {
            throw unknown_id(id);
        }
    }
    set_partition p;
    for (const auto &id : m.signature_ids) (wanted.count(id) != 0 ? p.a : p.b).push_back(id);
    return p;
}

inline set_partition partition(const detection_matrix &m, std::size_t threshold)
{
    set_partition p;
    for (std::size_t n = 0; n < m.signature_ids.size(); ++n) {
        (m.rows[n].count() >= threshold ? p.a : p.b).push_back(m.signature_ids[n]);
    }
    return p;
}

struct overlap_stats {
    std::size_t only_a{0};
    std::size_t only_b{0};
    std::size_t both{0};
    std::size_t neither{0};

    std::size_t total() const { return only_a + only_b + both + neither; }
    std::size_t union_a() const { return only_a + both; }
    std::size_t union_b() const { return only_b + both; }

    bool operator==(const overlap_stats &) const = default;
};

inline bit_row union_of(const detection_matrix &m, const std::vector<std::string> &ids)
{
    bit_row u(m.vector_ids.size());
    for (const auto &id : ids) u |= m.row(id);
    return u;
}

inline overlap_stats overlap(const detection_matrix &m, const std::vector<std::string> &a,
                             const std::vector<std::string> &b)
{
    const auto ua = union_of(m, a);
    const auto ub = union_of(m, b);
    overlap_stats s;
    for (std::size_t v = 0; v < m.vector_ids.size(); ++v) {
        const bool x = ua.test(v);
        const bool y = ub.test(v);
        if (x && y) ++s.both;
        else if (x) ++s.only_a;
        else if (y) ++s.only_b;
        else ++s.neither;
    }
    return s;
}

// One id per line; blank lines and '#' comments skipped.
inline std::vector<std::string> load_id_list(const std::string &path)
{
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        out.emplace_back(t);
    }
    return out;
}

inline std::string one_decimal(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

inline void write_histogram_csv(std::ostream &out, const contribution_profile &p)
{
    out << "rank,signature,count,percent\n";
    for (std::size_t i = 0; i < p.ranking.size(); ++i) {
        const auto &e = p.ranking[i];
        out << (i + 1) << ',' << e.signature_id << ',' << e.count << ',' << one_decimal(e.percent) << '\n';
    }
}

inline nlohmann::json to_json(const contribution_profile &p)
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto &e : p.ranking) {
        arr.push_back({{"signature", e.signature_id}, {"count", e.count}, {"percent", one_decimal(e.percent)}});
    }
    return {{"total", p.total}, {"ranking", arr}};
}

inline contribution_profile profile_from_json(const nlohmann::json &j)
{
    contribution_profile p;
    p.total = j.at("total").get<std::size_t>();
    for (const auto &e : j.at("ranking")) {
        const auto c = e.at("count").get<std::size_t>();
        const double pct = p.total == 0 ? 0.0 : 100.0 * static_cast<double>(c) / static_cast<double>(p.total);
        p.ranking.push_back({e.at("signature").get<std::string>(), c, pct});
    }
    return p;
}

inline nlohmann::json to_json(const overlap_stats &s)
{
    return {{"only_a", s.only_a}, {"only_b", s.only_b}, {"both", s.both}, {"neither", s.neither},
            {"union_a", s.union_a()}, {"union_b", s.union_b()}};
}

inline overlap_stats overlap_from_json(const nlohmann::json &j)
{
    return {j.at("only_a").get<std::size_t>(), j.at("only_b").get<std::size_t>(), j.at("both").get<std::size_t>(),
            j.at("neither").get<std::size_t>()};
}

} // namespace sigaudit
