#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigaudit/corpus.hpp"
#include "sigaudit/normalize.hpp"
#include "sigaudit/regex.hpp"

namespace sigaudit {

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results must be written
// to per-index slots so the outcome is independent of scheduling.
template <class F> void parallel_for(std::size_t n, unsigned jobs, F &&fn)
{
    if (jobs <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(jobs, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto &t : pool) t.join();
}

class bit_row {
public:
    bit_row() = default;
    explicit bit_row(std::size_t bits) : bits_(bits), words_((bits + 63) / 64, 0) {}

    std::size_t size() const noexcept { return bits_; }
    void set(std::size_t i, bool v = true)
    {
        const std::uint64_t m = std::uint64_t{1} << (i % 64);
        if (v) {
            words_[i / 64] |= m;
        } else {
            words_[i / 64] &= ~m;
        }
    }
    bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }

    std::size_t count() const
    {
        std::size_t n = 0;
        for (const auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }
    bool none() const
    {
        return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
    }
    bool subset_of(const bit_row &o) const
    {
        for (std::size_t i = 0; i < words_.size(); ++i) {
            if ((words_[i] & ~o.words_[i]) != 0) return false;
        }
        return true;
    }
    bool intersects(const bit_row &o) const
    {
        for (std::size_t i = 0; i < words_.size(); ++i) {
            if ((words_[i] & o.words_[i]) != 0) return true;
        }
        return false;
    }
    bit_row &operator|=(const bit_row &o)
    {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
        return *this;
    }
    bit_row &operator&=(const bit_row &o)
    {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
        return *this;
    }
    bool operator==(const bit_row &) const = default;

private:
    std::size_t bits_{0};
    std::vector<std::uint64_t> words_;
};

struct compiled_signature {
    std::string signature_id;
    regex::pattern handle;
    bool case_insensitive{true};
};

inline compiled_signature compile(const signature &s, bool case_insensitive = true)
{
    try {
        return {s.id, regex::pattern(s.pattern, case_insensitive), case_insensitive};
    } catch (const regex_dialect_error &e) {
        throw e.with_id(s.id);
    }
}

inline bool matches(const compiled_signature &c, std::string_view text) { return c.handle.search(text); }

struct match_options {
    bool case_sensitive{false};
    unsigned jobs{1};
};

struct detection_matrix {
    std::vector<std::string> signature_ids;
    std::vector<std::string> vector_ids;
    std::vector<bit_row> rows;
    std::string pipeline_fingerprint;

    bool cell(std::size_t sig, std::size_t vec) const { return rows[sig].test(vec); }

    std::size_t signature_index(std::string_view id) const
    {
        for (std::size_t i = 0; i < signature_ids.size(); ++i) {
            if (signature_ids[i] == id) return i;
        }
        throw unknown_id(std::string(id));
    }

    const bit_row &row(std::string_view id) const { return rows[signature_index(id)]; }

    std::vector<std::string> row_ids(std::size_t sig) const
    {
        std::vector<std::string> out;
        for (std::size_t v = 0; v < vector_ids.size(); ++v) {
            if (rows[sig].test(v)) out.push_back(vector_ids[v]);
        }
        return out;
    }

    bit_row mask(const std::set<std::string> &ids) const
    {
        bit_row m(vector_ids.size());
        for (std::size_t v = 0; v < vector_ids.size(); ++v) {
            if (ids.count(vector_ids[v]) != 0) m.set(v);
        }
        return m;
    }

    bool operator==(const detection_matrix &) const = default;
};

inline std::vector<compiled_signature> compile_all(const corpus &c, const match_options &opt)
{
    std::vector<compiled_signature> out;
    out.reserve(c.signatures.size());
    for (const auto &s : c.signatures) out.push_back(compile(s, !opt.case_sensitive));
    return out;
}

// cell[n][v] = matches(S_n, apply(p, payload_v)). The prefilter is not consulted.
inline detection_matrix build_detection_matrix(const corpus &c, const pipeline &p,
                                               const match_options &opt = {})
{
    detection_matrix m;
    m.pipeline_fingerprint = p.fingerprint();
    for (const auto &s : c.signatures) m.signature_ids.push_back(s.id);
    for (const auto &v : c.vectors) m.vector_ids.push_back(v.id);
    const auto compiled = compile_all(c, opt);
    std::vector<std::string> texts(c.vectors.size());
    parallel_for(c.vectors.size(), opt.jobs, [&](std::size_t i) { texts[i] = p.apply(c.vectors[i].payload); });
    m.rows.assign(c.signatures.size(), bit_row(c.vectors.size()));
    parallel_for(c.signatures.size(), opt.jobs, [&](std::size_t n) {
        for (std::size_t v = 0; v < texts.size(); ++v) {
            if (matches(compiled[n], texts[v])) m.rows[n].set(v);
        }
    });
    return m;
}

enum class bypass_stage { prefilter, rules };

inline std::string_view to_string(bypass_stage s)
{
    return s == bypass_stage::prefilter ? "prefilter" : "rules";
}

// IDS'_a: vectors that trigger nothing under the full pipeline.
struct bypass_set {
    std::vector<std::string> ids;
    std::vector<bypass_stage> stages; // parallel to ids
    bit_row mask;

    bool contains(std::string_view id) const { return std::find(ids.begin(), ids.end(), id) != ids.end(); }
};

inline bypass_set full_pipeline_bypass(const corpus &c, const pipeline &p, const match_options &opt = {})
{
    const auto compiled = compile_all(c, opt);
    std::vector<int> verdict(c.vectors.size(), 0); // 0 detected, 1 prefilter, 2 rules
    parallel_for(c.vectors.size(), opt.jobs, [&](std::size_t i) {
        const std::string text = p.apply(c.vectors[i].payload);
        if (!p.prefilter_pass(text)) {
            verdict[i] = 1;
            return;
        }
        const bool hit = std::any_of(compiled.begin(), compiled.end(),
                                     [&](const compiled_signature &cs) { return matches(cs, text); });
        verdict[i] = hit ? 0 : 2;
    });
    bypass_set b;
    b.mask = bit_row(c.vectors.size());
    for (std::size_t i = 0; i < c.vectors.size(); ++i) {
        if (verdict[i] == 0) continue;
        b.ids.push_back(c.vectors[i].id);
        b.stages.push_back(verdict[i] == 1 ? bypass_stage::prefilter : bypass_stage::rules);
        b.mask.set(i);
    }
    return b;
}

inline void write_matrix_csv(std::ostream &out, const detection_matrix &m)
{
    out << "signature";
    for (const auto &v : m.vector_ids) out << ',' << v;
    out << '\n';
    for (std::size_t n = 0; n < m.signature_ids.size(); ++n) {
        out << m.signature_ids[n];
        for (std::size_t v = 0; v < m.vector_ids.size(); ++v) out << ',' << (m.cell(n, v) ? '1' : '0');
        out << '\n';
    }
}

inline nlohmann::json matrix_to_json(const detection_matrix &m)
{
    nlohmann::json rows = nlohmann::json::array();
    nlohmann::json sums = nlohmann::json::object();
    for (std::size_t n = 0; n < m.signature_ids.size(); ++n) {
        std::string bits;
        for (std::size_t v = 0; v < m.vector_ids.size(); ++v) bits += m.cell(n, v) ? '1' : '0';
        rows.push_back(bits);
        sums[m.signature_ids[n]] = m.rows[n].count();
    }
    return {{"signature_ids", m.signature_ids}, {"vector_ids", m.vector_ids}, {"rows", rows},
            {"row_sums", sums}, {"pipeline_fingerprint", m.pipeline_fingerprint}};
}

inline detection_matrix matrix_from_json(const nlohmann::json &j)
{
    detection_matrix m;
    try {
        m.signature_ids = j.at("signature_ids").get<std::vector<std::string>>();
        m.vector_ids = j.at("vector_ids").get<std::vector<std::string>>();
        m.pipeline_fingerprint = j.value("pipeline_fingerprint", std::string());
        const auto rows = j.at("rows").get<std::vector<std::string>>();
        if (rows.size() != m.signature_ids.size()) throw parse_error("matrix row count mismatch", 0);
        for (const auto &r : rows) {
            if (r.size() != m.vector_ids.size()) throw parse_error("matrix row width mismatch", 0);
            bit_row b(r.size());
            for (std::size_t v = 0; v < r.size(); ++v) b.set(v, r[v] == '1');
            m.rows.push_back(std::move(b));
        }
    } catch (const nlohmann::json::exception &e) {
        throw parse_error(std::string("matrix JSON: ") + e.what(), 0);
    }
    return m;
}

inline detection_matrix read_matrix_csv(std::istream &in)
{
    detection_matrix m;
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
        ++no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split(line, ',');
        if (m.vector_ids.empty() && no == 1) {
            m.vector_ids.assign(cells.begin() + 1, cells.end());
            continue;
        }
        if (cells.size() != m.vector_ids.size() + 1) {
            throw parse_error("matrix row width mismatch", no);
        }
        m.signature_ids.push_back(cells[0]);
        bit_row b(m.vector_ids.size());
        for (std::size_t v = 1; v < cells.size(); ++v) {
            if (cells[v] != "0" && cells[v] != "1") throw parse_error("matrix cell must be 0 or 1", no);
            b.set(v - 1, cells[v] == "1");
        }
        m.rows.push_back(std::move(b));
    }
    return m;
}

} // namespace sigaudit
