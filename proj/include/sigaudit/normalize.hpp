#pragma once

#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigaudit/errors.hpp"
#include "sigaudit/regex.hpp"
#include "sigaudit/util.hpp"

namespace sigaudit {

enum class transform { url_decode, nbsp_to_space, case_fold, whitespace_collapse, quoted_digit_simplify };

inline std::string_view to_string(transform t)
{
    switch (t) {
    case transform::url_decode:
        return "url_decode";
    case transform::nbsp_to_space:
        return "nbsp_to_space";
    case transform::case_fold:
        return "case_fold";
    case transform::whitespace_collapse:
        return "whitespace_collapse";
    case transform::quoted_digit_simplify:
        return "quoted_digit_simplify";
    }
    return "";
}

inline transform parse_transform(std::string_view name)
{
    for (auto t : {transform::url_decode, transform::nbsp_to_space, transform::case_fold,
                   transform::whitespace_collapse, transform::quoted_digit_simplify}) {
        if (to_string(t) == name) return t;
    }
    throw parse_error("unknown transform: " + std::string(name), 0);
}

inline constexpr std::string_view default_prefilter = R"([a-zA-Z0-9\s@_.,!?]+)";

namespace detail {
inline int hex_value(char c)
{
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}
} // namespace detail

// %HH only; '+' is left alone. Lenient mode copies malformed escapes through.
inline std::string url_decode(std::string_view in, bool strict = false)
{
    std::string out;
    out.reserve(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (in[i] == '%') {
            const int hi = i + 1 < in.size() ? detail::hex_value(in[i + 1]) : -1;
            const int lo = i + 2 < in.size() ? detail::hex_value(in[i + 2]) : -1;
            if (hi >= 0 && lo >= 0) {
                out += static_cast<char>(hi * 16 + lo);
                i += 2;
                continue;
            }
            if (strict) {
                throw decode_error("malformed percent escape", i);
            }
        }
        out += in[i];
    }
    return out;
}

inline std::string url_encode(std::string_view in)
{
    static constexpr std::string_view keep = "-_.~!()*,/:;=?@[]^{}$`\\";
    static constexpr char digits[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(in.size() * 3);
    for (const char c : in) {
        const auto u = static_cast<unsigned char>(c);
        const bool alnum = (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || (u >= '0' && u <= '9');
        if (alnum || keep.find(c) != std::string_view::npos) {
            out += c;
        } else {
            out += '%';
            out += digits[u >> 4];
            out += digits[u & 0xf];
        }
    }
    return out;
}

inline std::string nbsp_to_space(std::string_view in)
{
    std::string out;
    out.reserve(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        const auto c = static_cast<unsigned char>(in[i]);
        if (c == 0xC2 && i + 1 < in.size() && static_cast<unsigned char>(in[i + 1]) == 0xA0) {
            out += ' ';
            ++i;
        } else if (c == 0xA0) {
            out += ' ';
        } else {
            out += in[i];
        }
    }
    return out;
}

inline std::string case_fold(std::string_view in)
{
    std::string out(in);
    for (auto &c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
    }
    return out;
}

inline std::string whitespace_collapse(std::string_view in)
{
    std::string out;
    out.reserve(in.size());
    bool in_run = false;
    for (const char c : in) {
        if (regex::is_space_byte(static_cast<unsigned char>(c))) {
            if (!in_run) out += ' ';
            in_run = true;
        } else {
            out += c;
            in_run = false;
        }
    }
    return out;
}

// Quote pairs are consumed left to right; a pair holding only digits loses its quotes.
inline std::string quoted_digit_simplify(std::string_view in)
{
    std::string out;
    out.reserve(in.size());
    std::size_t i = 0;
    while (i < in.size()) {
        const char q = in[i];
        if (q != '"' && q != '\'') {
            out += q;
            ++i;
            continue;
        }
        const auto close = in.find(q, i + 1);
        if (close == std::string_view::npos) {
            out.append(in.substr(i));
            break;
        }
        const auto inner = in.substr(i + 1, close - i - 1);
        const bool digits = !inner.empty() &&
                            inner.find_first_not_of("0123456789") == std::string_view::npos;
        out.append(digits ? inner : in.substr(i, close - i + 1));
        i = close + 1;
    }
    return out;
}

inline std::string apply_transform(transform t, std::string_view in, bool strict = false)
{
    switch (t) {
    case transform::url_decode:
        return url_decode(in, strict);
    case transform::nbsp_to_space:
        return nbsp_to_space(in);
    case transform::case_fold:
        return case_fold(in);
    case transform::whitespace_collapse:
        return whitespace_collapse(in);
    case transform::quoted_digit_simplify:
        return quoted_digit_simplify(in);
    }
    return std::string(in);
}

class pipeline {
public:
    pipeline() = default;

    pipeline(std::vector<transform> transforms, std::optional<std::string> prefilter,
             bool strict_decode = false)
        : transforms_(std::move(transforms)), prefilter_(std::move(prefilter)), strict_(strict_decode)
    {
        if (prefilter_) {
            filter_ = std::make_shared<regex::pattern>(regex::pattern::full(*prefilter_));
        }
    }

    // The deployed model: decode, canonicalise, then skip harmless-looking input.
    static pipeline deployed()
    {
        return {{transform::url_decode, transform::nbsp_to_space, transform::case_fold,
                 transform::whitespace_collapse, transform::quoted_digit_simplify},
                std::string(default_prefilter)};
    }

    // Signature capability: payloads are decoded once and nothing else.
    static pipeline capability() { return {{transform::url_decode}, std::nullopt}; }

    const std::vector<transform> &transforms() const noexcept { return transforms_; }
    const std::optional<std::string> &prefilter() const noexcept { return prefilter_; }
    bool strict() const noexcept { return strict_; }
    bool empty() const noexcept { return transforms_.empty() && !prefilter_; }

    std::string apply(std::string_view payload) const
    {
        std::string cur(payload);
        for (const auto t : transforms_) {
            cur = apply_transform(t, cur, strict_);
        }
        return cur;
    }

    // True when the payload reaches the rules. Takes the transformed payload.
    bool prefilter_pass(std::string_view transformed) const
    {
        return !filter_ || !filter_->search(transformed);
    }

    nlohmann::json to_json() const
    {
        nlohmann::json names = nlohmann::json::array();
        for (const auto t : transforms_) names.push_back(std::string(to_string(t)));
        nlohmann::json j{{"transforms", names}};
        j["prefilter"] = prefilter_ ? nlohmann::json(*prefilter_) : nlohmann::json(nullptr);
        if (strict_) j["strict"] = true;
        return j;
    }

    static pipeline from_json(const nlohmann::json &j)
    {
        try {
            std::vector<transform> ts;
            for (const auto &n : j.at("transforms")) ts.push_back(parse_transform(n.get<std::string>()));
            std::optional<std::string> pf;
            if (j.contains("prefilter") && !j.at("prefilter").is_null()) {
                pf = j.at("prefilter").get<std::string>();
            }
            return {std::move(ts), std::move(pf), j.value("strict", false)};
        } catch (const nlohmann::json::exception &e) {
            throw parse_error(std::string("pipeline config: ") + e.what(), 0);
        }
    }

    static pipeline load_file(const std::string &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw io_error("cannot open " + path);
        }
        try {
            return from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::parse_error &e) {
            throw parse_error(path + ": " + e.what(), 0);
        }
    }

    std::string fingerprint() const { return sigaudit::fingerprint(to_json().dump()); }

private:
    std::vector<transform> transforms_;
    std::optional<std::string> prefilter_;
    bool strict_{false};
    std::shared_ptr<const regex::pattern> filter_;
};

inline std::string apply(const pipeline &p, std::string_view payload) { return p.apply(payload); }

inline bool prefilter_pass(const pipeline &p, std::string_view transformed)
{
    return p.prefilter_pass(transformed);
}

} // namespace sigaudit
