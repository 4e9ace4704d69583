#pragma once

// Linear-time regex subset used for signatures and prefilters.
//
// Supported: literals, classes, `.`, `^`, `$`, groups (capturing groups are
// grouping only), alternation, * + ? {m} {m,} {m,n} and their lazy forms,
// escapes \s \S \w \W \d \D \n \t \r \f \xHH and escaped punctuation.
// Matching is an unanchored search by a Pike VM, so there is no backtracking.
// `^`/`$` anchor to the whole text and `.` excludes '\n'.

#include <bitset>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "sigaudit/errors.hpp"

namespace sigaudit::regex {

using byte_set = std::bitset<256>;

inline constexpr int max_repeat_bound = 1000;
inline constexpr std::size_t max_program_size = 50000;

inline bool is_word_byte(unsigned char c)
{
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

inline bool is_space_byte(unsigned char c)
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline byte_set make_set(bool (*pred)(unsigned char))
{
    byte_set s;
    for (unsigned c = 0; c < 256; ++c) {
        if (pred(static_cast<unsigned char>(c))) {
            s.set(c);
        }
    }
    return s;
}

inline byte_set word_set() { return make_set(is_word_byte); }
inline byte_set space_set() { return make_set(is_space_byte); }
inline byte_set digit_set()
{
    return make_set([](unsigned char c) { return c >= '0' && c <= '9'; });
}

inline byte_set fold_case(byte_set s)
{
    for (unsigned c = 'a'; c <= 'z'; ++c) {
        if (s.test(c) || s.test(c - 32)) {
            s.set(c);
            s.set(c - 32);
        }
    }
    return s;
}

enum class node_kind : std::uint8_t {
    empty,
    literal,
    set,
    any,
    line_begin,
    line_end,
    concat,
    alternation,
    group,
    repeat
};

struct node {
    node_kind kind{node_kind::empty};
    unsigned char byte{0};
    byte_set members;
    bool negated{false};
    bool capturing{false};
    int min{0};
    int max{-1}; // < 0: unbounded
    bool lazy{false};
    std::size_t begin{0};
    std::size_t end{0};
    std::vector<node> children;

    bool is_atom() const
    {
        return kind == node_kind::literal || kind == node_kind::set || kind == node_kind::any;
    }
};

// Bytes an atom accepts. Case closure is taken before negation so that
// [^a] rejects both 'a' and 'A' under case-insensitive matching.
inline byte_set atom_bytes(const node &n, bool icase)
{
    byte_set s;
    switch (n.kind) {
    case node_kind::literal:
        s.set(n.byte);
        break;
    case node_kind::set:
        s = n.members;
        break;
    case node_kind::any:
        s.set();
        s.reset('\n');
        return s;
    default:
        return s;
    }
    if (icase) {
        s = fold_case(s);
    }
    if (n.negated) {
        s.flip();
    }
    return s;
}

class parser {
public:
    explicit parser(std::string_view src) : src_(src) {}

    node parse()
    {
        node n = parse_alternation();
        if (pos_ < src_.size()) {
            fail("unmatched ')'");
        }
        return n;
    }

private:
    struct escape_value {
        bool is_set{false};
        byte_set set;
        unsigned char byte{0};
    };

    [[noreturn]] void fail(const std::string &detail) const
    {
        throw regex_dialect_error({}, detail, pos_);
    }

    [[noreturn]] void fail_at(std::size_t at, const std::string &detail) const
    {
        throw regex_dialect_error({}, detail, at);
    }

    bool at_end() const { return pos_ >= src_.size(); }
    char peek(std::size_t ahead = 0) const
    {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    node parse_alternation()
    {
        const std::size_t start = pos_;
        std::vector<node> branches;
        branches.push_back(parse_concat());
        while (!at_end() && peek() == '|') {
            ++pos_;
            branches.push_back(parse_concat());
        }
        if (branches.size() == 1) {
            return std::move(branches.front());
        }
        node n;
        n.kind = node_kind::alternation;
        n.begin = start;
        n.end = pos_;
        n.children = std::move(branches);
        return n;
    }

    node parse_concat()
    {
        const std::size_t start = pos_;
        std::vector<node> items;
        while (!at_end() && peek() != '|' && peek() != ')') {
            items.push_back(parse_repeat());
        }
        if (items.size() == 1) {
            return std::move(items.front());
        }
        node n;
        n.kind = items.empty() ? node_kind::empty : node_kind::concat;
        n.begin = start;
        n.end = pos_;
        n.children = std::move(items);
        return n;
    }

    // Parses "{m}", "{m,}" or "{m,n}" at pos_. Returns false (pos_ untouched)
    // when the brace does not start a quantifier.
    bool parse_braces(int &lo, int &hi)
    {
        std::size_t p = pos_ + 1;
        auto number = [&](int &out) {
            const std::size_t s = p;
            long v = 0;
            while (p < src_.size() && src_[p] >= '0' && src_[p] <= '9') {
                v = v * 10 + (src_[p] - '0');
                if (v > 1000000) {
                    v = 1000000;
                }
                ++p;
            }
            out = static_cast<int>(v);
            return p > s;
        };
        if (!number(lo)) {
            return false;
        }
        if (p < src_.size() && src_[p] == '}') {
            hi = lo;
        } else if (p < src_.size() && src_[p] == ',') {
            ++p;
            if (p < src_.size() && src_[p] == '}') {
                hi = -1;
            } else if (!number(hi) || p >= src_.size() || src_[p] != '}') {
                return false;
            }
        } else {
            return false;
        }
        pos_ = p + 1;
        return true;
    }

    bool quantifier_ahead()
    {
        const char c = peek();
        if (c == '*' || c == '+' || c == '?') {
            return true;
        }
        if (c == '{') {
            const std::size_t save = pos_;
            int lo = 0;
            int hi = 0;
            const bool ok = parse_braces(lo, hi);
            pos_ = save;
            return ok;
        }
        return false;
    }

    node parse_repeat()
    {
        const std::size_t start = pos_;
        node atom = parse_atom();
        if (at_end() || !quantifier_ahead()) {
            return atom;
        }
        if (atom.kind == node_kind::line_begin || atom.kind == node_kind::line_end) {
            fail("quantified anchor");
        }
        int lo = 0;
        int hi = -1;
        const std::size_t qpos = pos_;
        switch (peek()) {
        case '*':
            ++pos_;
            break;
        case '+':
            lo = 1;
            ++pos_;
            break;
        case '?':
            hi = 1;
            ++pos_;
            break;
        default:
            parse_braces(lo, hi);
            break;
        }
        if (lo > max_repeat_bound || hi > max_repeat_bound) {
            pos_ = qpos;
            fail("repeat bound above " + std::to_string(max_repeat_bound));
        }
        if (hi >= 0 && hi < lo) {
            pos_ = qpos;
            fail("repeat bounds out of order");
        }
        node n;
        n.kind = node_kind::repeat;
        n.min = lo;
        n.max = hi;
        if (!at_end() && peek() == '?') {
            n.lazy = true;
            ++pos_;
        }
        if (!at_end() && quantifier_ahead()) {
            fail(peek() == '+' ? "possessive quantifier" : "nested quantifier");
        }
        n.begin = start;
        n.end = pos_;
        n.children.push_back(std::move(atom));
        return n;
    }

    node parse_atom()
    {
        const std::size_t start = pos_;
        node n;
        n.begin = start;
        const char c = peek();
        switch (c) {
        case '(':
            return parse_group();
        case '[':
            return parse_class();
        case '.':
            ++pos_;
            n.kind = node_kind::any;
            break;
        case '^':
            ++pos_;
            n.kind = node_kind::line_begin;
            break;
        case '$':
            ++pos_;
            n.kind = node_kind::line_end;
            break;
        case '*':
        case '+':
        case '?':
            fail("nothing to repeat");
        case '{':
            if (quantifier_ahead()) {
                fail("nothing to repeat");
            }
            ++pos_;
            n.kind = node_kind::literal;
            n.byte = '{';
            break;
        case '\\': {
            const escape_value e = parse_escape(false);
            if (e.is_set) {
                n.kind = node_kind::set;
                n.members = e.set;
            } else {
                n.kind = node_kind::literal;
                n.byte = e.byte;
            }
            break;
        }
        default:
            ++pos_;
            n.kind = node_kind::literal;
            n.byte = static_cast<unsigned char>(c);
            break;
        }
        n.end = pos_;
        return n;
    }

    node parse_group()
    {
        const std::size_t start = pos_;
        ++pos_;
        bool capturing = true;
        if (peek() == '?') {
            const char k = peek(1);
            if (k == ':') {
                capturing = false;
                pos_ += 2;
            } else if (k == '=' || k == '!') {
                fail_at(start, "lookahead");
            } else if (k == '<' && (peek(2) == '=' || peek(2) == '!')) {
                fail_at(start, "lookbehind");
            } else if (k == '<' || k == 'P' || k == '\'') {
                fail_at(start, "named group");
            } else if (k == '#') {
                fail_at(start, "inline comment");
            } else if (k == '>' || k == '|') {
                fail_at(start, "atomic or branch-reset group");
            } else {
                fail_at(start, "inline flags");
            }
        }
        node body = parse_alternation();
        if (at_end() || peek() != ')') {
            fail("missing ')'");
        }
        ++pos_;
        node n;
        n.kind = node_kind::group;
        n.capturing = capturing;
        n.begin = start;
        n.end = pos_;
        n.children.push_back(std::move(body));
        return n;
    }

    escape_value parse_escape(bool in_class)
    {
        ++pos_;
        if (at_end()) {
            fail("trailing backslash");
        }
        const char c = peek();
        escape_value e;
        auto as_set = [&](byte_set s, bool complement) {
            e.is_set = true;
            e.set = complement ? ~s : s;
        };
        switch (c) {
        case 'd':
            as_set(digit_set(), false);
            break;
        case 'D':
            as_set(digit_set(), true);
            break;
        case 'w':
            as_set(word_set(), false);
            break;
        case 'W':
            as_set(word_set(), true);
            break;
        case 's':
            as_set(space_set(), false);
            break;
        case 'S':
            as_set(space_set(), true);
            break;
        case 'n':
            e.byte = '\n';
            break;
        case 't':
            e.byte = '\t';
            break;
        case 'r':
            e.byte = '\r';
            break;
        case 'f':
            e.byte = '\f';
            break;
        case 'x': {
            auto hex = [](char h) -> int {
                if (h >= '0' && h <= '9') return h - '0';
                if (h >= 'a' && h <= 'f') return h - 'a' + 10;
                if (h >= 'A' && h <= 'F') return h - 'A' + 10;
                return -1;
            };
            const int hi = hex(peek(1));
            const int lo = hex(peek(2));
            if (hi < 0 || lo < 0) {
                fail("\\x needs two hex digits");
            }
            e.byte = static_cast<unsigned char>(hi * 16 + lo);
            pos_ += 2;
            break;
        }
        case 'b':
            fail(in_class ? "backspace escape in class" : "word-boundary assertion");
        case 'B':
        case 'A':
        case 'Z':
        case 'z':
        case 'G':
            fail(std::string("assertion \\") + c);
        default:
            if (c >= '1' && c <= '9') {
                fail("backreference");
            }
            if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9')) {
                fail(std::string("unsupported escape \\") + c);
            }
            e.byte = static_cast<unsigned char>(c);
            break;
        }
        ++pos_;
        return e;
    }

    node parse_class()
    {
        const std::size_t start = pos_;
        ++pos_;
        node n;
        n.kind = node_kind::set;
        if (peek() == '^') {
            n.negated = true;
            ++pos_;
        }
        bool first = true;
        while (true) {
            if (at_end()) {
                pos_ = start;
                fail("unterminated character class");
            }
            const char c = peek();
            if (c == ']' && !first) {
                ++pos_;
                break;
            }
            if (c == '[' && (peek(1) == ':' || peek(1) == '=' || peek(1) == '.')) {
                fail("POSIX class");
            }
            first = false;
            escape_value lo;
            if (c == '\\') {
                lo = parse_escape(true);
            } else {
                lo.byte = static_cast<unsigned char>(c);
                ++pos_;
            }
            if (lo.is_set) {
                n.members |= lo.set;
                continue;
            }
            if (peek() == '-' && pos_ + 1 < src_.size() && peek(1) != ']') {
                ++pos_;
                escape_value hi;
                if (peek() == '\\') {
                    hi = parse_escape(true);
                } else {
                    hi.byte = static_cast<unsigned char>(peek());
                    ++pos_;
                }
                if (hi.is_set) {
                    fail("class escape as range end");
                }
                if (hi.byte < lo.byte) {
                    fail("range out of order");
                }
                for (unsigned b = lo.byte; b <= hi.byte; ++b) {
                    n.members.set(b);
                }
                continue;
            }
            n.members.set(lo.byte);
        }
        n.begin = start;
        n.end = pos_;
        return n;
    }

    std::string_view src_;
    std::size_t pos_{0};
};

inline node parse(std::string_view src) { return parser(src).parse(); }

enum class opcode : std::uint8_t { byte, split, jump, assert_begin, assert_end, match };

struct instruction {
    opcode op;
    std::uint32_t x{0};
    std::uint32_t y{0};
};

struct program {
    std::vector<instruction> code;
    std::vector<byte_set> sets;
};

class compiler {
public:
    explicit compiler(bool icase) : icase_(icase) {}

    program compile(const node &root)
    {
        emit(root);
        push({opcode::match});
        return std::move(prog_);
    }

private:
    std::uint32_t here() const { return static_cast<std::uint32_t>(prog_.code.size()); }

    void push(instruction i)
    {
        if (prog_.code.size() >= max_program_size) {
            throw regex_dialect_error({}, "pattern expands beyond program limit", 0);
        }
        prog_.code.push_back(i);
    }

    void emit(const node &n)
    {
        switch (n.kind) {
        case node_kind::empty:
            break;
        case node_kind::literal:
        case node_kind::set:
        case node_kind::any:
            prog_.sets.push_back(atom_bytes(n, icase_));
            push({opcode::byte, static_cast<std::uint32_t>(prog_.sets.size() - 1)});
            break;
        case node_kind::line_begin:
            push({opcode::assert_begin});
            break;
        case node_kind::line_end:
            push({opcode::assert_end});
            break;
        case node_kind::concat:
            for (const auto &c : n.children) {
                emit(c);
            }
            break;
        case node_kind::group:
            emit(n.children.front());
            break;
        case node_kind::alternation: {
            std::vector<std::uint32_t> exits;
            for (std::size_t i = 0; i < n.children.size(); ++i) {
                if (i + 1 < n.children.size()) {
                    const std::uint32_t split = here();
                    push({opcode::split, split + 1, 0});
                    emit(n.children[i]);
                    exits.push_back(here());
                    push({opcode::jump});
                    prog_.code[split].y = here();
                } else {
                    emit(n.children[i]);
                }
            }
            for (auto e : exits) {
                prog_.code[e].x = here();
            }
            break;
        }
        case node_kind::repeat: {
            const node &body = n.children.front();
            for (int i = 0; i < n.min; ++i) {
                emit(body);
            }
            if (n.max < 0) {
                const std::uint32_t split = here();
                push({opcode::split, split + 1, 0});
                emit(body);
                push({opcode::jump, split});
                prog_.code[split].y = here();
            } else {
                std::vector<std::uint32_t> splits;
                for (int i = n.min; i < n.max; ++i) {
                    splits.push_back(here());
                    push({opcode::split, here() + 1, 0});
                    emit(body);
                }
                for (auto s : splits) {
                    prog_.code[s].y = here();
                }
            }
            break;
        }
        }
    }

    bool icase_;
    program prog_;
};

// Boolean unanchored search over a compiled program.
inline bool search(const program &prog, std::string_view text)
{
    const std::size_t size = prog.code.size();
    std::vector<std::uint32_t> current;
    std::vector<std::uint32_t> next;
    std::vector<std::uint32_t> stack;
    std::vector<std::size_t> mark(size, static_cast<std::size_t>(-1));
    current.reserve(size);
    next.reserve(size);

    // Follows epsilon edges from pc at position pos; returns true on match.
    auto add = [&](std::vector<std::uint32_t> &list, std::uint32_t pc, std::size_t pos) {
        stack.clear();
        stack.push_back(pc);
        while (!stack.empty()) {
            const std::uint32_t p = stack.back();
            stack.pop_back();
            if (mark[p] == pos) {
                continue;
            }
            mark[p] = pos;
            const instruction &in = prog.code[p];
            switch (in.op) {
            case opcode::byte:
                list.push_back(p);
                break;
            case opcode::match:
                return true;
            case opcode::jump:
                stack.push_back(in.x);
                break;
            case opcode::split:
                stack.push_back(in.y);
                stack.push_back(in.x);
                break;
            case opcode::assert_begin:
                if (pos == 0) {
                    stack.push_back(p + 1);
                }
                break;
            case opcode::assert_end:
                if (pos == text.size()) {
                    stack.push_back(p + 1);
                }
                break;
            }
        }
        return false;
    };

    for (std::size_t i = 0;; ++i) {
        if (add(current, 0, i)) {
            return true;
        }
        if (i == text.size()) {
            return false;
        }
        const auto c = static_cast<unsigned char>(text[i]);
        next.clear();
        for (const std::uint32_t pc : current) {
            const instruction &in = prog.code[pc];
            if (prog.sets[in.x].test(c) && add(next, pc + 1, i + 1)) {
                return true;
            }
        }
        std::swap(current, next);
    }
}

class pattern {
public:
    pattern() = default;

    explicit pattern(std::string_view source, bool case_insensitive = true)
        : source_(source), icase_(case_insensitive)
    {
        auto ast = std::make_shared<node>(parse(source_));
        auto prog = std::make_shared<program>(compiler(icase_).compile(*ast));
        ast_ = std::move(ast);
        prog_ = std::move(prog);
    }

    bool search(std::string_view text) const { return prog_ && regex::search(*prog_, text); }

    // Whole-text match, equivalent to searching ^(?:source)$.
    static pattern full(std::string_view source, bool case_insensitive = true)
    {
        std::string wrapped = "^(?:";
        wrapped.append(source);
        wrapped += ")$";
        return pattern(wrapped, case_insensitive);
    }

    const std::string &source() const noexcept { return source_; }
    bool case_insensitive() const noexcept { return icase_; }
    const node &ast() const { return *ast_; }
    const program &code() const { return *prog_; }

private:
    std::string source_;
    bool icase_{true};
    std::shared_ptr<const node> ast_;
    std::shared_ptr<const program> prog_;
};

} // namespace sigaudit::regex
