#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace sigaudit {

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class io_error : public error {
public:
    using error::error;
};

// Malformed row in a signature/vector/config file. line is 1-based, 0 when unknown.
class parse_error : public error {
public:
    parse_error(const std::string &msg, std::size_t line)
        : error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), detail_(msg), line_(line)
    {}
    std::size_t line() const noexcept { return line_; }
    const std::string &detail() const noexcept { return detail_; }

private:
    std::string detail_;
    std::size_t line_;
};

class duplicate_id : public error {
public:
    explicit duplicate_id(std::string id) : error("duplicate id: " + id), id_(std::move(id)) {}
    const std::string &id() const noexcept { return id_; }

private:
    std::string id_;
};

class regex_dialect_error : public error {
public:
    regex_dialect_error(std::string id, std::string detail, std::size_t offset)
        : error((id.empty() ? std::string() : id + ": ") + detail + " at offset " +
                std::to_string(offset)),
          id_(std::move(id)), detail_(std::move(detail)), offset_(offset)
    {}
    const std::string &id() const noexcept { return id_; }
    const std::string &detail() const noexcept { return detail_; }
    std::size_t offset() const noexcept { return offset_; }

    regex_dialect_error with_id(std::string id) const { return {std::move(id), detail_, offset_}; }

private:
    std::string id_;
    std::string detail_;
    std::size_t offset_;
};

class unknown_signature_ref : public error {
public:
    explicit unknown_signature_ref(std::string id)
        : error("unknown signature reference: " + id), id_(std::move(id))
    {}
    const std::string &id() const noexcept { return id_; }

private:
    std::string id_;
};

class unknown_intent : public error {
public:
    explicit unknown_intent(const std::string &token) : error("unknown intent: " + token) {}
};

class unknown_dialect : public error {
public:
    explicit unknown_dialect(const std::string &token) : error("unknown dialect: " + token) {}
};

class unknown_id : public error {
public:
    explicit unknown_id(const std::string &id) : error("unknown id: " + id) {}
};

class decode_error : public error {
public:
    decode_error(const std::string &msg, std::size_t offset)
        : error(msg + " at offset " + std::to_string(offset)), offset_(offset)
    {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class indeterminate_expansion : public error {
public:
    explicit indeterminate_expansion(const std::string &id)
        : error(id + ": sub-rule expansion hit its caps")
    {}
};

} // namespace sigaudit
