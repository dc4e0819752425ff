#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lmh {

/// Base class for every error raised by the pipeline.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// corpus

/// Line numbers carried by corpus errors are 1-based.
class MalformedLine : public Error {
public:
    MalformedLine(std::size_t line_no, const std::string& detail)
        : Error("malformed line " + std::to_string(line_no) + ": " + detail), line_no_(line_no) {}
    std::size_t line_no() const noexcept { return line_no_; }

private:
    std::size_t line_no_;
};

class MissingField : public Error {
public:
    MissingField(std::string field, std::size_t line_no)
        : Error("missing field \"" + field + "\" on line " + std::to_string(line_no)),
          field_(std::move(field)), line_no_(line_no) {}
    const std::string& field() const noexcept { return field_; }
    std::size_t line_no() const noexcept { return line_no_; }

private:
    std::string field_;
    std::size_t line_no_;
};

class BadLabel : public Error {
public:
    explicit BadLabel(std::size_t line_no)
        : Error("label outside {0,1} on line " + std::to_string(line_no)), line_no_(line_no) {}
    std::size_t line_no() const noexcept { return line_no_; }

private:
    std::size_t line_no_;
};

class DuplicateRecordId : public Error {
public:
    explicit DuplicateRecordId(const std::string& id) : Error("duplicate record id \"" + id + "\"") {}
};

// ---------------------------------------------------------------------------
// taskform

class MultipleCorrect : public Error {
public:
    explicit MultipleCorrect(std::string key)
        : Error("more than one correct candidate for question \"" + key + "\""), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class IndexOutOfRange : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// prompting

class InsufficientShots : public Error {
public:
    InsufficientShots(std::string kind)
        : Error("no qualifying training example for shot kind \"" + kind + "\""), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class BudgetUnsatisfiable : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// provider

class TransientExhausted : public Error {
public:
    using Error::Error;
};

class AuthFailure : public Error {
public:
    using Error::Error;
};

class ProviderRejection : public Error {
public:
    ProviderRejection(int status, const std::string& detail)
        : Error("provider rejected request (status " + std::to_string(status) + "): " + detail),
          status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

// ---------------------------------------------------------------------------
// rules / metrics

class MisalignedInputs : public Error {
public:
    using Error::Error;
};

class UnlabeledGold : public Error {
public:
    explicit UnlabeledGold(std::string record_id)
        : Error("gold record \"" + record_id + "\" has no label"), record_id_(std::move(record_id)) {}
    const std::string& record_id() const noexcept { return record_id_; }

private:
    std::string record_id_;
};

class EmptyScoreSet : public Error {
public:
    EmptyScoreSet() : Error("no scored prediction/gold pairs") {}
};

}  // namespace lmh
