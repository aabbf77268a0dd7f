#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace domstab {

// Root of every error thrown by the library. The CLI maps InputError
// subclasses to exit code 1 and AnalysisError subclasses to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InputError : public Error {
public:
    using Error::Error;
};

class AnalysisError : public Error {
public:
    using Error::Error;
};

// ---- ingest ----------------------------------------------------------------

class ParseError : public InputError {
public:
    ParseError(std::size_t row, const std::string& what)
        : InputError("parse error at row " + std::to_string(row) + ": " + what), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class ValueError : public InputError {
public:
    ValueError(std::size_t row, std::size_t column, const std::string& what)
        : InputError("bad value at row " + std::to_string(row) + ", column " + std::to_string(column) +
                     ": " + what),
          row_(row), column_(column) {}
    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

class DuplicateIdError : public InputError {
public:
    explicit DuplicateIdError(const std::string& id) : InputError("duplicate id: " + id), id_(id) {}
    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

class IdRuleError : public InputError {
public:
    explicit IdRuleError(const std::string& sample_id)
        : InputError("sample id does not match id rule: " + sample_id) {}
};

class EmptyRosterError : public AnalysisError {
public:
    using AnalysisError::AnalysisError;
};

// ---- metrics / stability ---------------------------------------------------

class ZeroCommunityError : public AnalysisError {
public:
    ZeroCommunityError() : AnalysisError("community has zero total abundance") {}
};

class IndexError : public AnalysisError {
public:
    IndexError(std::size_t index, std::size_t size)
        : AnalysisError("species index " + std::to_string(index) + " out of range for " +
                        std::to_string(size) + " species") {}
};

class PreconditionError : public AnalysisError {
public:
    using AnalysisError::AnalysisError;
};

class DegenerateRegressionError : public AnalysisError {
public:
    using AnalysisError::AnalysisError;
};

class SentinelError : public AnalysisError {
public:
    SentinelError() : AnalysisError("no finite species dominance value in subject series") {}
};

// ---- models / fitting / selection / dynamics -------------------------------

class EvalError : public AnalysisError {
public:
    using AnalysisError::AnalysisError;
};

class KindError : public AnalysisError {
public:
    using AnalysisError::AnalysisError;
};

class DegenerateFitError : public AnalysisError {
public:
    using AnalysisError::AnalysisError;
};

class InsufficientSupportError : public AnalysisError {
public:
    using AnalysisError::AnalysisError;
};

class SelectionError : public AnalysisError {
public:
    using AnalysisError::AnalysisError;
};

class DivergenceError : public AnalysisError {
public:
    explicit DivergenceError(std::size_t step)
        : AnalysisError("non-finite dominance at step " + std::to_string(step)), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

} // namespace domstab
