#pragma once

#include <stdexcept>
#include <string>

namespace hapbutton {

/// Broad failure category. The CLI maps these onto its exit codes.
enum class ErrorCategory { config, data, numeric };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    [[nodiscard]] ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

/// A caller-supplied parameter is outside its allowed range.
class InvalidParameter : public Error {
public:
    explicit InvalidParameter(const std::string& what)
        : Error(ErrorCategory::config, what) {}
};

/// Input data violates a precondition (empty, negative, malformed).
class InvalidInput : public Error {
public:
    explicit InvalidInput(const std::string& what)
        : Error(ErrorCategory::data, what) {}
};

/// A numerical routine could not produce a usable answer.
class NumericFailure : public Error {
public:
    explicit NumericFailure(const std::string& what)
        : Error(ErrorCategory::numeric, what) {}
};

}  // namespace hapbutton
