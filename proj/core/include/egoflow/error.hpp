#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace egoflow {

enum class ErrorCode {
    kInvalidInput,
    kDegenerate,
    kInsufficientData,
    kEstimationFailed,
    kFormat,
};

const char* to_string(ErrorCode code);

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Malformed file contents. Carries the byte offset of the problem when known.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& what,
                         std::optional<std::size_t> byte_offset = std::nullopt);

    std::optional<std::size_t> byte_offset() const noexcept { return offset_; }

private:
    std::optional<std::size_t> offset_;
};

[[noreturn]] void throw_invalid(const std::string& what);

}  // namespace egoflow
