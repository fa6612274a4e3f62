#include "egoflow/error.hpp"

#include "egoflow/grid.hpp"

namespace egoflow {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::kInvalidInput: return "invalid input";
        case ErrorCode::kDegenerate: return "degenerate configuration";
        case ErrorCode::kInsufficientData: return "insufficient data";
        case ErrorCode::kEstimationFailed: return "estimation failed";
        case ErrorCode::kFormat: return "format error";
    }
    return "unknown error";
}

namespace {

std::string with_offset(const std::string& what, std::optional<std::size_t> offset) {
    if (!offset) return what;
    return what + " (at byte offset " + std::to_string(*offset) + ")";
}

}  // namespace

FormatError::FormatError(const std::string& what, std::optional<std::size_t> byte_offset)
    : Error(ErrorCode::kFormat, with_offset(what, byte_offset)), offset_(byte_offset) {}

void throw_invalid(const std::string& what) {
    throw Error(ErrorCode::kInvalidInput, what);
}

std::size_t popcount(const Mask& mask) {
    std::size_t n = 0;
    for (auto m : mask.pixels()) n += m != 0;
    return n;
}

}  // namespace egoflow
