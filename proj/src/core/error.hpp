// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scene_forge {

enum class ErrorCode {
    Shape = 1,
    Parameter,
    EmptyInput,
    DegenerateDepth,
    Config,
    Io,
    Protocol,
    Transport,
    Timeout,
    Stage,
    Invariant,
};

std::string_view to_string(ErrorCode code);

/// Library error. `where` carries a field path or stage tag when one applies.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string where = {})
        : std::runtime_error(message), code_(code), where_(std::move(where)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& where() const noexcept { return where_; }

private:
    ErrorCode code_;
    std::string where_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message, std::string where = {}) {
    throw Error(code, message, std::move(where));
}

inline void require(bool condition, ErrorCode code, const char* message) {
    if (!condition) fail(code, message);
}

} // namespace scene_forge
