// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#include "error.hpp"

namespace scene_forge {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::Shape: return "shape";
    case ErrorCode::Parameter: return "parameter";
    case ErrorCode::EmptyInput: return "empty_input";
    case ErrorCode::DegenerateDepth: return "degenerate_depth";
    case ErrorCode::Config: return "config";
    case ErrorCode::Io: return "io";
    case ErrorCode::Protocol: return "protocol";
    case ErrorCode::Transport: return "transport";
    case ErrorCode::Timeout: return "timeout";
    case ErrorCode::Stage: return "stage";
    case ErrorCode::Invariant: return "invariant";
    }
    return "unknown";
}

} // namespace scene_forge
