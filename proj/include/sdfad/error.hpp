// Copyright Contributors to the sdfad Project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace sdfad {

enum class ErrorKind {
    Io,
    Parse,
    EmptyMesh,
    DegenerateExtent,
    NoValidFaces,
    MemoryBudgetExceeded,
    DimensionMismatch,
    NonFiniteActivation,
    EmptyBatch,
    TapeMismatch,
    ShapeMismatch,
    DivergedLoss,
    Format,
    Checksum,
    EmptyCloud,
    SingleClass,
    NoPositives,
    InvalidConfig,
};

/// Single exception type for the whole library; the kind tells callers
/// which contract was violated without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

} // namespace sdfad
