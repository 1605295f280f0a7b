// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace polykit {

/// Raised when input data violates a documented contract (degenerate
/// annotations, malformed records, infeasible configurations).  The CLI maps
/// this to exit code 2; everything else unexpected maps to exit code 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace polykit
