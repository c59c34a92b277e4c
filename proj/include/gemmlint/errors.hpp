// Copyright (c) 2026, the gemmlint authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace gemmlint {

/// Raised for malformed spec/config/CSV files. Messages carry
/// "path:line:" prefixes where a location is known.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace gemmlint
